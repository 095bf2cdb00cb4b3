#include "rcafuse/log_extract.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace rcafuse {

namespace {

bool contains_error_keyword(const std::string& message) {
    static constexpr const char* kWord = "error";
    if (message.size() < 5) return false;
    for (std::size_t i = 0; i + 5 <= message.size(); ++i) {
        bool hit = true;
        for (std::size_t k = 0; k < 5; ++k) {
            if (std::tolower(static_cast<unsigned char>(message[i + k])) != kWord[k]) {
                hit = false;
                break;
            }
        }
        if (hit) return true;
    }
    return false;
}

}  // namespace

std::vector<LogRecord> filter_error_logs(const std::vector<LogRecord>& records, const FaultCase& c) {
    std::vector<LogRecord> kept;
    for (const auto& r : records) {
        if (r.timestamp_ns < c.start_ns || r.timestamp_ns > c.end_ns) continue;
        if (!contains_error_keyword(r.message)) continue;
        kept.push_back(r);
    }
    return kept;
}

std::vector<LogFaultFeature> featurize(const std::vector<LogRecord>& filtered, const DrainModel& model) {
    // dedup key: pod + template identity (matched id, or the masked message
    // itself when the model has no matching cluster)
    struct GroupKey {
        std::string pod;
        int template_id;
        std::string template_string;
        bool operator<(const GroupKey& o) const {
            return std::tie(pod, template_id, template_string) <
                   std::tie(o.pod, o.template_id, o.template_string);
        }
    };

    std::map<GroupKey, LogFaultFeature> groups;
    for (const auto& r : filtered) {
        GroupKey key;
        key.pod = r.k8_pod;
        if (auto m = model.match(r.message)) {
            key.template_id = m->template_id;
            key.template_string = m->template_string;
        } else {
            key.template_id = -1;
            const auto tokens = model.mask(r.message);
            std::string synthetic;
            for (std::size_t i = 0; i < tokens.size(); ++i) {
                if (i) synthetic += ' ';
                synthetic += tokens[i];
            }
            key.template_string = synthetic;
        }
        auto it = groups.find(key);
        if (it == groups.end()) {
            LogFaultFeature f;
            f.node_name = r.k8_node_name;
            f.service_name = pod_to_service(r.k8_pod);
            f.pod_name = r.k8_pod;
            f.template_id = key.template_id;
            f.template_string = key.template_string;
            f.first_seen_ns = r.timestamp_ns;
            f.representative_message = r.message;
            f.occurrence_count = 1;
            groups.emplace(std::move(key), std::move(f));
        } else {
            ++it->second.occurrence_count;
        }
    }

    std::vector<LogFaultFeature> features;
    features.reserve(groups.size());
    for (auto& [key, f] : groups) features.push_back(std::move(f));
    std::sort(features.begin(), features.end(), [](const LogFaultFeature& a, const LogFaultFeature& b) {
        if (a.occurrence_count != b.occurrence_count) return a.occurrence_count > b.occurrence_count;
        return std::tie(a.pod_name, a.template_id, a.template_string) <
               std::tie(b.pod_name, b.template_id, b.template_string);
    });
    return features;
}

std::string pod_to_service(const std::string& pod_name) {
    if (pod_name.rfind("redis", 0) == 0) return "redis-cart";
    const auto dash = pod_name.find_last_of('-');
    if (dash == std::string::npos || dash + 1 >= pod_name.size()) return pod_name;
    for (std::size_t i = dash + 1; i < pod_name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(pod_name[i]))) return pod_name;
    }
    return pod_name.substr(0, dash);
}

std::string render_log_report(const std::vector<LogFaultFeature>& features, std::size_t limit) {
    if (features.empty()) {
        return std::string(kNoLogFeaturesSentinel) + "\n";
    }
    std::ostringstream out;
    const std::size_t n = std::min(limit, features.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& f = features[i];
        out << "node_name: " << f.node_name << " | service_name: " << f.service_name
            << " | pod_name: " << f.pod_name << " | template: " << f.template_string
            << " | first_time: " << ns_to_beijing_display(f.first_seen_ns)
            << " | first_message: " << f.representative_message
            << " | Occurrence Count: " << f.occurrence_count << "\n";
    }
    return out.str();
}

}  // namespace rcafuse
