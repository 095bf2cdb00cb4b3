#include "rcafuse/trace_detect.hpp"

#include "rcafuse/errors.hpp"
#include "rcafuse/log_extract.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace rcafuse {

using nlohmann::json;

namespace {

constexpr const char* kDetectorMagic = "rcafuse-trace-detectors";
constexpr int kDetectorVersion = 1;

std::string format_us(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2fus", v);
    return buf;
}

}  // namespace

std::vector<Invocation> build_invocations(const std::vector<TraceSpan>& spans,
                                          InvocationBuildStats* stats) {
    // span lookup is per trace: trace_id -> span_id -> index
    std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> by_trace;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        by_trace[spans[i].trace_id].emplace(spans[i].span_id, i);
    }

    std::vector<Invocation> out;
    for (const auto& span : spans) {
        if (!span.parent_span_id) {
            if (stats) ++stats->roots_skipped;
            continue;
        }
        const auto trace_it = by_trace.find(span.trace_id);
        const auto parent_it = trace_it->second.find(*span.parent_span_id);
        if (parent_it == trace_it->second.end()) {
            if (stats) ++stats->dangling_skipped;
            continue;
        }
        const TraceSpan& parent = spans[parent_it->second];
        Invocation inv;
        inv.key = InvocationKey{parent.pod_name, span.pod_name, span.operation_name};
        inv.start_ns = span.start_ns;
        inv.duration_us = span.duration_us;
        inv.node_name = span.node_name;
        inv.service_name = span.service_name;
        out.push_back(std::move(inv));
        if (stats) ++stats->emitted;
    }
    return out;
}

WindowFeatures window_features(const std::vector<Invocation>& invocations, std::int64_t window_s) {
    const NsTime window_ns = window_s * kNsPerSecond;
    // (key, bucket) -> running sum/count
    std::map<InvocationKey, std::map<NsTime, std::pair<double, std::int64_t>>> acc;
    for (const auto& inv : invocations) {
        NsTime bucket = inv.start_ns / window_ns;
        if (inv.start_ns < 0 && inv.start_ns % window_ns != 0) --bucket;  // floor
        auto& slot = acc[inv.key][bucket * window_ns];
        slot.first += static_cast<double>(inv.duration_us);
        slot.second += 1;
    }
    WindowFeatures features;
    for (const auto& [key, buckets] : acc) {
        auto& list = features[key];
        list.reserve(buckets.size());
        for (const auto& [start, sum_count] : buckets) {
            list.emplace_back(start, sum_count.first / static_cast<double>(sum_count.second));
        }
    }
    return features;
}

std::map<InvocationKey, KeyMeta> collect_key_metadata(const std::vector<Invocation>& invocations) {
    struct Tally {
        std::int64_t count = 0;
        NsTime first_seen = 0;
    };
    std::map<InvocationKey, std::map<std::pair<std::string, std::string>, Tally>> tallies;
    for (const auto& inv : invocations) {
        auto& tally = tallies[inv.key][{inv.node_name, inv.service_name}];
        if (tally.count == 0) tally.first_seen = inv.start_ns;
        ++tally.count;
        tally.first_seen = std::min(tally.first_seen, inv.start_ns);
    }
    std::map<InvocationKey, KeyMeta> out;
    for (const auto& [key, candidates] : tallies) {
        const std::pair<std::string, std::string>* best = nullptr;
        Tally best_tally;
        for (const auto& [pair, tally] : candidates) {
            const bool better = !best || tally.count > best_tally.count ||
                                (tally.count == best_tally.count &&
                                 tally.first_seen < best_tally.first_seen);
            if (better) {
                best = &pair;
                best_tally = tally;
            }
        }
        out[key] = KeyMeta{best->first, best->second};
    }
    return out;
}

DetectorSet DetectorSet::train(const WindowFeatures& normal_windows,
                               const std::map<InvocationKey, KeyMeta>& key_meta,
                               const ForestParams& params, std::size_t min_windows,
                               std::vector<InvocationKey>* under_sampled) {
    DetectorSet set;
    for (const auto& [key, features] : normal_windows) {
        if (features.size() < min_windows) {
            if (under_sampled) under_sampled->push_back(key);
            continue;
        }
        std::vector<std::vector<double>> samples;
        samples.reserve(features.size());
        double sum = 0.0;
        for (const auto& [start, avg] : features) {
            samples.push_back({avg});
            sum += avg;
        }
        Entry entry;
        entry.model = ForestModel::fit(samples, params);
        entry.normal_avg_duration_us = sum / static_cast<double>(features.size());
        if (auto it = key_meta.find(key); it != key_meta.end()) entry.meta = it->second;
        set.entries_.emplace(key, std::move(entry));
    }
    return set;
}

std::vector<DurationAnomaly> detect_duration(const WindowFeatures& fault_windows,
                                             const DetectorSet& detectors, std::size_t top_k) {
    std::vector<DurationAnomaly> anomalies;
    for (const auto& [key, entry] : detectors.entries()) {
        const auto it = fault_windows.find(key);
        if (it == fault_windows.end()) continue;
        std::int64_t count = 0;
        double sum = 0.0;
        for (const auto& [start, avg] : it->second) {
            if (entry.model.predict(avg) == -1) {
                ++count;
                sum += avg;
            }
        }
        if (count == 0) continue;
        DurationAnomaly a;
        a.node_name = entry.meta.node_name;
        a.service_name = entry.meta.service_name;
        a.parent_pod = key.parent_pod;
        a.child_pod = key.child_pod;
        a.operation_name = key.operation_name;
        a.normal_avg_duration_us = entry.normal_avg_duration_us;
        a.anomaly_avg_duration_us = sum / static_cast<double>(count);
        a.anomaly_count = count;
        anomalies.push_back(std::move(a));
    }
    std::sort(anomalies.begin(), anomalies.end(), [](const DurationAnomaly& a, const DurationAnomaly& b) {
        if (a.anomaly_count != b.anomaly_count) return a.anomaly_count > b.anomaly_count;
        return std::tie(a.parent_pod, a.child_pod, a.operation_name) <
               std::tie(b.parent_pod, b.child_pod, b.operation_name);
    });
    if (anomalies.size() > top_k) anomalies.resize(top_k);
    return anomalies;
}

std::vector<StatusAnomaly> detect_status(const std::vector<TraceSpan>& spans, std::size_t top_k) {
    std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> by_trace;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        by_trace[spans[i].trace_id].emplace(spans[i].span_id, i);
    }

    struct GroupKey {
        InvocationKey key;
        int status_code;
        std::string status_message;
        bool operator<(const GroupKey& o) const {
            return std::tie(key, status_code, status_message) <
                   std::tie(o.key, o.status_code, o.status_message);
        }
    };
    struct Group {
        StatusAnomaly anomaly;
        NsTime first_seen = 0;
    };

    std::map<GroupKey, Group> groups;
    for (const auto& span : spans) {
        if (span.status_code == 0) continue;
        std::string parent_pod = "(root)";
        if (span.parent_span_id) {
            const auto& trace_spans = by_trace[span.trace_id];
            if (auto p = trace_spans.find(*span.parent_span_id); p != trace_spans.end()) {
                parent_pod = spans[p->second].pod_name;
            }
        }
        GroupKey gk{InvocationKey{parent_pod, span.pod_name, span.operation_name}, span.status_code,
                    span.status_message};
        auto it = groups.find(gk);
        if (it == groups.end()) {
            Group g;
            g.anomaly.node_name = span.node_name;
            g.anomaly.service_name = pod_to_service(span.pod_name);
            g.anomaly.parent_pod = gk.key.parent_pod;
            g.anomaly.child_pod = gk.key.child_pod;
            g.anomaly.operation_name = gk.key.operation_name;
            g.anomaly.status_code = span.status_code;
            g.anomaly.status_message = span.status_message;
            g.anomaly.occurrence_count = 1;
            g.first_seen = span.start_ns;
            groups.emplace(std::move(gk), std::move(g));
        } else {
            ++it->second.anomaly.occurrence_count;
        }
    }

    std::vector<StatusAnomaly> anomalies;
    anomalies.reserve(groups.size());
    for (auto& [gk, g] : groups) anomalies.push_back(std::move(g.anomaly));
    std::sort(anomalies.begin(), anomalies.end(), [](const StatusAnomaly& a, const StatusAnomaly& b) {
        if (a.occurrence_count != b.occurrence_count) return a.occurrence_count > b.occurrence_count;
        if (auto c = std::tie(a.parent_pod, a.child_pod, a.operation_name) <=>
                     std::tie(b.parent_pod, b.child_pod, b.operation_name);
            c != 0) {
            return c < 0;
        }
        return std::tie(a.status_code, a.status_message) < std::tie(b.status_code, b.status_message);
    });
    if (anomalies.size() > top_k) anomalies.resize(top_k);
    return anomalies;
}

std::string render_trace_report(const std::vector<DurationAnomaly>& duration_list,
                                const std::vector<StatusAnomaly>& status_list) {
    std::ostringstream out;
    out << "[duration anomalies]\n";
    if (duration_list.empty()) {
        out << kNoDurationAnomaliesSentinel << "\n";
    } else {
        for (const auto& a : duration_list) {
            out << "node_name: " << a.node_name << " | service_name: " << a.service_name
                << " | parent_pod: " << a.parent_pod << " | child_pod: " << a.child_pod
                << " | operation_name: " << a.operation_name
                << " | normal_avg_duration: " << format_us(a.normal_avg_duration_us)
                << " | anomaly_avg_duration: " << format_us(a.anomaly_avg_duration_us)
                << " | Number of occurrences: " << a.anomaly_count << "\n";
        }
    }
    out << "[status anomalies]\n";
    if (status_list.empty()) {
        out << kNoStatusAnomaliesSentinel << "\n";
    } else {
        for (const auto& a : status_list) {
            out << "node_name: " << a.node_name << " | service_name: " << a.service_name
                << " | parent_pod: " << a.parent_pod << " | child_pod: " << a.child_pod
                << " | operation_name: " << a.operation_name << " | status_code: " << a.status_code
                << " | status_message: " << a.status_message
                << " | Number of occurrences: " << a.occurrence_count << "\n";
        }
    }
    return out.str();
}

void DetectorSet::save(const std::filesystem::path& path) const {
    json j;
    j["magic"] = kDetectorMagic;
    j["version"] = kDetectorVersion;
    json detectors = json::array();
    for (const auto& [key, entry] : entries_) {
        json d;
        d["parent_pod"] = key.parent_pod;
        d["child_pod"] = key.child_pod;
        d["operation_name"] = key.operation_name;
        d["node_name"] = entry.meta.node_name;
        d["service_name"] = entry.meta.service_name;
        d["normal_avg_duration_us"] = entry.normal_avg_duration_us;
        d["model"] = entry.model.to_json();
        detectors.push_back(std::move(d));
    }
    j["detectors"] = std::move(detectors);

    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out << j.dump() << "\n";
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

DetectorSet DetectorSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::UnreadableFile, path.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("magic", "") != kDetectorMagic) {
        throw Error(ErrorCode::CorruptModelFile, path.string() + " has no detector-set header");
    }
    if (j.value("version", -1) != kDetectorVersion) {
        throw Error(ErrorCode::CorruptModelFile, path.string() + " has unsupported version");
    }
    DetectorSet set;
    try {
        for (const auto& d : j.at("detectors")) {
            InvocationKey key{d.at("parent_pod").get<std::string>(), d.at("child_pod").get<std::string>(),
                              d.at("operation_name").get<std::string>()};
            Entry entry;
            entry.meta.node_name = d.at("node_name").get<std::string>();
            entry.meta.service_name = d.at("service_name").get<std::string>();
            entry.normal_avg_duration_us = d.at("normal_avg_duration_us").get<double>();
            entry.model = ForestModel::from_json(d.at("model"));
            set.entries_.emplace(std::move(key), std::move(entry));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptModelFile, path.string() + ": " + e.what());
    }
    return set;
}

}  // namespace rcafuse
