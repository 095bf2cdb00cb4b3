#include "rcafuse/ingest.hpp"

#include "rcafuse/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace rcafuse {

using nlohmann::json;

namespace {

bool digits_at(const std::string& s, std::size_t pos, std::size_t count) {
    if (pos + count > s.size()) return false;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}

// Finds every substring matching \d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z in
// order of appearance.
std::vector<std::string> find_iso_timestamps(const std::string& text) {
    std::vector<std::string> out;
    if (text.size() < 20) return out;
    for (std::size_t i = 0; i + 20 <= text.size(); ++i) {
        if (digits_at(text, i, 4) && text[i + 4] == '-' && digits_at(text, i + 5, 2) &&
            text[i + 7] == '-' && digits_at(text, i + 8, 2) && text[i + 10] == 'T' &&
            digits_at(text, i + 11, 2) && text[i + 13] == ':' && digits_at(text, i + 14, 2) &&
            text[i + 16] == ':' && digits_at(text, i + 17, 2) && text[i + 19] == 'Z') {
            out.push_back(text.substr(i, 20));
            i += 19;
        }
    }
    return out;
}

void add_first_error(ReadReport* report, const std::string& msg) {
    if (report && report->first_errors.size() < 5) report->first_errors.push_back(msg);
}

}  // namespace

FaultCase make_fault_case(const std::string& uuid, const std::string& description) {
    if (uuid.empty()) {
        throw Error(ErrorCode::MissingUuid, "empty uuid");
    }
    const auto stamps = find_iso_timestamps(description);
    if (stamps.size() < 2) {
        throw Error(ErrorCode::FewerThanTwoTimestamps,
                    "found " + std::to_string(stamps.size()) + " timestamp(s) in description of " + uuid);
    }
    FaultCase c;
    c.uuid = uuid;
    c.description = description;
    c.start_ns = iso_to_ns(stamps[0]);
    c.end_ns = iso_to_ns(stamps[1]);
    if (c.start_ns >= c.end_ns) {
        throw Error(ErrorCode::StartNotBeforeEnd, stamps[0] + " !< " + stamps[1] + " in " + uuid);
    }
    c.hour_keys = hour_keys_between(c.start_ns, c.end_ns);
    return c;
}

FaultCase parse_input_case(const std::string& raw_text) {
    json j = json::parse(raw_text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::SchemaViolation, "input case is not a JSON object");
    }
    if (!j.contains("uuid") || !j["uuid"].is_string() || j["uuid"].get<std::string>().empty()) {
        throw Error(ErrorCode::MissingUuid, "input case has no uuid field");
    }
    std::string description;
    if (j.contains("Anomaly Description") && j["Anomaly Description"].is_string()) {
        description = j["Anomaly Description"].get<std::string>();
    }
    return make_fault_case(j["uuid"].get<std::string>(), description);
}

std::vector<FaultCase> load_input_file(const std::filesystem::path& input_json) {
    std::ifstream in(input_json);
    if (!in) {
        throw Error(ErrorCode::UnreadableFile, input_json.string());
    }
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        throw Error(ErrorCode::SchemaViolation, input_json.string() + " is not a JSON array");
    }
    std::vector<FaultCase> cases;
    cases.reserve(j.size());
    for (const auto& item : j) {
        cases.push_back(parse_input_case(item.dump()));
    }
    return cases;
}

std::vector<std::filesystem::path> locate_files(const std::filesystem::path& data_root,
                                                Modality modality, const FaultCase& c) {
    namespace fs = std::filesystem;
    std::vector<fs::path> found;
    if (!fs::exists(data_root)) {
        throw Error(ErrorCode::UnreadableFile, "data root " + data_root.string() + " does not exist");
    }

    if (modality == Modality::metric) {
        std::vector<std::string> dates;
        for (const auto& hk : c.hour_keys) {
            std::string date = hk.substr(0, 10);
            if (dates.empty() || dates.back() != date) dates.push_back(date);
        }
        for (const auto& date : dates) {
            const fs::path day_dir = data_root / date;
            if (!fs::exists(day_dir)) continue;
            for (const auto& entry : fs::recursive_directory_iterator(day_dir)) {
                if (entry.is_regular_file()) found.push_back(entry.path());
            }
        }
    } else {
        const std::string prefix = modality == Modality::log ? "log" : "trace";
        for (const auto& entry : fs::recursive_directory_iterator(data_root)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.rfind(prefix + "_", 0) != 0) continue;
            for (const auto& hk : c.hour_keys) {
                if (name.find(hk) != std::string::npos) {
                    found.push_back(entry.path());
                    break;
                }
            }
        }
    }
    std::sort(found.begin(), found.end(),
              [](const fs::path& a, const fs::path& b) { return a.string() < b.string(); });
    return found;
}

std::vector<LogRecord> read_log_file(const std::filesystem::path& path, ReadReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::UnreadableFile, path.string());
    }
    std::vector<LogRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("@timestamp") ||
            !j["@timestamp"].is_string() || !j.contains("message") || !j["message"].is_string()) {
            if (report) ++report->skipped;
            add_first_error(report, "bad log line in " + path.filename().string());
            continue;
        }
        LogRecord r;
        try {
            r.timestamp_ns = iso_to_ns(j["@timestamp"].get<std::string>());
        } catch (const Error&) {
            if (report) ++report->skipped;
            add_first_error(report, "bad @timestamp in " + path.filename().string());
            continue;
        }
        if (r.timestamp_ns <= 0) {
            if (report) ++report->skipped;
            continue;
        }
        r.k8_pod = j.value("k8_pod", "");
        r.k8_node_name = j.value("k8_node_name", "");
        r.message = j["message"].get<std::string>();
        records.push_back(std::move(r));
        if (report) ++report->parsed;
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const LogRecord& a, const LogRecord& b) { return a.timestamp_ns < b.timestamp_ns; });
    return records;
}

std::vector<TraceSpan> read_trace_file(const std::filesystem::path& path, ReadReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::UnreadableFile, path.string());
    }
    std::vector<TraceSpan> spans;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("traceID") || !j.contains("spanID") ||
            !j.contains("startTime") || !j.contains("duration") ||
            !j["startTime"].is_number_integer() || !j["duration"].is_number_integer()) {
            if (report) ++report->skipped;
            add_first_error(report, "bad trace line in " + path.filename().string());
            continue;
        }
        TraceSpan s;
        s.trace_id = j.value("traceID", "");
        s.span_id = j.value("spanID", "");
        if (j.contains("parentSpanID") && j["parentSpanID"].is_string()) {
            s.parent_span_id = j["parentSpanID"].get<std::string>();
        }
        const std::int64_t start_us = j["startTime"].get<std::int64_t>();
        const std::int64_t duration = j["duration"].get<std::int64_t>();
        if (duration < 0) {
            if (report) ++report->skipped;
            add_first_error(report, "negative duration in " + path.filename().string());
            continue;
        }
        try {
            s.start_ns = us_to_ns_checked(start_us);
        } catch (const Error&) {
            if (report) ++report->skipped;
            add_first_error(report, "bad startTime in " + path.filename().string());
            continue;
        }
        s.duration_us = duration;
        if (j.contains("process") && j["process"].is_object()) {
            const auto& p = j["process"];
            s.pod_name = p.value("pod_name", "");
            s.service_name = p.value("service_name", "");
            s.node_name = p.value("node_name", "");
        }
        s.operation_name = j.value("operationName", "");
        if (j.contains("tags") && j["tags"].is_object()) {
            const auto& t = j["tags"];
            if (t.contains("status.code") && t["status.code"].is_number_integer()) {
                s.status_code = t["status.code"].get<int>();
            }
            s.status_message = t.value("status.message", "");
        }
        spans.push_back(std::move(s));
        if (report) ++report->parsed;
    }
    std::stable_sort(spans.begin(), spans.end(),
                     [](const TraceSpan& a, const TraceSpan& b) { return a.start_ns < b.start_ns; });
    return spans;
}

std::vector<MetricPoint> read_metric_file(const std::filesystem::path& path, const MetricCatalog& catalog,
                                          ReadReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::UnreadableFile, path.string());
    }
    std::vector<MetricPoint> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("time") || !j["time"].is_string() ||
            !j.contains("kpi_key") || !j["kpi_key"].is_string() || !j.contains("value") ||
            !j["value"].is_number() || !j.contains("entity") || !j["entity"].is_string() ||
            !j.contains("level") || !j["level"].is_string()) {
            if (report) ++report->skipped;
            add_first_error(report, "bad metric line in " + path.filename().string());
            continue;
        }
        const auto level = metric_level_from_string(j["level"].get<std::string>());
        if (!level) {
            if (report) ++report->skipped;
            add_first_error(report, "unknown metric level in " + path.filename().string());
            continue;
        }
        MetricPoint p;
        p.level = *level;
        p.kpi_key = j["kpi_key"].get<std::string>();
        if (!catalog.contains(p.level, p.kpi_key)) {
            if (report) ++report->skipped;
            add_first_error(report, "kpi_key " + p.kpi_key + " not in " + std::string(to_string(p.level)) +
                                        " catalog");
            continue;
        }
        p.value = j["value"].get<double>();
        if (!std::isfinite(p.value)) {
            if (report) ++report->skipped;
            add_first_error(report, "non-finite value in " + path.filename().string());
            continue;
        }
        try {
            p.time_ns = iso_to_ns(j["time"].get<std::string>());
        } catch (const Error&) {
            if (report) ++report->skipped;
            add_first_error(report, "bad time in " + path.filename().string());
            continue;
        }
        p.entity = j["entity"].get<std::string>();
        points.push_back(std::move(p));
        if (report) ++report->parsed;
    }
    std::stable_sort(points.begin(), points.end(),
                     [](const MetricPoint& a, const MetricPoint& b) { return a.time_ns < b.time_ns; });
    return points;
}

}  // namespace rcafuse
