#pragma once

#include "rcafuse/metric_catalog.hpp"
#include "rcafuse/timeutil.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rcafuse {

// One fault window taken from input.json.
struct FaultCase {
    std::string uuid;
    std::string description;
    NsTime start_ns = 0;
    NsTime end_ns = 0;
    std::vector<std::string> hour_keys;  // "YYYY-MM-DD_HH", ascending
};

struct LogRecord {
    NsTime timestamp_ns = 0;
    std::string k8_pod;
    std::string k8_node_name;
    std::string message;
};

struct TraceSpan {
    std::string trace_id;
    std::string span_id;
    std::optional<std::string> parent_span_id;  // absent on roots
    NsTime start_ns = 0;                        // source microseconds x1000, exact
    std::int64_t duration_us = 0;
    std::string pod_name;
    std::string service_name;
    std::string node_name;
    std::string operation_name;
    int status_code = 0;
    std::string status_message;
};

struct MetricPoint {
    NsTime time_ns = 0;
    MetricLevel level = MetricLevel::apm;
    std::string entity;  // pod, node, or tidb component name
    std::string kpi_key;
    double value = 0.0;
};

enum class Modality { log, trace, metric };

// Parses one input.json element (the raw JSON object text). The first two
// Z-suffixed second-precision timestamps found in the anomaly description
// become the fault start and end.
FaultCase parse_input_case(const std::string& raw_text);
FaultCase make_fault_case(const std::string& uuid, const std::string& description);

// Loads the full input.json array, preserving input order.
std::vector<FaultCase> load_input_file(const std::filesystem::path& input_json);

// Log/trace files are matched by hour key embedded in the file name; metric
// files by recursive descent under the case's date directories. Results come
// back in lexicographic path order. An empty result means no files were
// found and the modality degrades to empty downstream.
std::vector<std::filesystem::path> locate_files(const std::filesystem::path& data_root,
                                                Modality modality, const FaultCase& c);

// Per-file read outcome; malformed lines never abort a batch.
struct ReadReport {
    std::size_t parsed = 0;
    std::size_t skipped = 0;
    std::vector<std::string> first_errors;  // up to a handful, for diagnostics
};

std::vector<LogRecord> read_log_file(const std::filesystem::path& path, ReadReport* report = nullptr);
std::vector<TraceSpan> read_trace_file(const std::filesystem::path& path, ReadReport* report = nullptr);
std::vector<MetricPoint> read_metric_file(const std::filesystem::path& path, const MetricCatalog& catalog,
                                          ReadReport* report = nullptr);

}  // namespace rcafuse
