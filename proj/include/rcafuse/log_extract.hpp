#pragma once

#include "rcafuse/drain.hpp"
#include "rcafuse/ingest.hpp"

#include <string>
#include <vector>

namespace rcafuse {

// One deduplicated (pod, template) error pattern inside a fault window.
struct LogFaultFeature {
    std::string node_name;
    std::string service_name;
    std::string pod_name;
    int template_id = -1;  // -1 marks a synthetic template (no model match)
    std::string template_string;
    NsTime first_seen_ns = 0;
    std::string representative_message;  // raw message of the earliest record
    std::int64_t occurrence_count = 0;
};

// Keeps records inside [start_ns, end_ns] whose message contains "error"
// case-insensitively; input order (ascending time) is preserved.
std::vector<LogRecord> filter_error_logs(const std::vector<LogRecord>& records, const FaultCase& c);

// Groups filtered records by (pod, template); unmatched messages keep their
// masked form as a synthetic template. Output sorted by occurrence_count
// descending, ties by (pod, template_id, template_string) ascending.
std::vector<LogFaultFeature> featurize(const std::vector<LogRecord>& filtered, const DrainModel& model);

// frontend-0 -> frontend; redis* pods -> redis-cart; no suffix -> unchanged.
std::string pod_to_service(const std::string& pod_name);

inline constexpr const char* kNoLogFeaturesSentinel = "NO LOG FAULT FEATURES IN WINDOW";

std::string render_log_report(const std::vector<LogFaultFeature>& features, std::size_t limit = 50);

}  // namespace rcafuse
