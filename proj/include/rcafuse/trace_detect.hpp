#pragma once

#include "rcafuse/iforest.hpp"
#include "rcafuse/ingest.hpp"

#include <map>
#include <string>
#include <vector>

namespace rcafuse {

// One call-edge pattern: parent pod -> child pod, operation.
struct InvocationKey {
    std::string parent_pod;
    std::string child_pod;
    std::string operation_name;

    auto operator<=>(const InvocationKey&) const = default;
};

// A resolved parent-child invocation; duration and metadata come from the
// child span.
struct Invocation {
    InvocationKey key;
    NsTime start_ns = 0;
    std::int64_t duration_us = 0;
    std::string node_name;
    std::string service_name;
};

struct InvocationBuildStats {
    std::size_t emitted = 0;
    std::size_t roots_skipped = 0;
    std::size_t dangling_skipped = 0;
};

// Resolves parents within each trace_id; root spans and spans whose parent
// is absent from the batch are skipped and counted.
std::vector<Invocation> build_invocations(const std::vector<TraceSpan>& spans,
                                          InvocationBuildStats* stats = nullptr);

// key -> ordered (window_start_ns, average duration) features over fixed
// 30-second buckets aligned to floor(start_ns / window). Buckets where a key
// never appears produce no feature.
using WindowFeatures = std::map<InvocationKey, std::vector<std::pair<NsTime, double>>>;
WindowFeatures window_features(const std::vector<Invocation>& invocations, std::int64_t window_s = 30);

struct KeyMeta {
    std::string node_name;
    std::string service_name;
};

// Majority (node, service) of the child spans per key; earliest occurrence
// wins further ties.
std::map<InvocationKey, KeyMeta> collect_key_metadata(const std::vector<Invocation>& invocations);

struct DurationAnomaly {
    std::string node_name;
    std::string service_name;
    std::string parent_pod;
    std::string child_pod;
    std::string operation_name;
    double normal_avg_duration_us = 0.0;
    double anomaly_avg_duration_us = 0.0;
    std::int64_t anomaly_count = 0;
};

struct StatusAnomaly {
    std::string node_name;
    std::string service_name;
    std::string parent_pod;
    std::string child_pod;
    std::string operation_name;
    int status_code = 0;
    std::string status_message;
    std::int64_t occurrence_count = 0;
};

// One trained forest per invocation key plus that key's normal-period mean.
class DetectorSet {
public:
    struct Entry {
        ForestModel model;
        double normal_avg_duration_us = 0.0;
        KeyMeta meta;
    };

    // Keys with fewer than min_windows averages are omitted (reported via
    // under_sampled). Training data comes from post-fault normal windows.
    static DetectorSet train(const WindowFeatures& normal_windows,
                             const std::map<InvocationKey, KeyMeta>& key_meta, const ForestParams& params,
                             std::size_t min_windows = 8,
                             std::vector<InvocationKey>* under_sampled = nullptr);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    const std::map<InvocationKey, Entry>& entries() const { return entries_; }

    void save(const std::filesystem::path& path) const;
    static DetectorSet load(const std::filesystem::path& path);

private:
    std::map<InvocationKey, Entry> entries_;
};

// Per detected key: count of fault windows labeled anomalous, mean duration
// over those windows. Keys never seen in training are ignored. Sorted by
// count descending, then key ascending; capped at top_k.
std::vector<DurationAnomaly> detect_duration(const WindowFeatures& fault_windows,
                                             const DetectorSet& detectors, std::size_t top_k = 20);

// Groups status_code != 0 spans by (key, code, message); no training needed.
// Spans without a resolvable parent keep "(root)" as parent_pod so counts
// are conserved.
std::vector<StatusAnomaly> detect_status(const std::vector<TraceSpan>& spans, std::size_t top_k = 20);

inline constexpr const char* kNoDurationAnomaliesSentinel = "NO DURATION ANOMALIES IN WINDOW";
inline constexpr const char* kNoStatusAnomaliesSentinel = "NO STATUS ANOMALIES IN WINDOW";

std::string render_trace_report(const std::vector<DurationAnomaly>& duration_list,
                                const std::vector<StatusAnomaly>& status_list);

}  // namespace rcafuse
