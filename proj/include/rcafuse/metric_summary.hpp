#pragma once

#include "rcafuse/ingest.hpp"
#include "rcafuse/llm_gateway.hpp"

#include <map>
#include <string>
#include <vector>

namespace rcafuse {

struct Stats {
    std::int64_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double p99 = 0.0;
    double max = 0.0;
};

// Percentiles use linear interpolation between closest ranks.
Stats compute_stats(std::vector<double> values);

struct MetricComparison {
    MetricLevel level = MetricLevel::apm;
    std::string entity;
    std::string kpi_key;
    Stats normal;
    Stats fault;
    double p50_ratio = 0.0;
    double p99_ratio = 0.0;
    bool significant = false;
};

// Up to two normal windows around the case: from 10 minutes after the
// previous fault's end to 10 minutes before this one, and from 10 minutes
// after this one's end to the next fault's start. Missing neighbors fall
// back to +-60 minutes. Throws Error{NoNormalWindow} when both collapse.
std::vector<std::pair<NsTime, NsTime>> normal_windows(const std::vector<FaultCase>& schedule,
                                                      const FaultCase& c);

// Drops the two largest and two smallest values when at least ten are
// present; ties resolve by input position.
std::vector<double> trim_extremes(std::vector<double> values);

// |f - n| / ((f + n) / 2 + eps)
double symmetric_ratio(double fault_stat, double normal_stat, double eps = 1e-9);

struct CompareOptions {
    double eps = 1e-9;
    double significance_threshold = 0.05;
};

struct CompareOutcome {
    std::vector<MetricComparison> comparisons;  // ordered by (level, entity, kpi)
    std::vector<std::string> notes;             // skipped series etc.
};

// Per (level, entity, kpi): normal-window values merged and extreme-trimmed,
// fault-window values as observed; ratios over p50/p99; significant when
// either ratio reaches the threshold. Series without samples on one side are
// skipped with a note.
CompareOutcome compare_all(const std::vector<MetricPoint>& points, const FaultCase& c,
                           const std::vector<std::pair<NsTime, NsTime>>& normal_wins,
                           const CompareOptions& opt = {});

std::vector<MetricComparison> filter_significant(const std::vector<MetricComparison>& comparisons);

// Stage 1 payload: APM + TiDB comparisons as service -> entity -> kpi.
std::string build_stage1_payload(const std::vector<MetricComparison>& comparisons);

// Stage 2 payload: node kpis first, then pods hosted on each node; pods with
// no topology entry land under "unassigned". Consumes only infra levels.
std::string build_stage2_payload(const std::vector<MetricComparison>& comparisons,
                                 const std::string& stage1_text,
                                 const std::map<std::string, std::string>& pod_to_node);

struct PhenomenonSummary {
    std::string stage1_text;
    std::string stage2_text;
};

inline constexpr const char* kMetricSummaryUnavailable = "METRIC SUMMARY UNAVAILABLE";
inline constexpr const char* kNoSignificantApmChanges =
    "NO SIGNIFICANT APM/TIDB METRIC CHANGES IN WINDOW";
inline constexpr const char* kNoSignificantInfraChanges =
    "NO SIGNIFICANT INFRASTRUCTURE METRIC CHANGES IN WINDOW";

// One summarization round; prompt built from the stage template by replacing
// {PAYLOAD} (and {STAGE1_SUMMARY} for stage 2). Empty payloads short-circuit
// to the stage sentinel without an LLM call; gateway exhaustion degrades to
// kMetricSummaryUnavailable.
std::string summarize_stage(LlmGateway& gateway, int stage, const std::string& payload,
                            const std::string& template_text, const std::string& stage1_summary = "");

// Runs both stages over the significant comparisons.
PhenomenonSummary run_two_stage_summary(LlmGateway& gateway, const std::string& stage1_template,
                                        const std::string& stage2_template,
                                        const std::vector<MetricComparison>& significant,
                                        const std::map<std::string, std::string>& pod_to_node);

std::string render_metric_report(const PhenomenonSummary& summary);

}  // namespace rcafuse
