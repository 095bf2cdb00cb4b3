#include "rcafuse/metric_summary.hpp"

#include "rcafuse/errors.hpp"
#include "rcafuse/log_extract.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rcafuse {

using nlohmann::json;

namespace {

constexpr NsTime kTenMinutes = 10 * kNsPerMinute;
constexpr NsTime kSixtyMinutes = 60 * kNsPerMinute;

double percentile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) return sorted[0];
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

json stats_to_json(const Stats& s) {
    json j;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["min"] = s.min;
    j["p25"] = s.p25;
    j["p50"] = s.p50;
    j["p75"] = s.p75;
    j["p99"] = s.p99;
    j["max"] = s.max;
    return j;
}

json comparison_to_json(const MetricComparison& c) {
    json j;
    j["normal"] = stats_to_json(c.normal);
    j["fault"] = stats_to_json(c.fault);
    j["p50_ratio"] = c.p50_ratio;
    j["p99_ratio"] = c.p99_ratio;
    return j;
}

std::string replace_all(std::string text, const std::string& marker, const std::string& value) {
    for (auto pos = text.find(marker); pos != std::string::npos;
         pos = text.find(marker, pos + value.size())) {
        text.replace(pos, marker.size(), value);
    }
    return text;
}

}  // namespace

Stats compute_stats(std::vector<double> values) {
    Stats s;
    s.count = static_cast<std::int64_t>(values.size());
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.p25 = percentile_sorted(values, 0.25);
    s.p50 = percentile_sorted(values, 0.50);
    s.p75 = percentile_sorted(values, 0.75);
    s.p99 = percentile_sorted(values, 0.99);
    return s;
}

std::vector<std::pair<NsTime, NsTime>> normal_windows(const std::vector<FaultCase>& schedule,
                                                      const FaultCase& c) {
    // locate c and its neighbors in the start-ordered schedule
    const FaultCase* prev = nullptr;
    const FaultCase* next = nullptr;
    bool found = false;
    for (const auto& item : schedule) {
        if (item.uuid == c.uuid) {
            found = true;
            continue;
        }
        if (item.start_ns <= c.start_ns) {
            if (!prev || item.end_ns > prev->end_ns) prev = &item;
        } else {
            if (!next || item.start_ns < next->start_ns) next = &item;
        }
    }
    if (!found) {
        throw Error(ErrorCode::InvalidSpec, "case " + c.uuid + " is not in the schedule");
    }

    const NsTime a_lo = prev ? prev->end_ns + kTenMinutes : c.start_ns - kSixtyMinutes;
    const NsTime a_hi = c.start_ns - kTenMinutes;  // leading 10 minutes excluded
    const NsTime b_lo = c.end_ns + kTenMinutes;
    const NsTime b_hi = next ? next->start_ns : c.end_ns + kSixtyMinutes;

    std::vector<std::pair<NsTime, NsTime>> wins;
    if (a_lo < a_hi) wins.emplace_back(a_lo, a_hi);
    if (b_lo < b_hi) wins.emplace_back(b_lo, b_hi);
    if (wins.empty()) {
        throw Error(ErrorCode::NoNormalWindow, "both normal windows collapsed for " + c.uuid);
    }
    return wins;
}

std::vector<double> trim_extremes(std::vector<double> values) {
    if (values.size() < 10) return values;
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<bool> drop(values.size(), false);
    drop[order[0]] = drop[order[1]] = true;
    drop[order[order.size() - 1]] = drop[order[order.size() - 2]] = true;
    std::vector<double> kept;
    kept.reserve(values.size() - 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!drop[i]) kept.push_back(values[i]);
    }
    return kept;
}

double symmetric_ratio(double fault_stat, double normal_stat, double eps) {
    return std::abs(fault_stat - normal_stat) / ((fault_stat + normal_stat) / 2.0 + eps);
}

CompareOutcome compare_all(const std::vector<MetricPoint>& points, const FaultCase& c,
                           const std::vector<std::pair<NsTime, NsTime>>& normal_wins,
                           const CompareOptions& opt) {
    struct SeriesKey {
        MetricLevel level;
        std::string entity;
        std::string kpi_key;
        bool operator<(const SeriesKey& o) const {
            return std::tie(level, entity, kpi_key) < std::tie(o.level, o.entity, o.kpi_key);
        }
    };
    struct Series {
        std::vector<double> normal;
        std::vector<double> fault;
    };

    std::map<SeriesKey, Series> series;
    for (const auto& p : points) {
        auto& s = series[SeriesKey{p.level, p.entity, p.kpi_key}];
        if (p.time_ns >= c.start_ns && p.time_ns <= c.end_ns) {
            s.fault.push_back(p.value);
        } else {
            for (const auto& [lo, hi] : normal_wins) {
                if (p.time_ns >= lo && p.time_ns <= hi) {
                    s.normal.push_back(p.value);
                    break;
                }
            }
        }
    }

    CompareOutcome out;
    for (auto& [key, s] : series) {
        if (s.fault.empty()) {
            out.notes.push_back(std::string(to_string(key.level)) + "/" + key.entity + "/" + key.kpi_key +
                                ": no fault-window samples, skipped");
            continue;
        }
        if (s.normal.empty()) {
            out.notes.push_back(std::string(to_string(key.level)) + "/" + key.entity + "/" + key.kpi_key +
                                ": no normal-window samples, skipped");
            continue;
        }
        MetricComparison cmp;
        cmp.level = key.level;
        cmp.entity = key.entity;
        cmp.kpi_key = key.kpi_key;
        cmp.normal = compute_stats(trim_extremes(std::move(s.normal)));
        cmp.fault = compute_stats(s.fault);
        cmp.p50_ratio = symmetric_ratio(cmp.fault.p50, cmp.normal.p50, opt.eps);
        cmp.p99_ratio = symmetric_ratio(cmp.fault.p99, cmp.normal.p99, opt.eps);
        cmp.significant = std::max(cmp.p50_ratio, cmp.p99_ratio) >= opt.significance_threshold;
        out.comparisons.push_back(std::move(cmp));
    }
    return out;
}

std::vector<MetricComparison> filter_significant(const std::vector<MetricComparison>& comparisons) {
    std::vector<MetricComparison> kept;
    for (const auto& c : comparisons) {
        if (c.significant) kept.push_back(c);
    }
    return kept;
}

std::string build_stage1_payload(const std::vector<MetricComparison>& comparisons) {
    json services = json::object();
    for (const auto& c : comparisons) {
        if (c.level != MetricLevel::apm && c.level != MetricLevel::infra_tidb) continue;
        const std::string service = pod_to_service(c.entity);
        services[service][c.entity][c.kpi_key] = comparison_to_json(c);
    }
    json payload;
    payload["services"] = services;
    if (services.empty()) payload["note"] = kNoSignificantApmChanges;
    return payload.dump();
}

std::string build_stage2_payload(const std::vector<MetricComparison>& comparisons,
                                 const std::string& stage1_text,
                                 const std::map<std::string, std::string>& pod_to_node) {
    json nodes = json::object();
    std::size_t infra_count = 0;
    for (const auto& c : comparisons) {
        if (c.level == MetricLevel::infra_node) {
            nodes[c.entity]["kpis"][c.kpi_key] = comparison_to_json(c);
            ++infra_count;
        }
    }
    bool topology_missing_note = false;
    for (const auto& c : comparisons) {
        if (c.level != MetricLevel::infra_pod) continue;
        std::string node = "unassigned";
        if (auto it = pod_to_node.find(c.entity); it != pod_to_node.end()) {
            node = it->second;
        } else {
            topology_missing_note = true;
        }
        auto& pod_block = nodes[node]["pods"][c.entity];
        pod_block["node"] = node;  // kept per pod so each block stands alone
        pod_block["kpis"][c.kpi_key] = comparison_to_json(c);
        ++infra_count;
    }
    json payload;
    payload["stage1_summary"] = stage1_text;
    payload["nodes"] = nodes;
    if (infra_count == 0) payload["note"] = kNoSignificantInfraChanges;
    if (topology_missing_note) {
        payload["topology_note"] = "pod-to-node topology unavailable for some pods; flat listing used";
    }
    return payload.dump();
}

namespace {

bool payload_is_empty(int stage, const std::string& payload) {
    json j = json::parse(payload, nullptr, false);
    if (j.is_discarded()) return payload.empty();
    if (stage == 1) return !j.contains("services") || j["services"].empty();
    return !j.contains("nodes") || j["nodes"].empty();
}

}  // namespace

std::string summarize_stage(LlmGateway& gateway, int stage, const std::string& payload,
                            const std::string& template_text, const std::string& stage1_summary) {
    if (payload_is_empty(stage, payload)) {
        return stage == 1 ? kNoSignificantApmChanges : kNoSignificantInfraChanges;
    }
    std::string prompt = replace_all(template_text, "{PAYLOAD}", payload);
    prompt = replace_all(prompt, "{STAGE1_SUMMARY}", stage1_summary);
    LlmRequest request;
    request.prompt = prompt;
    request.tag = stage == 1 ? "stage1" : "stage2";
    try {
        return gateway.complete(request);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::LlmExhausted || e.code() == ErrorCode::PayloadTooLarge) {
            return std::string(kMetricSummaryUnavailable) + " (" + e.what() + ")";
        }
        throw;
    }
}

PhenomenonSummary run_two_stage_summary(LlmGateway& gateway, const std::string& stage1_template,
                                        const std::string& stage2_template,
                                        const std::vector<MetricComparison>& significant,
                                        const std::map<std::string, std::string>& pod_to_node) {
    PhenomenonSummary summary;
    const std::string stage1_payload = build_stage1_payload(significant);
    summary.stage1_text = summarize_stage(gateway, 1, stage1_payload, stage1_template);
    const std::string stage2_payload =
        build_stage2_payload(significant, summary.stage1_text, pod_to_node);
    summary.stage2_text =
        summarize_stage(gateway, 2, stage2_payload, stage2_template, summary.stage1_text);
    return summary;
}

std::string render_metric_report(const PhenomenonSummary& summary) {
    std::string out;
    out += "[stage 1: service/pod and database phenomena]\n";
    out += summary.stage1_text;
    out += "\n[stage 2: node and container phenomena]\n";
    out += summary.stage2_text;
    out += "\n";
    return out;
}

}  // namespace rcafuse
