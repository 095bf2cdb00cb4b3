#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rcafuse {

enum class MetricLevel { apm, infra_pod, infra_node, infra_tidb };

const char* to_string(MetricLevel level);
std::optional<MetricLevel> metric_level_from_string(const std::string& s);

// Closed per-level kpi_key sets. Points with keys outside their level's set
// are rejected at load. The node set ships twelve named keys and accepts up
// to four extra configured slots.
class MetricCatalog {
public:
    MetricCatalog();

    // Throws Error{InvalidConfig} when more than four extras are given.
    void add_node_kpis(const std::vector<std::string>& extra);

    bool contains(MetricLevel level, const std::string& kpi_key) const;
    const std::set<std::string>& keys(MetricLevel level) const;

private:
    std::set<std::string> apm_;
    std::set<std::string> infra_pod_;
    std::set<std::string> infra_node_;
    std::set<std::string> tidb_;
};

}  // namespace rcafuse
