#include "rcafuse/metric_catalog.hpp"

#include "rcafuse/errors.hpp"

namespace rcafuse {

const char* to_string(MetricLevel level) {
    switch (level) {
        case MetricLevel::apm: return "apm";
        case MetricLevel::infra_pod: return "infra_pod";
        case MetricLevel::infra_node: return "infra_node";
        case MetricLevel::infra_tidb: return "infra_tidb";
    }
    return "unknown";
}

std::optional<MetricLevel> metric_level_from_string(const std::string& s) {
    if (s == "apm") return MetricLevel::apm;
    if (s == "infra_pod") return MetricLevel::infra_pod;
    if (s == "infra_node") return MetricLevel::infra_node;
    if (s == "infra_tidb") return MetricLevel::infra_tidb;
    return std::nullopt;
}

MetricCatalog::MetricCatalog() {
    apm_ = {
        "client_error_ratio", "error_ratio", "request", "response",
        "rrt", "server_error_ratio", "timeout",
    };
    infra_pod_ = {
        "pod_cpu_usage",
        "pod_memory_working_set_bytes",
        "pod_fs_reads_bytes",
        "pod_fs_writes_bytes",
        "pod_network_receive_bytes",
        "pod_network_receive_packets",
        "pod_network_transmit_bytes",
        "pod_network_transmit_packets",
        "pod_processes",
    };
    infra_node_ = {
        "node_cpu_usage_rate",
        "node_memory_usage_rate",
        "node_disk_read_bytes_total",
        "node_disk_written_bytes_total",
        "node_disk_read_time_seconds_total",
        "node_disk_write_time_seconds_total",
        "node_filesystem_usage_rate",
        "node_network_receive_bytes_total",
        "node_network_transmit_bytes_total",
        "node_network_receive_packets_total",
        "node_network_transmit_packets_total",
        "node_sockstat_TCP_inuse",
    };
    tidb_ = {
        "failed_query_ops",
        "duration_99th",
        "connection_count",
        "server_is_up",
        "cpu_usage",
        "memory_usage",
        "store_up_count",
        "store_down_count",
        "store_unhealth_count",
        "storage_used_ratio",
        "available_size",
        "raft_propose_wait",
        "raft_apply_wait",
        "rocksdb_write_stall",
    };
}

void MetricCatalog::add_node_kpis(const std::vector<std::string>& extra) {
    if (extra.size() > 4) {
        throw Error(ErrorCode::InvalidConfig,
                    "at most 4 extra node kpi slots, got " + std::to_string(extra.size()));
    }
    for (const auto& k : extra) infra_node_.insert(k);
}

bool MetricCatalog::contains(MetricLevel level, const std::string& kpi_key) const {
    return keys(level).count(kpi_key) > 0;
}

const std::set<std::string>& MetricCatalog::keys(MetricLevel level) const {
    switch (level) {
        case MetricLevel::apm: return apm_;
        case MetricLevel::infra_pod: return infra_pod_;
        case MetricLevel::infra_node: return infra_node_;
        case MetricLevel::infra_tidb: return tidb_;
    }
    return apm_;
}

}  // namespace rcafuse
