#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncsim/errors.hpp"

namespace syncsim {

/// Measurements for one run of a task graph.
struct MetricsRecord {
    int replication = 0;
    int run_index = 0;
    double runtime_s = 0.0;
    std::int64_t sync_points = 0;  // sync tasks attempted
    std::int64_t extra_quorum_attempts = 0;
    std::int64_t failed_sync_quorum = 0;
    std::int64_t failed_sync_incomplete = 0;
    std::int64_t controller_update_messages = 0;
    std::int64_t sync_successes = 0;
    std::vector<double> sync_times;  // start times of successful syncs
};

enum class SyncOutcome { Success, QuorumFailure, IncompleteFailure };

class DuplicateRecord : public Error {
public:
    explicit DuplicateRecord(const std::string& task) : Error("sync outcome recorded twice for " + task) {}
};

class EmptyInput : public Error {
public:
    EmptyInput() : Error("aggregate needs at least one record") {}
};

/// Per-run collector. Each sync task resolves exactly once.
class MetricsCollector {
public:
    MetricsCollector(int replication, int run_index);

    void record_sync_outcome(std::string_view task_key, SyncOutcome outcome, double start_time,
                             std::int64_t extra_attempts);
    void add_update_messages(std::int64_t n) { record_.controller_update_messages += n; }
    void set_runtime(double runtime_s) { record_.runtime_s = runtime_s; }

    const MetricsRecord& record() const noexcept { return record_; }
    MetricsRecord take() { return std::move(record_); }

private:
    MetricsRecord record_;
    std::set<std::string, std::less<>> seen_;
};

/// Columns identifying one experiment configuration in the report.
struct ConfigKey {
    std::string policy;
    std::string update_scheme;
    int workers = 0;
    int clusters = 0;
    int min_cluster_size = 0;
    double sync_degree = 0.0;
    double lambda_s = 0.0;
    int retries = 0;
    double accuracy = 1.0;
    std::uint64_t seed = 0;
};

struct AggregateReport {
    ConfigKey key;
    double runtime_per_sync_mean = 0.0;    // total runtime / total sync points
    double runtime_per_sync_stddev = 0.0;  // across replications
    double pct_fail_quorum = 0.0;
    double pct_fail_incomplete = 0.0;
    double max_sr_per_10s = 0.0;  // mean over replications of the busiest 10 s window
    std::int64_t sync_points = 0;
    std::int64_t sync_successes = 0;
    std::int64_t extra_attempts = 0;
    std::int64_t ctrl_msgs = 0;
    double total_runtime_s = 0.0;
    int replications = 0;
};

/// Largest number of times falling in any window [k*step, k*step + window).
std::size_t max_syncs_per_window(std::span<const double> times, double window = 10.0, double step = 1.0);

AggregateReport aggregate(std::span<const MetricsRecord> records, const ConfigKey& key);

enum class ExportFormat { Csv, Jsonl };

std::string report_csv(std::span<const AggregateReport> reports);
std::string report_jsonl(std::span<const AggregateReport> reports);
void export_report(std::span<const AggregateReport> reports, ExportFormat format, const std::filesystem::path& path);

/// printf("%.6g") rounding used for every exported float.
std::string format_float6(double v);
double round6(double v);

}  // namespace syncsim
