#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "syncsim/errors.hpp"
#include "syncsim/simulator.hpp"

namespace syncsim {

class UnknownKey : public ParseError {
public:
    explicit UnknownKey(std::string key) : ParseError("unknown config key '" + key + "'"), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// How the generated task graphs look.
struct GraphGenConfig {
    int count = 10;
    int tasks = 30;
    double sync_fraction = 0.2;
    double min_duration_s = 23.0;  // log-uniform base durations
    double max_duration_s = 269.0;
    double duration_cv = 0.1;  // stddev / base duration
    double extra_edge_probability = 0.1;
    std::optional<std::filesystem::path> duration_trace;  // draw base durations from a CSV instead
    std::vector<std::filesystem::path> files;             // explicit graphs; generation is skipped
};

struct ExperimentConfig {
    SyncPolicy policy = TimeRedundant{};
    UpdateScheme update_scheme = UpdateScheme::AllWorker;
    SimConfig sim;
    int runs_per_replication = 200;
    int replications = 100;
    std::uint64_t seed = 1;
    int fog_count = 0;  // 0 = single controller
    ClusteringMode clustering = ClusteringMode::Fixed;
    MobilityConfig mobility;
    LocalQueueConfig local_queue;
    GraphGenConfig graphs;
    std::uint64_t max_events = 4'000'000'000ULL;

    // policy knobs kept even when the active policy ignores them, so sweeps
    // can switch policy without losing settings
    double sync_degree = 0.7;
    double lambda_s = 20.0;
    int max_retries = 2;
    int min_cluster_size = 3;
    int required_per_cluster = 1;
    double slot_multiplier = 1.5;
    std::optional<double> barrier_timeout_s;
};

/// Rebuilds `policy` from the flat knobs for the named policy type.
void set_policy(ExperimentConfig& cfg, std::string_view type);
std::string_view policy_type(const ExperimentConfig& cfg);

ExperimentConfig config_from_json(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& cfg);

/// Throws ValidationError.
void validate(const ExperimentConfig& cfg);

/// Task graphs for the experiment; generated graphs depend on `cfg.seed` only.
std::vector<TaskGraph> build_graphs(const ExperimentConfig& cfg);

/// Generates `count` random DAGs: a chain backbone plus random forward edges,
/// sync tasks spread over the order, and no sync task first.
std::vector<TaskGraph> generate_graphs(const GraphGenConfig& gen, std::uint64_t seed,
                                       const std::vector<double>* duration_pool = nullptr);

/// Scenario for replication r (seed + r).
Scenario make_scenario(const ExperimentConfig& cfg, const std::vector<TaskGraph>& graphs, int replication);

}  // namespace syncsim
