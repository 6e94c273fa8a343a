#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "syncsim/metrics.hpp"
#include "syncsim/nodes.hpp"
#include "syncsim/policy.hpp"
#include "syncsim/sim_config.hpp"
#include "syncsim/task.hpp"

namespace syncsim {

enum class ClusteringMode {
    Fixed,  // worker i of a group joins cluster i mod cluster_count
    Grid,   // grid partition of the group's bounding box
};

enum class MobilityMode { Static, RandomWaypoint };

struct MobilityConfig {
    MobilityMode mode = MobilityMode::Static;
    double speed_mps = 10.0;
    double box_m = 10000.0;
    double interval_s = 30.0;
};

struct LocalQueueConfig {
    int depth = 2;
    double mean_s = 10.0;
    double stddev_s = 2.0;
};

/// Everything one replication needs.
struct Scenario {
    SimConfig sim;
    SyncPolicy policy = TimeRedundant{};
    UpdateScheme update_scheme = UpdateScheme::AllWorker;
    std::vector<TaskGraph> graphs;  // run k executes graphs[k % graphs.size()]
    int runs = 200;
    int replication = 0;
    int fog_count = 0;  // 0: one controller at the root; otherwise fog controllers under a cloud root
    ClusteringMode clustering = ClusteringMode::Fixed;
    MobilityConfig mobility;
    LocalQueueConfig local_queue;
    std::uint64_t max_events = 4'000'000'000ULL;
    bool record_decisions = true;
    bool record_sync_trace = false;
    bool record_executions = false;
};

/// One quorum decision, as written to decisions.jsonl.
struct QuorumDecision {
    double t = 0.0;
    std::string sync_task;
    std::string policy;
    int attempt = 1;
    int available = 0;
    int total = 0;
    std::string result;
    int replication = 0;
    int run = 0;
    int group = 0;
};

/// Detail for one quorum attempt; only collected when requested.
struct SyncTrace {
    int run = 0;
    int group = 0;
    std::string task;
    int attempt = 1;
    double call_time = 0.0;
    double delta = 0.0;  // quorum check / slot / barrier completion time
    bool passed = false;
    double start = 0.0;
    std::int64_t scope = 0;  // workers the sync call went to
    std::int64_t reporters = 0;
    std::int64_t update_messages = 0;
    std::int64_t local_delayed = 0;  // workers pushed past delta by local tasks
    std::vector<WorkerId> workers;   // workers that ran the sync task
    std::vector<double> worker_starts;
};

struct MessageStats {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t in_flight = 0;  // still queued when the last run ended
};

/// One stretch of work on a worker.
struct Execution {
    WorkerId worker = 0;
    int run = 0;
    std::string task;
    double start = 0.0;
    double end = 0.0;
    double duration = 0.0;  // the drawn length, end - start up to rounding
};

struct ReplicationResult {
    std::vector<MetricsRecord> records;
    std::vector<QuorumDecision> decisions;
    std::vector<SyncTrace> syncs;
    std::vector<double> run_starts;
    std::vector<double> join_times;
    std::vector<Execution> executions;
    MessageStats messages;
    bool clock_monotone = true;
    bool topology_is_tree = true;
    std::uint64_t events = 0;
    double final_time = 0.0;
    std::size_t final_workers = 0;
};

/// Runs one replication to completion: `runs` task-graph runs, or until the
/// event queue drains. Throws LivelockGuard past `max_events`.
ReplicationResult run_until_idle(const Scenario& scenario);

/// Validates the scenario; throws ValidationError.
void validate(const Scenario& scenario);

}  // namespace syncsim
