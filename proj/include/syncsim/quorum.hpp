#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "syncsim/errors.hpp"
#include "syncsim/nodes.hpp"
#include "syncsim/policy.hpp"

namespace syncsim {

enum class FailureReason {
    RetriesExhausted,
    ClusterUnderfull,
    IncompleteResults,
    BarrierTimeout,
    SlotMissed,
};

std::string_view to_string(FailureReason reason) noexcept;

struct Passed {
    double start_time = 0.0;
};
struct Retry {
    double next_attempt = 0.0;
};
struct Failed {
    FailureReason reason = FailureReason::RetriesExhausted;
};

using QuorumResult = std::variant<Passed, Retry, Failed>;

struct Pending {};
struct Scheduled {
    double start_time = 0.0;
};
struct Aborted {
    FailureReason reason = FailureReason::RetriesExhausted;
};

struct SyncPointState {
    std::string sync_task;
    std::vector<WorkerId> committed;
    double delta = 0.0;
    int retries_used = 0;
    std::variant<Pending, Scheduled, Aborted> outcome;
};

class NoUpdates : public SimulationError {
public:
    NoUpdates() : SimulationError("quorum check time requested with no status updates") {}
};

class NoCluster : public SimulationError {
public:
    explicit NoCluster(WorkerId w)
        : SimulationError("worker " + std::to_string(w) + " has no cluster under publish-subscribe") {}
};

/// Opens a sync point: one sync-call per Connected worker. `targets` receives
/// the ids the calls go to.
SyncPointState sync_call(std::string sync_task, std::span<const WorkerState> workers,
                         std::vector<WorkerId>& targets);

/// Where a worker's status update goes: straight to the controller, or to the
/// broker of its cluster.
struct UpdateRoute {
    bool to_controller = true;
    ClusterId cluster = 0;
};

UpdateRoute push_status_update(const WorkerState& worker, UpdateScheme scheme);

/// Number of update messages the controller processes for these reporters:
/// one per worker, or one group-availability message per cluster.
std::size_t controller_update_messages(std::span<const WorkerState> reporters, UpdateScheme scheme);

/// max(predicted finish) + update cost + one controller-worker delay.
double compute_quorum_check_time(std::span<const double> predicted_finishes, double status_update_cost,
                                 double controller_worker_delay);

struct LocalScheduleResult {
    std::vector<TaskSpec> scheduled;
    double t_avail = 0.0;
};

/// Fills the gap before `delta` with queued local tasks that fit; tasks that do
/// not fit are skipped and scanning continues. Scheduled tasks leave the queue.
LocalScheduleResult local_schedule(double t_avail, std::vector<TaskSpec>& queue, double delta);
LocalScheduleResult local_schedule(WorkerState& worker, double delta);

/// Ratio test at the quorum timer. Increments `state.retries_used` on Retry.
QuorumResult ratio_quorum_check(SyncPointState& state, std::size_t available, std::size_t in_scope,
                                const TimeRedundant& policy, double controller_worker_delay);

/// Passes iff there is at least one cluster and every cluster has at least
/// `required` available members. No retries.
QuorumResult cluster_quorum_check(std::span<const int> available_per_cluster, int required, double delta,
                                  double controller_worker_delay);

/// Success iff every cluster returned at least one result.
std::optional<Failed> complete_component_sync(std::span<const int> results_per_cluster);

/// Arrival times at the barrier; nullopt marks a worker that never arrives.
QuorumResult barrier_sync(std::span<const std::optional<double>> arrivals, double controller_worker_delay);

struct SegmentStats {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Sum of means and variances of the worker tasks in a segment.
SegmentStats segment_stats(std::span<const TaskSpec* const> segment);

double slot_time(double segment_start, SegmentStats stats, double slot_multiplier);

/// Ratio test at a fixed slot; the slot never moves, so there is no retry arm.
QuorumResult time_slotted_sync(std::size_t available, std::size_t in_scope, const TimeSlotted& policy,
                               double slot);

}  // namespace syncsim
