#include "syncsim/quorum.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace syncsim {

std::string_view to_string(FailureReason reason) noexcept {
    switch (reason) {
        case FailureReason::RetriesExhausted: return "retries_exhausted";
        case FailureReason::ClusterUnderfull: return "cluster_underfull";
        case FailureReason::IncompleteResults: return "incomplete_results";
        case FailureReason::BarrierTimeout: return "barrier_timeout";
        case FailureReason::SlotMissed: return "slot_missed";
    }
    return "?";
}

SyncPointState sync_call(std::string sync_task, std::span<const WorkerState> workers,
                         std::vector<WorkerId>& targets) {
    targets.clear();
    for (const auto& w : workers)
        if (w.connected()) targets.push_back(w.worker_id);
    SyncPointState state;
    state.sync_task = std::move(sync_task);
    return state;
}

UpdateRoute push_status_update(const WorkerState& worker, UpdateScheme scheme) {
    if (scheme == UpdateScheme::AllWorker) return {};
    if (!worker.cluster_id) throw NoCluster(worker.worker_id);
    return UpdateRoute{false, *worker.cluster_id};
}

std::size_t controller_update_messages(std::span<const WorkerState> reporters, UpdateScheme scheme) {
    if (scheme == UpdateScheme::AllWorker) return reporters.size();
    std::set<ClusterId> clusters;
    for (const auto& w : reporters) clusters.insert(push_status_update(w, scheme).cluster);
    return clusters.size();
}

double compute_quorum_check_time(std::span<const double> predicted_finishes, double status_update_cost,
                                 double controller_worker_delay) {
    if (predicted_finishes.empty()) throw NoUpdates();
    return *std::max_element(predicted_finishes.begin(), predicted_finishes.end()) + status_update_cost +
           controller_worker_delay;
}

LocalScheduleResult local_schedule(double t_avail, std::vector<TaskSpec>& queue, double delta) {
    LocalScheduleResult out;
    std::vector<TaskSpec> skipped;
    for (auto& task : queue) {
        if (t_avail + task.base_duration <= delta) {
            t_avail += task.base_duration;
            out.scheduled.push_back(std::move(task));
        } else {
            skipped.push_back(std::move(task));
        }
    }
    queue = std::move(skipped);
    out.t_avail = t_avail;
    return out;
}

LocalScheduleResult local_schedule(WorkerState& worker, double delta) {
    auto res = local_schedule(worker.t_avail, worker.local_queue, delta);
    worker.t_avail = res.t_avail;
    return res;
}

QuorumResult ratio_quorum_check(SyncPointState& state, std::size_t available, std::size_t in_scope,
                                const TimeRedundant& policy, double controller_worker_delay) {
    // inclusive boundary; the epsilon absorbs rounding in ratios such as 21/30
    const double r = in_scope == 0 ? 0.0 : static_cast<double>(available) / static_cast<double>(in_scope);
    if (in_scope > 0 && r >= policy.sync_degree - 1e-12) return Passed{state.delta + controller_worker_delay};
    if (state.retries_used < policy.max_retries) {
        ++state.retries_used;
        return Retry{state.delta + policy.lambda_s};
    }
    return Failed{FailureReason::RetriesExhausted};
}

QuorumResult cluster_quorum_check(std::span<const int> available_per_cluster, int required, double delta,
                                  double controller_worker_delay) {
    if (available_per_cluster.empty()) return Failed{FailureReason::ClusterUnderfull};
    for (int n : available_per_cluster)
        if (n < required) return Failed{FailureReason::ClusterUnderfull};
    return Passed{delta + controller_worker_delay};
}

std::optional<Failed> complete_component_sync(std::span<const int> results_per_cluster) {
    for (int n : results_per_cluster)
        if (n < 1) return Failed{FailureReason::IncompleteResults};
    return std::nullopt;
}

QuorumResult barrier_sync(std::span<const std::optional<double>> arrivals, double controller_worker_delay) {
    if (arrivals.empty()) return Failed{FailureReason::BarrierTimeout};
    double last = 0.0;
    for (const auto& a : arrivals) {
        if (!a) return Failed{FailureReason::BarrierTimeout};
        last = std::max(last, *a);
    }
    return Passed{last + controller_worker_delay};
}

SegmentStats segment_stats(std::span<const TaskSpec* const> segment) {
    SegmentStats s;
    double var = 0.0;
    for (const TaskSpec* t : segment) {
        s.mean += t->base_duration;
        var += t->duration_stddev * t->duration_stddev;
    }
    s.stddev = std::sqrt(var);
    return s;
}

double slot_time(double segment_start, SegmentStats stats, double slot_multiplier) {
    return segment_start + stats.mean + slot_multiplier * stats.stddev;
}

QuorumResult time_slotted_sync(std::size_t available, std::size_t in_scope, const TimeSlotted& policy,
                               double slot) {
    const double r = in_scope == 0 ? 0.0 : static_cast<double>(available) / static_cast<double>(in_scope);
    if (in_scope > 0 && r >= policy.sync_degree - 1e-12) return Passed{slot};
    return Failed{FailureReason::SlotMissed};
}

}  // namespace syncsim
