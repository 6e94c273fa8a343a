#include "syncsim/processes.hpp"

#include <algorithm>

#include "syncsim/errors.hpp"
#include "syncsim/sim_config.hpp"

namespace syncsim {

void validate(const SimConfig& c) {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(name, "must lie in [0, 1]");
    };
    prob(c.fail_probability, "fail_probability");
    prob(c.join_probability, "join_probability");
    if (!(c.controller_worker_delay >= 0.0))
        throw ValidationError("controller_worker_delay_s", "must be non-negative");
    if (!(c.status_update_cost >= 0.0)) throw ValidationError("status_update_cost_s", "must be non-negative");
    if (!(c.prediction_accuracy > 0.0 && c.prediction_accuracy <= 1.0))
        throw ValidationError("prediction_accuracy", "must lie in (0, 1]");
    if (c.worker_count < 1) throw ValidationError("worker_count", "must be positive");
    if (c.cluster_count < 1) throw ValidationError("cluster_count", "must be positive");
}

bool apply_failure_process(WorkerState& worker, double fail_probability, double u) {
    if (!worker.connected()) return false;
    if (u < fail_probability) {
        worker.liveness = Liveness::Failed;
        return true;
    }
    return false;
}

std::optional<WorkerState> apply_join_process(double join_probability, WorkerId fresh_id, double now, double u) {
    if (!(u < join_probability)) return std::nullopt;
    WorkerState w;
    w.worker_id = fresh_id;
    w.t_avail = now;
    w.liveness = Liveness::Connected;
    return w;
}

double predicted_finish(double true_finish, double prediction_accuracy, double u) {
    if (prediction_accuracy >= 1.0) return true_finish;
    u = std::clamp(u, 0.0, 1.0);
    const double spread = 1.0 - prediction_accuracy;
    return true_finish * (1.0 + (2.0 * u - 1.0) * spread);
}

}  // namespace syncsim
