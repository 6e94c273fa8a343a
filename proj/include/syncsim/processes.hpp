#pragma once

#include <optional>
#include <random>

#include "syncsim/nodes.hpp"

namespace syncsim {

/// Marks the worker Failed with probability `fail_probability` given a uniform
/// draw `u` in [0,1). Returns true when the worker failed.
bool apply_failure_process(WorkerState& worker, double fail_probability, double u);

template <class URBG>
bool apply_failure_process(WorkerState& worker, double fail_probability, URBG& rng) {
    return apply_failure_process(worker, fail_probability, std::generate_canonical<double, 53>(rng));
}

/// One join trial at a run boundary: a fresh Connected worker available at `now`.
std::optional<WorkerState> apply_join_process(double join_probability, WorkerId fresh_id, double now, double u);

/// Multiplicative noise: true_finish * (1 + e), e uniform in [-(1-a), 1-a].
double predicted_finish(double true_finish, double prediction_accuracy, double u);

template <class URBG>
double predicted_finish(double true_finish, double prediction_accuracy, URBG& rng) {
    return predicted_finish(true_finish, prediction_accuracy, std::generate_canonical<double, 53>(rng));
}

}  // namespace syncsim
