#pragma once

#include <cstdint>

namespace syncsim {

struct SimConfig {
    double controller_worker_delay = 0.2;  // seconds, one-way message latency
    double status_update_cost = 1.0;       // seconds of controller time per update message
    double fail_probability = 0.1;        // per completed worker task
    double join_probability = 0.1;        // per run boundary
    std::uint64_t rng_seed = 1;
    int worker_count = 100;
    int cluster_count = 10;
    double prediction_accuracy = 1.0;
};

/// Throws ValidationError naming the offending field.
void validate(const SimConfig& config);

}  // namespace syncsim
