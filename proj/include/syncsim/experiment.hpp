#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncsim/config.hpp"
#include "syncsim/metrics.hpp"
#include "syncsim/simulator.hpp"

namespace syncsim {

class UnknownParameter : public Error {
public:
    explicit UnknownParameter(const std::string& name) : Error("unknown sweep parameter '" + name + "'") {}
};

struct RunOptions {
    int jobs = 1;  // concurrent replications; output does not depend on it
    bool record_decisions = true;
    bool record_sync_trace = false;
};

struct ExperimentResult {
    AggregateReport report;
    std::vector<ReplicationResult> replications;  // in replication order
};

ConfigKey config_key(const ExperimentConfig& cfg);

/// Replication r runs with seed + r. Replications may run on `jobs` threads;
/// results are merged in replication order.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Copy of `base` with one parameter replaced. Names are config keys
/// (nested ones dotted, e.g. "mobility.speed_mps") or the short aliases
/// workers, clusters, accuracy, delay, retries, lambda, fog_count.
ExperimentConfig with_parameter(const ExperimentConfig& base, std::string_view param, std::string_view value);

struct SweepResult {
    std::string param;
    std::vector<std::string> values;
    std::vector<ExperimentResult> results;  // parallel to values
};

SweepResult sweep(const ExperimentConfig& base, std::string_view param, std::span<const std::string> values,
                  const RunOptions& opts = {});

/// One JSON object per line with keys t, sync_task, policy, attempt, available,
/// total, result, then replication, run, group (and `value` when non-empty).
std::string decisions_jsonl(std::span<const QuorumDecision> decisions, std::string_view sweep_value = {});

}  // namespace syncsim
