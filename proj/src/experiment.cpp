#include "syncsim/experiment.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <json.hpp>
#include <thread>

namespace syncsim {

using nlohmann::json;

ConfigKey config_key(const ExperimentConfig& cfg) {
    ConfigKey k;
    k.policy = std::string(policy_type(cfg));
    k.update_scheme = std::string(to_string(cfg.update_scheme));
    k.workers = cfg.sim.worker_count;
    k.clusters = cfg.sim.cluster_count;
    k.min_cluster_size = cfg.min_cluster_size;
    k.sync_degree = cfg.sync_degree;
    k.lambda_s = cfg.lambda_s;
    k.retries = cfg.max_retries;
    k.accuracy = cfg.sim.prediction_accuracy;
    k.seed = cfg.seed;
    return k;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    validate(cfg);
    const auto graphs = build_graphs(cfg);
    const auto n = static_cast<std::size_t>(cfg.replications);
    std::vector<ReplicationResult> results(n);

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= n) return;
            {
                std::lock_guard lock(error_mu);
                if (error) return;
            }
            try {
                Scenario sc = make_scenario(cfg, graphs, static_cast<int>(r));
                sc.record_decisions = opts.record_decisions;
                sc.record_sync_trace = opts.record_sync_trace;
                results[r] = run_until_idle(sc);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    const auto jobs = static_cast<std::size_t>(std::max(1, opts.jobs));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < std::min(jobs, n); ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<MetricsRecord> records;
    for (const auto& r : results) records.insert(records.end(), r.records.begin(), r.records.end());
    ExperimentResult out;
    out.report = aggregate(records, config_key(cfg));
    out.replications = std::move(results);
    return out;
}

namespace {

const std::map<std::string, std::string, std::less<>>& aliases() {
    static const std::map<std::string, std::string, std::less<>> m = {
        {"workers", "worker_count"},
        {"clusters", "cluster_count"},
        {"accuracy", "prediction_accuracy"},
        {"delay", "controller_worker_delay_s"},
        {"controller_worker_delay", "controller_worker_delay_s"},
        {"status_update_cost", "status_update_cost_s"},
        {"retries", "max_retries"},
        {"lambda", "lambda_s"},
        {"runs", "runs_per_replication"},
    };
    return m;
}

}  // namespace

ExperimentConfig with_parameter(const ExperimentConfig& base, std::string_view param, std::string_view value) {
    json j = json::parse(config_to_json(base));
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = std::string(value);
    }

    std::string name(param);
    if (auto it = aliases().find(name); it != aliases().end()) name = it->second;
    if (name == "fog_count") {
        if (!parsed.is_number_integer()) throw ValidationError("fog_count", "expected an integer");
        const auto f = parsed.get<int>();
        if (f < 0) throw ValidationError("fog_count", "must be non-negative");
        j["controller_topology"] = f == 0 ? json("single") : json{{"type", "hierarchical"}, {"fog_count", f}};
        return config_from_json(j.dump());
    }

    json* slot = &j;
    std::string_view rest = name;
    for (;;) {
        const auto dot = rest.find('.');
        const std::string key(rest.substr(0, dot));
        if (!slot->is_object() || !slot->contains(key)) throw UnknownParameter(std::string(param));
        slot = &(*slot)[key];
        if (dot == std::string_view::npos) break;
        rest = rest.substr(dot + 1);
    }
    if (slot->is_object()) throw UnknownParameter(std::string(param));
    *slot = parsed;
    return config_from_json(j.dump());
}

SweepResult sweep(const ExperimentConfig& base, std::string_view param, std::span<const std::string> values,
                  const RunOptions& opts) {
    if (values.empty()) throw ValidationError("values", "sweep needs at least one value");
    SweepResult out;
    out.param = std::string(param);
    std::vector<ExperimentConfig> configs;
    // resolve every value before running anything so a typo fails fast
    for (const auto& v : values) configs.push_back(with_parameter(base, param, v));
    for (std::size_t i = 0; i < configs.size(); ++i) {
        out.values.push_back(values[i]);
        out.results.push_back(run_experiment(configs[i], opts));
    }
    return out;
}

std::string decisions_jsonl(std::span<const QuorumDecision> decisions, std::string_view sweep_value) {
    std::string out;
    for (const auto& d : decisions) {
        nlohmann::ordered_json j;
        j["t"] = d.t;
        j["sync_task"] = d.sync_task;
        j["policy"] = d.policy;
        j["attempt"] = d.attempt;
        j["available"] = d.available;
        j["total"] = d.total;
        j["result"] = d.result;
        j["replication"] = d.replication;
        j["run"] = d.run;
        j["group"] = d.group;
        if (!sweep_value.empty()) j["value"] = std::string(sweep_value);
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace syncsim
