#include "syncsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "syncsim/random.hpp"
#include "syncsim/trace.hpp"

namespace syncsim {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view prefix) {
    for (const auto& [k, v] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw UnknownKey(prefix.empty() ? k : std::string(prefix) + "." + k);
    }
}

template <class T>
void read(const json& obj, const char* key, T& out, std::string_view prefix = {}) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return;
    const std::string name = prefix.empty() ? std::string(key) : std::string(prefix) + "." + key;
    try {
        if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
            if (!it->is_number_integer()) throw ValidationError(name, "expected an integer");
        } else if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) throw ValidationError(name, "expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ValidationError(name, "expected a string");
        }
        if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (it->is_number_unsigned() || it->template get<std::int64_t>() >= 0) {
                out = it->template get<std::uint64_t>();
                return;
            }
            throw ValidationError(name, "must be non-negative");
        } else {
            out = it->template get<T>();
        }
    } catch (const json::exception& e) {
        throw ValidationError(name, e.what());
    }
}

const json& object_or_empty(const json& obj, const char* key) {
    static const json empty = json::object();
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return empty;
    if (!it->is_object()) throw ValidationError(key, "expected an object");
    return *it;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

}  // namespace

void set_policy(ExperimentConfig& cfg, std::string_view type) {
    if (type == "time_redundant")
        cfg.policy = TimeRedundant{cfg.sync_degree, cfg.lambda_s, cfg.max_retries};
    else if (type == "component_redundant")
        cfg.policy = ComponentRedundant{cfg.min_cluster_size, cfg.required_per_cluster};
    else if (type == "barrier")
        cfg.policy = Barrier{cfg.barrier_timeout_s};
    else if (type == "time_slotted")
        cfg.policy = TimeSlotted{cfg.slot_multiplier, cfg.sync_degree};
    else
        throw ValidationError("policy", "unknown policy '" + std::string(type) + "'");
}

std::string_view policy_type(const ExperimentConfig& cfg) { return policy_name(cfg.policy); }

ExperimentConfig config_from_json(std::string_view text, const std::filesystem::path& base_dir) {
    json root;
    const bool blank = std::all_of(text.begin(), text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (!blank) {
        try {
            root = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("config is not valid JSON: ") + e.what());
        }
    } else {
        root = json::object();
    }
    if (!root.is_object()) throw ParseError("config must be a JSON object");
    reject_unknown(root,
                   {"seed", "replications", "runs_per_replication", "worker_count", "cluster_count",
                    "controller_topology", "controller_worker_delay_s", "status_update_cost_s", "fail_probability",
                    "join_probability", "prediction_accuracy", "policy", "update_scheme", "sync_degree", "lambda_s",
                    "max_retries", "min_cluster_size", "required_per_cluster", "slot_multiplier",
                    "barrier_timeout_s", "clustering", "mobility", "local_queue", "task_graphs", "max_events"},
                   "");

    ExperimentConfig cfg;
    read(root, "seed", cfg.seed);
    read(root, "replications", cfg.replications);
    read(root, "runs_per_replication", cfg.runs_per_replication);
    read(root, "worker_count", cfg.sim.worker_count);
    read(root, "cluster_count", cfg.sim.cluster_count);
    read(root, "controller_worker_delay_s", cfg.sim.controller_worker_delay);
    read(root, "status_update_cost_s", cfg.sim.status_update_cost);
    read(root, "fail_probability", cfg.sim.fail_probability);
    read(root, "join_probability", cfg.sim.join_probability);
    read(root, "prediction_accuracy", cfg.sim.prediction_accuracy);
    read(root, "sync_degree", cfg.sync_degree);
    read(root, "lambda_s", cfg.lambda_s);
    read(root, "max_retries", cfg.max_retries);
    read(root, "min_cluster_size", cfg.min_cluster_size);
    read(root, "required_per_cluster", cfg.required_per_cluster);
    read(root, "slot_multiplier", cfg.slot_multiplier);
    read(root, "max_events", cfg.max_events);
    if (auto it = root.find("barrier_timeout_s"); it != root.end() && !it->is_null()) {
        double t = 0.0;
        read(root, "barrier_timeout_s", t);
        cfg.barrier_timeout_s = t;
    }

    std::string s;
    {
        auto it = root.find("controller_topology");
        if (it != root.end() && it->is_string()) {
            s = it->get<std::string>();
            // bare "hierarchical" means two fogs
            if (s == "hierarchical") cfg.fog_count = 2;
            else if (s != "single") throw ValidationError("controller_topology", "expected single or hierarchical");
        } else if (it != root.end() && it->is_object()) {
            reject_unknown(*it, {"type", "fog_count"}, "controller_topology");
            std::string type = "hierarchical";
            read(*it, "type", type, "controller_topology");
            if (type == "hierarchical") {
                cfg.fog_count = 2;
                read(*it, "fog_count", cfg.fog_count, "controller_topology");
                if (cfg.fog_count < 1) throw ValidationError("controller_topology.fog_count", "must be positive");
            } else if (type != "single") {
                throw ValidationError("controller_topology.type", "expected single or hierarchical");
            }
        } else if (it != root.end() && !it->is_null()) {
            throw ValidationError("controller_topology", "expected a string or an object");
        }
    }

    s = "all_worker";
    read(root, "update_scheme", s);
    try {
        cfg.update_scheme = update_scheme_from_string(s);
    } catch (const Error&) {
        throw ValidationError("update_scheme", "expected all_worker or publish_subscribe");
    }

    s = "fixed";
    read(root, "clustering", s);
    if (s == "fixed") cfg.clustering = ClusteringMode::Fixed;
    else if (s == "grid") cfg.clustering = ClusteringMode::Grid;
    else throw ValidationError("clustering", "expected fixed or grid");

    const json& mob = object_or_empty(root, "mobility");
    reject_unknown(mob, {"model", "speed_mps", "box_m", "interval_s"}, "mobility");
    s = "static";
    read(mob, "model", s, "mobility");
    if (s == "static") cfg.mobility.mode = MobilityMode::Static;
    else if (s == "random_waypoint") cfg.mobility.mode = MobilityMode::RandomWaypoint;
    else throw ValidationError("mobility.model", "expected static or random_waypoint");
    read(mob, "speed_mps", cfg.mobility.speed_mps, "mobility");
    read(mob, "box_m", cfg.mobility.box_m, "mobility");
    read(mob, "interval_s", cfg.mobility.interval_s, "mobility");

    const json& lq = object_or_empty(root, "local_queue");
    reject_unknown(lq, {"depth", "mean_s", "stddev_s"}, "local_queue");
    read(lq, "depth", cfg.local_queue.depth, "local_queue");
    read(lq, "mean_s", cfg.local_queue.mean_s, "local_queue");
    read(lq, "stddev_s", cfg.local_queue.stddev_s, "local_queue");

    const json& tg = object_or_empty(root, "task_graphs");
    reject_unknown(tg,
                   {"count", "tasks", "sync_fraction", "min_duration_s", "max_duration_s", "duration_cv",
                    "extra_edge_probability", "duration_trace", "files"},
                   "task_graphs");
    read(tg, "count", cfg.graphs.count, "task_graphs");
    read(tg, "tasks", cfg.graphs.tasks, "task_graphs");
    read(tg, "sync_fraction", cfg.graphs.sync_fraction, "task_graphs");
    read(tg, "min_duration_s", cfg.graphs.min_duration_s, "task_graphs");
    read(tg, "max_duration_s", cfg.graphs.max_duration_s, "task_graphs");
    read(tg, "duration_cv", cfg.graphs.duration_cv, "task_graphs");
    read(tg, "extra_edge_probability", cfg.graphs.extra_edge_probability, "task_graphs");
    if (auto it = tg.find("duration_trace"); it != tg.end() && !it->is_null()) {
        std::string p;
        read(tg, "duration_trace", p, "task_graphs");
        cfg.graphs.duration_trace = resolve(base_dir, p);
    }
    if (auto it = tg.find("files"); it != tg.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("task_graphs.files", "expected an array of paths");
        for (const auto& f : *it) {
            if (!f.is_string()) throw ValidationError("task_graphs.files", "expected an array of paths");
            cfg.graphs.files.push_back(resolve(base_dir, f.get<std::string>()));
        }
    }

    s = "time_redundant";
    read(root, "policy", s);
    set_policy(cfg, s);
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    return config_from_json(text, path.parent_path());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["replications"] = cfg.replications;
    j["runs_per_replication"] = cfg.runs_per_replication;
    j["worker_count"] = cfg.sim.worker_count;
    j["cluster_count"] = cfg.sim.cluster_count;
    if (cfg.fog_count > 0)
        j["controller_topology"] = {{"type", "hierarchical"}, {"fog_count", cfg.fog_count}};
    else
        j["controller_topology"] = "single";
    j["controller_worker_delay_s"] = cfg.sim.controller_worker_delay;
    j["status_update_cost_s"] = cfg.sim.status_update_cost;
    j["fail_probability"] = cfg.sim.fail_probability;
    j["join_probability"] = cfg.sim.join_probability;
    j["prediction_accuracy"] = cfg.sim.prediction_accuracy;
    j["policy"] = std::string(policy_type(cfg));
    j["update_scheme"] = std::string(to_string(cfg.update_scheme));
    j["sync_degree"] = cfg.sync_degree;
    j["lambda_s"] = cfg.lambda_s;
    j["max_retries"] = cfg.max_retries;
    j["min_cluster_size"] = cfg.min_cluster_size;
    j["required_per_cluster"] = cfg.required_per_cluster;
    j["slot_multiplier"] = cfg.slot_multiplier;
    j["barrier_timeout_s"] = cfg.barrier_timeout_s ? json(*cfg.barrier_timeout_s) : json(nullptr);
    j["clustering"] = cfg.clustering == ClusteringMode::Grid ? "grid" : "fixed";
    j["mobility"] = {{"model", cfg.mobility.mode == MobilityMode::RandomWaypoint ? "random_waypoint" : "static"},
                     {"speed_mps", cfg.mobility.speed_mps},
                     {"box_m", cfg.mobility.box_m},
                     {"interval_s", cfg.mobility.interval_s}};
    j["local_queue"] = {{"depth", cfg.local_queue.depth},
                        {"mean_s", cfg.local_queue.mean_s},
                        {"stddev_s", cfg.local_queue.stddev_s}};
    json files = json::array();
    for (const auto& f : cfg.graphs.files) files.push_back(f.string());
    j["task_graphs"] = {{"count", cfg.graphs.count},
                        {"tasks", cfg.graphs.tasks},
                        {"sync_fraction", cfg.graphs.sync_fraction},
                        {"min_duration_s", cfg.graphs.min_duration_s},
                        {"max_duration_s", cfg.graphs.max_duration_s},
                        {"duration_cv", cfg.graphs.duration_cv},
                        {"extra_edge_probability", cfg.graphs.extra_edge_probability},
                        {"duration_trace", cfg.graphs.duration_trace ? json(cfg.graphs.duration_trace->string())
                                                                     : json(nullptr)},
                        {"files", files}};
    j["max_events"] = cfg.max_events;
    return j.dump(2);
}

void validate(const ExperimentConfig& cfg) {
    validate(cfg.sim);
    validate(cfg.policy);
    if (!(cfg.sync_degree > 0.0 && cfg.sync_degree <= 1.0)) throw ValidationError("sync_degree", "must lie in (0, 1]");
    if (!(cfg.lambda_s >= 0.0)) throw ValidationError("lambda_s", "must be non-negative");
    if (cfg.max_retries < 0) throw ValidationError("max_retries", "must be non-negative");
    if (cfg.min_cluster_size < 1) throw ValidationError("min_cluster_size", "must be at least 1");
    if (cfg.required_per_cluster < 1) throw ValidationError("required_per_cluster", "must be at least 1");
    if (!(cfg.slot_multiplier >= 0.0)) throw ValidationError("slot_multiplier", "must be non-negative");
    if (cfg.barrier_timeout_s && !(*cfg.barrier_timeout_s > 0.0))
        throw ValidationError("barrier_timeout_s", "must be positive");
    if (cfg.replications < 1) throw ValidationError("replications", "must be positive");
    if (cfg.runs_per_replication < 1) throw ValidationError("runs_per_replication", "must be positive");
    if (cfg.fog_count < 0) throw ValidationError("controller_topology.fog_count", "must be non-negative");
    if (cfg.max_events == 0) throw ValidationError("max_events", "must be positive");
    if (cfg.local_queue.depth < 0) throw ValidationError("local_queue.depth", "must be non-negative");
    if (!(cfg.local_queue.mean_s > 0.0)) throw ValidationError("local_queue.mean_s", "must be positive");
    if (!(cfg.local_queue.stddev_s >= 0.0)) throw ValidationError("local_queue.stddev_s", "must be non-negative");
    if (!(cfg.mobility.interval_s > 0.0)) throw ValidationError("mobility.interval_s", "must be positive");
    if (!(cfg.mobility.speed_mps >= 0.0)) throw ValidationError("mobility.speed_mps", "must be non-negative");
    if (!(cfg.mobility.box_m > 0.0)) throw ValidationError("mobility.box_m", "must be positive");
    const auto& g = cfg.graphs;
    if (g.files.empty()) {
        if (g.count < 1) throw ValidationError("task_graphs.count", "must be positive");
        if (g.tasks < 2) throw ValidationError("task_graphs.tasks", "need at least two tasks");
        if (!(g.sync_fraction > 0.0 && g.sync_fraction <= 1.0))
            throw ValidationError("task_graphs.sync_fraction", "must lie in (0, 1]");
        if (!(g.min_duration_s > 0.0 && g.min_duration_s <= g.max_duration_s))
            throw ValidationError("task_graphs.min_duration_s", "need 0 < min <= max");
        if (!(g.duration_cv >= 0.0)) throw ValidationError("task_graphs.duration_cv", "must be non-negative");
        if (!(g.extra_edge_probability >= 0.0 && g.extra_edge_probability <= 1.0))
            throw ValidationError("task_graphs.extra_edge_probability", "must lie in [0, 1]");
    }
}

std::vector<TaskGraph> generate_graphs(const GraphGenConfig& gen, std::uint64_t seed,
                                       const std::vector<double>* duration_pool) {
    RandomStreams streams(seed);
    std::vector<TaskGraph> out;
    const int n = gen.tasks;
    const int width = n >= 100 ? 3 : 2;
    auto name = [&](int i) {
        std::string digits = std::to_string(i);
        return "t" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') +
               digits;
    };
    const double lo = std::log(gen.min_duration_s), hi = std::log(gen.max_duration_s);
    for (int g = 0; g < gen.count; ++g) {
        auto rng = streams.engine(Stream::Graph, static_cast<std::uint64_t>(g));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        // sync count varies between graphs around the configured fraction
        const double target = gen.sync_fraction * n;
        std::uniform_real_distribution<double> spread(0.5 * target, 1.5 * target);
        int syncs = static_cast<int>(std::lround(spread(rng)));
        syncs = std::clamp(syncs, 1, n - 1);
        std::vector<int> positions(static_cast<std::size_t>(n - 1));
        for (int i = 0; i < n - 1; ++i) positions[static_cast<std::size_t>(i)] = i + 1;
        std::shuffle(positions.begin(), positions.end(), rng);
        std::set<int> sync_at(positions.begin(), positions.begin() + syncs);

        std::vector<TaskSpec> tasks;
        for (int i = 0; i < n; ++i) {
            TaskSpec t;
            t.id = name(i);
            if (sync_at.count(i)) t.kind = TaskKind::ControllerToWorkerSync;
            else t.kind = unit(rng) < 0.5 ? TaskKind::ControllerToWorkerAsync : TaskKind::LocalWorker;
            if (duration_pool && !duration_pool->empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, duration_pool->size() - 1);
                t.base_duration = (*duration_pool)[pick(rng)];
            } else {
                t.base_duration = std::clamp(std::exp(lo + unit(rng) * (hi - lo)), gen.min_duration_s,
                                             gen.max_duration_s);
            }
            t.duration_stddev = gen.duration_cv * t.base_duration;
            if (i > 0) t.predecessors.push_back(name(i - 1));
            for (int j = 0; j + 1 < i; ++j)
                if (unit(rng) < gen.extra_edge_probability) t.predecessors.push_back(name(j));
            tasks.push_back(std::move(t));
        }
        out.emplace_back("g" + std::to_string(g), std::move(tasks));
    }
    return out;
}

std::vector<TaskGraph> build_graphs(const ExperimentConfig& cfg) {
    if (!cfg.graphs.files.empty()) {
        std::vector<TaskGraph> out;
        for (const auto& f : cfg.graphs.files) {
            out.push_back(load_task_graph(f));
            if (auto err = validate_task_graph(out.back()))
                throw ValidationError("task_graphs.files", f.string() + ": " + describe(*err));
        }
        return out;
    }
    if (cfg.graphs.duration_trace) {
        const auto trace = parse_duration_csv(read_text_file(*cfg.graphs.duration_trace));
        std::vector<double> pool;
        for (const auto& e : trace.entries) pool.push_back(e.duration);
        return generate_graphs(cfg.graphs, cfg.seed, &pool);
    }
    return generate_graphs(cfg.graphs, cfg.seed);
}

Scenario make_scenario(const ExperimentConfig& cfg, const std::vector<TaskGraph>& graphs, int replication) {
    Scenario sc;
    sc.sim = cfg.sim;
    sc.sim.rng_seed = cfg.seed + static_cast<std::uint64_t>(replication);
    sc.policy = cfg.policy;
    sc.update_scheme = cfg.update_scheme;
    sc.graphs = graphs;
    sc.runs = cfg.runs_per_replication;
    sc.replication = replication;
    sc.fog_count = cfg.fog_count;
    sc.clustering = cfg.clustering;
    sc.mobility = cfg.mobility;
    sc.local_queue = cfg.local_queue;
    sc.max_events = cfg.max_events;
    return sc;
}

}  // namespace syncsim
