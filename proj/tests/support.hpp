#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "syncsim/random.hpp"
#include "syncsim/simulator.hpp"
#include "syncsim/task.hpp"

namespace testing {

using namespace syncsim;

inline TaskSpec task(std::string id, TaskKind kind, double dur, double sd = 0.0,
                     std::vector<std::string> preds = {}) {
    TaskSpec t;
    t.id = std::move(id);
    t.kind = kind;
    t.base_duration = dur;
    t.duration_stddev = sd;
    t.predecessors = std::move(preds);
    return t;
}

/// Hand-rolled generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t bits() { return rng_(); }
    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }
    int integer(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    bool coin(double p = 0.5) { return uniform() < p; }
    template <class T>
    const T& pick(const std::vector<T>& v) { return v[rng_() % v.size()]; }
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng_() % i]);
    }

private:
    SplitMix64 rng_;
};

/// Random DAG; edges only point from lower to higher creation index, then the
/// task vector is shuffled so the stored order says nothing about precedence.
inline TaskGraph random_dag(Gen& g, int n, double edge_p = 0.3) {
    const std::vector<TaskKind> kinds = {TaskKind::ControllerToWorkerSync, TaskKind::ControllerToWorkerAsync,
                                         TaskKind::LocalWorker, TaskKind::LocalController,
                                         TaskKind::WorkerToControllerSync, TaskKind::WorkerToControllerAsync};
    std::vector<TaskSpec> tasks;
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> preds;
        for (int j = 0; j < i; ++j)
            if (g.coin(edge_p)) preds.push_back("n" + std::to_string(j));
        tasks.push_back(task("n" + std::to_string(i), g.pick(kinds), g.uniform(1, 50), 0.0, preds));
    }
    g.shuffle(tasks);
    return TaskGraph("dag", std::move(tasks));
}

/// Chain graph with every task depending on the previous one.
inline TaskGraph chain(std::string id, std::vector<TaskSpec> tasks) {
    for (std::size_t i = 1; i < tasks.size(); ++i)
        if (tasks[i].predecessors.empty()) tasks[i].predecessors = {tasks[i - 1].id};
    return TaskGraph(std::move(id), std::move(tasks));
}

/// No failures, no joins, no local queue, exact prediction.
inline Scenario quiet_scenario(int workers, int clusters, std::vector<TaskGraph> graphs, int runs = 1) {
    Scenario sc;
    sc.sim.worker_count = workers;
    sc.sim.cluster_count = clusters;
    sc.sim.fail_probability = 0.0;
    sc.sim.join_probability = 0.0;
    sc.sim.prediction_accuracy = 1.0;
    sc.local_queue.depth = 0;
    sc.graphs = std::move(graphs);
    sc.runs = runs;
    return sc;
}

}  // namespace testing
