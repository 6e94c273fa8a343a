#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace oracle {

using namespace syncsim;

namespace {

// Kahn's algorithm, smallest ready id first.
std::vector<const TaskSpec*> topo(const TaskGraph& g) {
    std::map<std::string, const TaskSpec*> by_id;
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> succ;
    for (const auto& t : g.tasks()) {
        by_id[t.id] = &t;
        indeg[t.id] += 0;
        for (const auto& p : t.predecessors) {
            ++indeg[t.id];
            succ[p].push_back(t.id);
        }
    }
    std::set<std::string> ready;
    for (const auto& [id, n] : indeg)
        if (n == 0) ready.insert(id);
    std::vector<const TaskSpec*> out;
    while (!ready.empty()) {
        const std::string id = *ready.begin();
        ready.erase(ready.begin());
        out.push_back(by_id.at(id));
        for (const auto& s : succ[id])
            if (--indeg[s] == 0) ready.insert(s);
    }
    return out;
}

struct Calc {
    const Scenario& sc;
    int fogs;
    double d, c;
    std::vector<double> a;                   // worker availability
    std::vector<std::vector<std::pair<std::string, double>>> queue;  // local tasks
    int run = 0;
    Timeline out;
    MetricsRecord* rec = nullptr;

    explicit Calc(const Scenario& s)
        : sc(s), fogs(std::max(s.fog_count, 1)), d(s.sim.controller_worker_delay), c(s.sim.status_update_cost) {}

    int cell(int w) const { return (w / fogs) % sc.sim.cluster_count; }

    void decide(int run, int group, double t, const std::string& task, int attempt, int avail, int total,
                const std::string& result) {
        Decision x;
        x.run = run;
        x.group = group;
        x.t = t;
        x.task = task;
        x.attempt = attempt;
        x.available = avail;
        x.total = total;
        x.result = result;
        out.decisions.push_back(std::move(x));
    }

    // Runs the sync task on `who` from `start`; returns when the last result is back.
    double execute(const std::vector<int>& who, double start, double dur) {
        auto& dec = out.decisions.back();
        dec.start = start;
        double last = -INFINITY;
        for (int w : who) {
            const double begin = std::max(a[w], start);
            work(w, dec.task, begin, dur);
            dec.workers.push_back(static_cast<WorkerId>(w));
            dec.starts.push_back(begin);
            last = std::max(last, a[w] + d);
        }
        return last;
    }

    void work(int w, const std::string& id, double start, double dur) {
        a[w] = start + dur;
        out.executions.push_back({static_cast<WorkerId>(w), run, id, start, a[w], dur});
    }

    void outcome(SyncOutcome o, double start, int attempt) {
        ++rec->sync_points;
        rec->extra_quorum_attempts += attempt - 1;
        if (o == SyncOutcome::Success) {
            ++rec->sync_successes;
            rec->sync_times.push_back(start);
        } else if (o == SyncOutcome::QuorumFailure) {
            ++rec->failed_sync_quorum;
        } else {
            ++rec->failed_sync_incomplete;
        }
    }

    static std::string failed(FailureReason r) { return "failed:" + std::string(to_string(r)); }

    // Time-redundant and cluster quorum; returns the controller clock afterwards.
    double quorum_sync(int run, int f, const std::vector<int>& members, const TaskSpec& task, double C) {
        const auto* cr = std::get_if<ComponentRedundant>(&sc.policy);
        const auto* tr = std::get_if<TimeRedundant>(&sc.policy);
        const int n = static_cast<int>(members.size());
        for (int attempt = 1;; ++attempt) {
            if (n == 0) {
                decide(run, f, C, task.id, attempt, 0, 0,
                       failed(cr ? FailureReason::ClusterUnderfull : FailureReason::RetriesExhausted));
                outcome(SyncOutcome::QuorumFailure, C, attempt);
                return C;
            }
            // groups
            const int k = sc.sim.cluster_count;
            const int threshold = cr ? cr->min_cluster_size : 0;
            std::vector<int> count(k, 0);
            for (int w : members) ++count[cell(w)];
            std::map<int, int> formed;
            for (int cl = 0; cl < k; ++cl)
                if (count[cl] >= threshold) formed.emplace(cl, static_cast<int>(formed.size()));
            std::vector<int> group(a.size(), -1);
            for (int w : members) {
                auto it = formed.find(cell(w));
                if (it != formed.end()) group[w] = it->second;
                else if (formed.size() <= 1) group[w] = 0;
                else throw std::invalid_argument("attachment would depend on positions");
            }
            const int groups = std::max<int>(static_cast<int>(formed.size()), 1);

            const double call_arrival = C + d;
            double maxpred = -INFINITY;
            for (int w : members) maxpred = std::max(maxpred, std::max(a[w], call_arrival));
            const double arrival = call_arrival + d;
            const int updates = sc.update_scheme == UpdateScheme::PublishSubscribe ? groups : n;
            double tp = C;
            for (int i = 0; i < updates; ++i) tp = std::max(tp, arrival) + c;
            rec->controller_update_messages += updates;
            const double delta = std::max(maxpred + c + d, tp);

            // local scheduling, when the quorum time arrives before the check
            const double qt = tp + d;
            if (qt <= delta) {
                for (int w : members) {
                    double t = std::max(a[w], qt);
                    std::vector<std::pair<std::string, double>> kept;
                    for (const auto& [id, dur] : queue[w]) {
                        if (t + dur <= delta) {
                            work(w, id, t, dur);
                            t = a[w];
                        } else {
                            kept.emplace_back(id, dur);
                        }
                    }
                    queue[w] = kept;
                }
            }

            std::vector<int> ready;
            std::vector<int> per_group(groups, 0);
            for (int w : members)
                if (a[w] <= delta) {
                    ready.push_back(w);
                    ++per_group[group[w]];
                }

            bool pass;
            int avail, total;
            if (cr) {
                pass = std::all_of(per_group.begin(), per_group.end(),
                                   [&](int x) { return x >= cr->required_per_cluster; });
                avail = static_cast<int>(std::count_if(per_group.begin(), per_group.end(),
                                                       [&](int x) { return x >= cr->required_per_cluster; }));
                total = groups;
            } else {
                pass = static_cast<double>(ready.size()) / n >= tr->sync_degree - 1e-12;
                avail = static_cast<int>(ready.size());
                total = n;
            }
            if (pass) {
                decide(run, f, delta, task.id, attempt, avail, total, "passed");
                const double start = delta + d;
                double end = delta;
                if (!ready.empty()) end = execute(ready, start, task.base_duration);
                bool complete = !ready.empty();
                if (cr)
                    for (int x : per_group) complete = complete && x >= 1;
                outcome(complete ? SyncOutcome::Success : SyncOutcome::IncompleteFailure, start, attempt);
                return std::max(tp, end);
            }
            if (cr) {
                decide(run, f, delta, task.id, attempt, avail, total, failed(FailureReason::ClusterUnderfull));
                outcome(SyncOutcome::QuorumFailure, delta, attempt);
                return delta;
            }
            if (attempt - 1 < tr->max_retries) {
                decide(run, f, delta, task.id, attempt, avail, total, "retry");
                C = std::max(tp, delta + tr->lambda_s);
                continue;
            }
            decide(run, f, delta, task.id, attempt, avail, total, failed(FailureReason::RetriesExhausted));
            outcome(SyncOutcome::QuorumFailure, delta, attempt);
            return delta;
        }
    }

    double slotted_sync(int run, int f, const std::vector<int>& members, const TaskSpec& task, double C,
                        double seg_start, const std::vector<const TaskSpec*>& seg) {
        const auto& pol = std::get<TimeSlotted>(sc.policy);
        double mean = 0.0;
        for (const TaskSpec* t : seg) mean += t->base_duration;
        const double delta = std::max(seg_start + mean + pol.slot_multiplier * 0.0, C);
        std::vector<int> ready;
        for (int w : members)
            if (a[w] <= delta) ready.push_back(w);
        const int n = static_cast<int>(members.size());
        const bool pass = n > 0 && static_cast<double>(ready.size()) / n >= pol.sync_degree - 1e-12;
        if (!pass) {
            decide(run, f, delta, task.id, 1, static_cast<int>(ready.size()), n, failed(FailureReason::SlotMissed));
            outcome(SyncOutcome::QuorumFailure, delta, 1);
            return delta;
        }
        decide(run, f, delta, task.id, 1, static_cast<int>(ready.size()), n, "passed");
        if (ready.empty()) {
            outcome(SyncOutcome::IncompleteFailure, delta, 1);
            return delta;
        }
        const double end = execute(ready, delta, task.base_duration);
        outcome(SyncOutcome::Success, delta, 1);
        return std::max(C, end);
    }

    double barrier_sync(int run, int f, const std::vector<int>& members, const TaskSpec& task, double C,
                        const std::vector<const TaskSpec*>& seg) {
        const int n = static_cast<int>(members.size());
        if (n == 0) {
            decide(run, f, C, task.id, 1, 0, 0, failed(FailureReason::BarrierTimeout));
            outcome(SyncOutcome::QuorumFailure, C, 1);
            return C;
        }
        const auto& pol = std::get<Barrier>(sc.policy);
        double mean = 0.0;
        for (const TaskSpec* t : seg) mean += t->base_duration;
        const double deadline = C + pol.timeout_s.value_or(10.0 * std::max(mean, 1.0));

        std::vector<double> arrive(a.size());
        for (int w : members) arrive[w] = std::max(a[w], C + d);

        // (time, class, m, id): class 0 sent at the call, 1 the timeout, 2 later sends
        using Ev = std::tuple<double, int, double, int>;
        std::vector<Ev> evs;
        evs.emplace_back(deadline, 1, 0.0, 0);
        if (sc.update_scheme == UpdateScheme::AllWorker) {
            for (int w : members) evs.emplace_back(arrive[w] + d, 2, 0.0, w);
        } else {
            std::map<int, std::pair<double, int>> last;  // cell -> latest (arrival, id)
            for (int w : members) {
                auto it = last.find(cell(w));
                const std::pair<double, int> me{arrive[w], w};
                if (it == last.end()) last.emplace(cell(w), me);
                else it->second = std::max(it->second, me);
            }
            for (int cl = 0; cl < sc.sim.cluster_count; ++cl) {
                auto it = last.find(cl);
                if (it == last.end()) evs.emplace_back(C + d + d, 0, 0.0, cl);
                else evs.emplace_back(it->second.first + d, 2, it->second.first, it->second.second);
            }
        }
        std::sort(evs.begin(), evs.end());
        const int expected = static_cast<int>(evs.size()) - 1;

        double T = C;
        int processed = 0;
        for (const auto& [t, cls, m, id] : evs) {
            if (cls == 1) {
                decide(run, f, deadline, task.id, 1, processed, expected, failed(FailureReason::BarrierTimeout));
                rec->controller_update_messages += processed;
                outcome(SyncOutcome::QuorumFailure, deadline, 1);
                return std::max(T, deadline);
            }
            T = std::max(T, t) + c;
            if (++processed < expected) continue;
            rec->controller_update_messages += processed;
            decide(run, f, t, task.id, 1, n, n, "passed");
            const double start = T + d;
            const double end = execute(members, start, task.base_duration);
            outcome(SyncOutcome::Success, start, 1);
            return std::max(T, end);
        }
        throw std::logic_error("barrier never resolved");
    }

    double fog_run(int run, int f, const std::vector<const TaskSpec*>& order, double t0) {
        std::vector<int> members;
        for (int w = 0; w < static_cast<int>(a.size()); ++w)
            if (w % fogs == f) members.push_back(w);
        double T = t0;
        double seg_start = T;
        std::vector<const TaskSpec*> seg;
        for (const TaskSpec* task : order) {
            const double dur = task->base_duration;
            switch (task->kind) {
                case TaskKind::ControllerToWorkerAsync:
                case TaskKind::LocalWorker: {
                    const double ready = task->kind == TaskKind::LocalWorker ? T : T + d;
                    for (int w : members) work(w, task->id, std::max(a[w], ready), dur);
                    seg.push_back(task);
                    break;
                }
                case TaskKind::LocalController:
                    T += dur;
                    break;
                case TaskKind::WorkerToControllerSync:
                case TaskKind::WorkerToControllerAsync: {
                    const double c0 = T;
                    std::vector<std::pair<double, int>> arr;
                    for (int w : members) arr.emplace_back(std::max(a[w], c0) + d, w);
                    std::sort(arr.begin(), arr.end());
                    for (const auto& [t, w] : arr) {
                        T = std::max(T, t) + dur;
                        a[w] = task->kind == TaskKind::WorkerToControllerSync ? T + d : std::max(a[w], c0);
                    }
                    break;
                }
                case TaskKind::ControllerToWorkerSync: {
                    if (std::holds_alternative<Barrier>(sc.policy)) T = barrier_sync(run, f, members, *task, T, seg);
                    else if (std::holds_alternative<TimeSlotted>(sc.policy))
                        T = slotted_sync(run, f, members, *task, T, seg_start, seg);
                    else T = quorum_sync(run, f, members, *task, T);
                    seg.clear();
                    seg_start = T;
                    break;
                }
            }
        }
        double done = T;
        for (int w : members) done = std::max(done, a[w]);
        return done;
    }

    void run_all() {
        a.assign(static_cast<std::size_t>(sc.sim.worker_count), 0.0);
        queue.assign(a.size(), {});
        double t0 = 0.0;
        for (int run = 0; run < sc.runs; ++run) {
            for (auto& x : a) x = std::max(x, t0);
            this->run = run;
            for (auto& q : queue) {
                q.clear();
                for (int j = 0; j < sc.local_queue.depth; ++j)
                    q.emplace_back("l" + std::to_string(j), sc.local_queue.mean_s);
            }
            const auto order = topo(sc.graphs[static_cast<std::size_t>(run) % sc.graphs.size()]);
            MetricsRecord r;
            r.replication = sc.replication;
            r.run_index = run;
            rec = &r;
            double boundary = t0;
            for (int f = 0; f < fogs; ++f) boundary = std::max(boundary, fog_run(run, f, order, t0));
            r.runtime_s = boundary - t0;
            std::sort(r.sync_times.begin(), r.sync_times.end());
            out.records.push_back(std::move(r));
            t0 = boundary;
        }
    }
};

}  // namespace

Timeline compute(const Scenario& sc) {
    if (sc.sim.fail_probability != 0.0 || sc.sim.join_probability != 0.0 || sc.sim.prediction_accuracy != 1.0 ||
        sc.local_queue.stddev_s != 0.0 || sc.clustering != ClusteringMode::Fixed ||
        sc.mobility.mode != MobilityMode::Static)
        throw std::invalid_argument("scenario is not deterministic");
    for (const auto& g : sc.graphs)
        for (const auto& t : g.tasks())
            if (t.duration_stddev != 0.0) throw std::invalid_argument("task duration has spread");
    Calc calc(sc);
    calc.run_all();
    return std::move(calc.out);
}

}  // namespace oracle
