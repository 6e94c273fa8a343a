#include "syncsim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "syncsim/errors.hpp"
#include "syncsim/event_queue.hpp"
#include "syncsim/processes.hpp"
#include "syncsim/quorum.hpp"
#include "syncsim/random.hpp"
#include "syncsim/topology.hpp"
#include "syncsim/trace.hpp"

namespace syncsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

enum class Msg : std::uint8_t {
    SyncCall,
    StatusUpdate,
    GroupUpdate,
    QuorumTime,
    Result,
    BarrierCall,
    BarrierPublish,  // worker to its co-located broker; not a network message
    BarrierUpdate,
    BarrierGroup,
};

enum class Timer : std::uint8_t { Resume, QuorumCheck, RetryCall, BarrierTimeout };

struct Payload {
    std::uint8_t type = 0;
    std::uint32_t fog = 0;
    std::uint32_t round = 0;
    std::uint32_t worker = 0;
    std::uint32_t epoch = 0;
    std::uint32_t index = 0;
    std::uint32_t aux = 0;
    double sent = 0.0;
};

struct WorkerRt {
    WorkerState st;
    std::uint32_t fog = 0;
    std::uint32_t epoch = 0;
    std::uint32_t completions = 0;
    std::uint32_t fail_k = kNone;  // completion index that will fail, if any
    double fail_at = kInf;
    double failed_at = -kInf;
    ClusterId cell = 0;
    double predicted = 0.0;
    std::optional<RandomWaypoint> walker;
};

struct SyncRt {
    const TaskSpec* task = nullptr;
    std::size_t task_index = 0;
    std::string key;
    SyncPointState state;
    int attempt = 0;
    std::uint32_t round = 0;
    double call_time = 0.0;

    std::vector<WorkerId> scope;
    std::vector<std::uint32_t> scope_epoch;
    std::vector<std::uint32_t> scope_group;
    std::vector<ClusterId> group_cell;  // grid cell whose broker represents the group
    std::vector<char> reported;
    std::size_t group_count = 0;
    std::vector<int> group_reporters;
    std::vector<double> group_max;
    std::vector<int> group_expected;
    std::vector<double> preds;

    std::size_t pending_calls = 0;
    std::size_t expected_updates = 0;
    std::size_t received_updates = 0;
    std::vector<std::optional<double>> processed;  // barrier: per-update processing end
    std::int64_t local_delayed = 0;
    double delta = 0.0;

    bool running = false;
    double start_time = 0.0;
    std::size_t pending_results = 0;
    std::vector<int> results_per_group;
    std::size_t trace_slot = kNone;
};

struct FogRt {
    std::uint32_t index = 0;
    ControllerId controller = 0;
    std::vector<WorkerId> members;
    double ctrl_t = 0.0;
    const std::vector<const TaskSpec*>* order = nullptr;
    std::size_t next = 0;
    std::vector<const TaskSpec*> segment;
    double segment_start = 0.0;
    std::vector<std::pair<WorkerId, std::uint32_t>> segment_scope;
    std::optional<SyncRt> sync;
    bool resume_posted = false;
    bool done = false;
    double done_time = 0.0;
};

std::string result_label(const QuorumResult& r) {
    if (std::holds_alternative<Passed>(r)) return "passed";
    if (std::holds_alternative<Retry>(r)) return "retry";
    return "failed:" + std::string(to_string(std::get<Failed>(r).reason));
}

class World {
public:
    explicit World(const Scenario& sc);
    ReplicationResult run();

private:
    using Queue = EventQueue<Payload>;

    double now() const { return queue_.now(); }
    double delay() const { return sc_.sim.controller_worker_delay; }
    double cost() const { return sc_.sim.status_update_cost; }
    std::uint32_t fog_count() const { return static_cast<std::uint32_t>(fogs_.size()); }

    void dispatch(const Queue::Event& ev);
    void on_message(const Payload& p);
    void on_timer(const Payload& p);

    // network
    void send_to_worker(FogRt& f, Msg type, WorkerId w, double at, Payload p);
    void send_to_controller(FogRt& f, Msg type, WorkerId from, double sent, Payload p);
    void send_from_broker(FogRt& f, Msg type, ClusterId cell, double sent, Payload p);
    ControllerId broker_of(const FogRt& f, ClusterId cell) const;
    bool sender_alive(const Payload& p) const;

    // run lifecycle
    void start_run(double t);
    void end_run();
    void add_worker(WorkerId id);
    void refill_queue(WorkerRt& w);
    void recompute_cells();
    void reset_segment(FogRt& f);
    void finish_fog(FogRt& f);

    // controller loop
    void advance(FogRt& f);
    void post_resume(FogRt& f, double at);
    bool run_worker_task(WorkerRt& w, double start, double dur, bool post_check, const std::string& label);
    void serve_requests(FogRt& f, const TaskSpec& task, std::size_t ti, bool blocking);
    double sample(const TaskSpec& task, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) const;

    // sync protocols
    void begin_sync(FogRt& f, const TaskSpec& task, std::size_t ti);
    void start_attempt(FogRt& f);
    void calls_resolved(FogRt& f);
    void on_update(FogRt& f, bool processed);
    void quorum_check(FogRt& f);
    void start_barrier(FogRt& f);
    void on_barrier_update(FogRt& f, const Payload& p);
    void slot_boundary(FogRt& f);
    void start_sync_task(FogRt& f, double start, const std::vector<std::pair<WorkerId, std::uint32_t>>& who);
    void result_resolved(FogRt& f);
    void finish_sync(FogRt& f, SyncOutcome outcome, double start_time);
    void log_decision(FogRt& f, int available, int total, const QuorumResult& r);
    SyncTrace* open_trace(FogRt& f);

    const Scenario& sc_;
    RandomStreams rng_;
    Queue queue_;
    Topology topo_;
    std::vector<WorkerRt> workers_;
    std::vector<FogRt> fogs_;
    std::vector<std::vector<const TaskSpec*>> orders_;
    std::uint32_t next_round_ = 1;
    int run_ = 0;
    double run_start_ = 0.0;
    std::size_t fogs_done_ = 0;
    bool stopped_ = false;
    std::optional<MetricsCollector> collector_;
    ReplicationResult out_;
};

World::World(const Scenario& sc) : sc_(sc), rng_(sc.sim.rng_seed) {
    const std::uint32_t nf = sc.fog_count > 0 ? static_cast<std::uint32_t>(sc.fog_count) : 1;
    if (sc.fog_count > 0) {
        topo_.add_controller(0, ControllerLevel::Cloud, std::nullopt);
        for (std::uint32_t f = 0; f < nf; ++f) topo_.add_controller(f + 1, ControllerLevel::Fog, 0);
    } else {
        topo_.add_controller(0, ControllerLevel::Cloud, std::nullopt);
    }
    fogs_.resize(nf);
    for (std::uint32_t f = 0; f < nf; ++f) {
        fogs_[f].index = f;
        fogs_[f].controller = sc.fog_count > 0 ? f + 1 : 0;
        for (int c = 0; c < sc.sim.cluster_count; ++c)
            topo_.add_controller(broker_of(fogs_[f], static_cast<ClusterId>(c)), ControllerLevel::Device,
                                 fogs_[f].controller);
    }
    orders_.reserve(sc.graphs.size());
    for (const auto& g : sc.graphs) orders_.push_back(processing_order(g));
    for (int i = 0; i < sc.sim.worker_count; ++i) add_worker(static_cast<WorkerId>(i));
}

void World::add_worker(WorkerId id) {
    WorkerRt w;
    w.st.worker_id = id;
    w.fog = id % fog_count();
    auto rng = rng_.engine(Stream::Mobility, id);
    const MobilityBox box{sc_.mobility.box_m, sc_.mobility.box_m};
    if (sc_.mobility.mode == MobilityMode::RandomWaypoint) {
        w.walker.emplace(rng, box, sc_.mobility.speed_mps);
        w.st.position = w.walker->position();
    } else {
        std::uniform_real_distribution<double> ux(0.0, box.width), uy(0.0, box.height);
        const double x = ux(rng);
        w.st.position = Position{x, uy(rng)};
    }
    topo_.add_worker(id, fogs_[w.fog].controller);
    fogs_[w.fog].members.push_back(id);
    workers_.push_back(std::move(w));
}

double World::sample(const TaskSpec& task, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3) const {
    auto rng = rng_.engine(Stream::Durations, k1, k2, k3);
    return sample_duration(task, rng);
}

void World::refill_queue(WorkerRt& w) {
    w.st.local_queue.clear();
    for (int j = 0; j < sc_.local_queue.depth; ++j) {
        TaskSpec proto{"", TaskKind::LocalWorker, sc_.local_queue.mean_s, sc_.local_queue.stddev_s, {}};
        auto rng = rng_.engine(Stream::LocalQueue, static_cast<std::uint64_t>(run_), w.st.worker_id,
                               static_cast<std::uint64_t>(j));
        TaskSpec t;
        t.id = "l" + std::to_string(j);
        t.kind = TaskKind::LocalWorker;
        t.base_duration = sample_duration(proto, rng);
        w.st.local_queue.push_back(std::move(t));
    }
}

void World::recompute_cells() {
    const auto k = static_cast<std::uint32_t>(sc_.sim.cluster_count);
    for (auto& f : fogs_) {
        if (sc_.clustering == ClusteringMode::Fixed) {
            for (WorkerId id : f.members) workers_[id].cell = (id / fog_count()) % k;
            continue;
        }
        std::vector<WorkerId> live;
        std::vector<Position> pos;
        for (WorkerId id : f.members) {
            if (!workers_[id].st.connected()) continue;
            live.push_back(id);
            pos.push_back(*workers_[id].st.position);
        }
        if (live.empty()) continue;
        const auto cells = grid_cells(pos, sc_.sim.cluster_count);
        for (std::size_t i = 0; i < live.size(); ++i) workers_[live[i]].cell = cells[i];
    }
    for (auto& w : workers_) w.st.cluster_id = w.cell;
}

void World::reset_segment(FogRt& f) {
    f.segment.clear();
    f.segment_start = std::max(f.ctrl_t, now());
    f.segment_scope.clear();
    for (WorkerId id : f.members)
        if (workers_[id].st.connected()) f.segment_scope.emplace_back(id, workers_[id].epoch);
}

void World::start_run(double t) {
    run_start_ = t;
    collector_.emplace(sc_.replication, run_);
    out_.run_starts.push_back(t);

    for (auto& w : workers_) {
        if (!w.st.connected()) {
            w.st.liveness = Liveness::Connected;
            ++w.epoch;
        }
        w.fail_k = kNone;
        w.fail_at = kInf;
        w.completions = 0;
        w.st.t_avail = std::max(w.st.t_avail, t);
    }
    const double u = rng_.uniform(Stream::Join, static_cast<std::uint64_t>(run_));
    const auto fresh = static_cast<WorkerId>(workers_.size());
    if (auto joined = apply_join_process(sc_.sim.join_probability, fresh, t, u)) {
        add_worker(fresh);
        workers_.back().st.t_avail = joined->t_avail;
        out_.join_times.push_back(t);
    }
    for (auto& w : workers_) refill_queue(w);
    recompute_cells();

    const auto& order = orders_[static_cast<std::size_t>(run_) % orders_.size()];
    fogs_done_ = 0;
    for (auto& f : fogs_) {
        f.order = &order;
        f.next = 0;
        f.ctrl_t = t;
        f.sync.reset();
        f.done = false;
        f.done_time = t;
        reset_segment(f);
    }
    for (auto& f : fogs_) advance(f);
}

void World::end_run() {
    collector_->set_runtime(now() - run_start_);
    out_.records.push_back(collector_->take());
    collector_.reset();
}

void World::finish_fog(FogRt& f) {
    double end = std::max(f.ctrl_t, now());
    for (WorkerId id : f.members) {
        const auto& w = workers_[id];
        if (!w.st.connected()) continue;
        end = std::max(end, std::min(w.st.t_avail, w.fail_at));
    }
    f.done = true;
    f.done_time = end;
    if (++fogs_done_ < fogs_.size()) return;
    double boundary = now();
    for (const auto& g : fogs_) boundary = std::max(boundary, g.done_time);
    queue_.post(boundary, EventKind::JoinCheck, Payload{});
}

void World::send_to_worker(FogRt& f, Msg type, WorkerId w, double at, Payload p) {
    topo_.check_link(NodeRef::controller(f.controller), NodeRef::worker(w));
    p.type = static_cast<std::uint8_t>(type);
    p.fog = f.index;
    p.worker = w;
    p.sent = now();
    ++out_.messages.sent;
    queue_.post(at, EventKind::MessageArrival, p);
}

void World::send_to_controller(FogRt& f, Msg type, WorkerId from, double sent, Payload p) {
    topo_.check_link(NodeRef::worker(from), NodeRef::controller(f.controller));
    p.type = static_cast<std::uint8_t>(type);
    p.fog = f.index;
    p.worker = from;
    p.epoch = workers_[from].epoch;
    p.sent = sent;
    ++out_.messages.sent;
    queue_.post(sent + delay(), EventKind::MessageArrival, p);
}

ControllerId World::broker_of(const FogRt& f, ClusterId cell) const {
    const auto k = static_cast<ControllerId>(sc_.sim.cluster_count);
    const ControllerId first = sc_.fog_count > 0 ? fog_count() + 1 : 1;
    return first + f.index * k + cell;
}

// Brokers never fail; a group message always arrives.
void World::send_from_broker(FogRt& f, Msg type, ClusterId cell, double sent, Payload p) {
    topo_.check_link(NodeRef::controller(broker_of(f, cell)), NodeRef::controller(f.controller));
    p.type = static_cast<std::uint8_t>(type);
    p.fog = f.index;
    p.worker = kNone;
    p.sent = sent;
    ++out_.messages.sent;
    queue_.post(sent + delay(), EventKind::MessageArrival, p);
}

// A message leaves its sender at p.sent; it is lost if the sender failed
// before that instant.
bool World::sender_alive(const Payload& p) const {
    const auto& w = workers_[p.worker];
    if (w.epoch == p.epoch && w.st.connected()) return true;
    return w.failed_at > p.sent;
}

void World::post_resume(FogRt& f, double at) {
    if (f.resume_posted) return;
    f.resume_posted = true;
    Payload p;
    p.type = static_cast<std::uint8_t>(Timer::Resume);
    p.fog = f.index;
    queue_.post(at, EventKind::QuorumTimerFire, p);
}

// Occupies the worker from `start` for `dur` and draws whether this completion
// fails. Returns true when it does.
bool World::run_worker_task(WorkerRt& w, double start, double dur, bool post_check, const std::string& label) {
    w.st.t_avail = start + dur;
    // work queued behind a doomed completion never runs
    if (sc_.record_executions && w.fail_k == kNone)
        out_.executions.push_back({w.st.worker_id, run_, label, start, w.st.t_avail, dur});
    const std::uint32_t k = w.completions++;
    if (w.fail_k != kNone || sc_.sim.fail_probability <= 0.0) return false;
    const double u = rng_.uniform(Stream::Failure, static_cast<std::uint64_t>(run_), w.st.worker_id, k);
    if (!(u < sc_.sim.fail_probability)) return false;
    w.fail_k = k;
    w.fail_at = w.st.t_avail;
    if (post_check) {
        Payload p;
        p.worker = w.st.worker_id;
        p.epoch = w.epoch;
        p.index = k;
        queue_.post(w.fail_at, EventKind::FailureCheck, p);
    }
    return true;
}

void World::serve_requests(FogRt& f, const TaskSpec& task, std::size_t ti, bool blocking) {
    const double c0 = f.ctrl_t;
    std::vector<std::pair<double, WorkerId>> arrivals;
    for (WorkerId id : f.members) {
        auto& w = workers_[id];
        if (!w.st.connected()) continue;
        arrivals.emplace_back(std::max(w.st.t_avail, c0) + delay(), id);
    }
    std::sort(arrivals.begin(), arrivals.end());
    for (const auto& [a, id] : arrivals) {
        const double served = std::max(f.ctrl_t, a) + sample(task, static_cast<std::uint64_t>(run_), ti, id);
        f.ctrl_t = served;
        auto& w = workers_[id];
        w.st.t_avail = blocking ? served + delay() : std::max(w.st.t_avail, c0);
    }
}

void World::advance(FogRt& f) {
    f.ctrl_t = std::max(f.ctrl_t, now());
    const auto& order = *f.order;
    while (f.next < order.size()) {
        if (f.ctrl_t > now()) {
            post_resume(f, f.ctrl_t);
            return;
        }
        const TaskSpec& task = *order[f.next];
        const std::size_t ti = f.next++;
        switch (task.kind) {
            case TaskKind::ControllerToWorkerAsync:
            case TaskKind::LocalWorker: {
                const double ready = task.kind == TaskKind::LocalWorker ? f.ctrl_t : f.ctrl_t + delay();
                for (WorkerId id : f.members) {
                    auto& w = workers_[id];
                    if (!w.st.connected()) continue;
                    const double dur = sample(task, static_cast<std::uint64_t>(run_), ti, id);
                    run_worker_task(w, std::max(w.st.t_avail, ready), dur, true, task.id);
                }
                f.segment.push_back(&task);
                break;
            }
            case TaskKind::LocalController:
                f.ctrl_t += sample(task, static_cast<std::uint64_t>(run_), ti, 1ULL << 32);
                break;
            case TaskKind::WorkerToControllerSync:
                serve_requests(f, task, ti, true);
                break;
            case TaskKind::WorkerToControllerAsync:
                serve_requests(f, task, ti, false);
                break;
            case TaskKind::ControllerToWorkerSync:
                begin_sync(f, task, ti);
                return;
        }
    }
    finish_fog(f);
}

SyncTrace* World::open_trace(FogRt& f) {
    if (!sc_.record_sync_trace) return nullptr;
    auto& s = *f.sync;
    SyncTrace t;
    t.run = run_;
    t.group = static_cast<int>(f.index);
    t.task = s.task->id;
    t.attempt = s.attempt;
    t.call_time = s.call_time;
    t.delta = s.delta;
    t.scope = static_cast<std::int64_t>(s.scope.size());
    t.reporters = static_cast<std::int64_t>(s.preds.size());
    t.update_messages = static_cast<std::int64_t>(s.received_updates);
    t.local_delayed = s.local_delayed;
    s.trace_slot = out_.syncs.size();
    out_.syncs.push_back(std::move(t));
    return &out_.syncs.back();
}

void World::log_decision(FogRt& f, int available, int total, const QuorumResult& r) {
    auto& s = *f.sync;
    if (SyncTrace* t = open_trace(f)) {
        t->delta = now();
        t->passed = std::holds_alternative<Passed>(r);
        if (t->passed) t->start = std::get<Passed>(r).start_time;
    }
    if (!sc_.record_decisions) return;
    QuorumDecision d;
    d.t = now();
    d.sync_task = s.task->id;
    d.policy = std::string(policy_name(sc_.policy));
    d.attempt = s.attempt;
    d.available = available;
    d.total = total;
    d.result = result_label(r);
    d.replication = sc_.replication;
    d.run = run_;
    d.group = static_cast<int>(f.index);
    out_.decisions.push_back(std::move(d));
}

void World::begin_sync(FogRt& f, const TaskSpec& task, std::size_t ti) {
    SyncRt s;
    s.task = &task;
    s.task_index = ti;
    s.key = "g" + std::to_string(f.index) + ":" + task.id;
    s.state.sync_task = s.key;
    f.sync = std::move(s);
    std::visit(
        [&](const auto& pol) {
            using P = std::decay_t<decltype(pol)>;
            if constexpr (std::is_same_v<P, Barrier>) {
                start_barrier(f);
            } else if constexpr (std::is_same_v<P, TimeSlotted>) {
                auto& st = *f.sync;
                st.attempt = 1;
                st.round = next_round_++;
                st.call_time = now();
                const double slot = slot_time(f.segment_start, segment_stats(f.segment), pol.slot_multiplier);
                st.delta = std::max(slot, now());
                Payload p;
                p.fog = f.index;
                p.round = st.round;
                queue_.post(st.delta, EventKind::SlotBoundary, p);
            } else {
                start_attempt(f);
            }
        },
        sc_.policy);
}

void World::start_attempt(FogRt& f) {
    auto& s = *f.sync;
    ++s.attempt;
    s.round = next_round_++;
    s.call_time = now();
    s.scope.clear();
    s.scope_epoch.clear();
    s.scope_group.clear();
    s.preds.clear();
    s.local_delayed = 0;
    s.received_updates = 0;
    s.expected_updates = 0;

    const auto k = static_cast<std::size_t>(sc_.sim.cluster_count);
    std::vector<int> live_per_cell(k, 0);
    for (WorkerId id : f.members)
        if (workers_[id].st.connected()) ++live_per_cell[workers_[id].cell];

    // Cells become groups, each represented by its broker. Under the cluster
    // quorum only cells holding at least min_cluster_size live workers form;
    // the rest attach to the nearest formed cluster, or all live workers form
    // one cluster if none qualifies.
    int threshold = 0;
    if (const auto* cr = std::get_if<ComponentRedundant>(&sc_.policy)) threshold = cr->min_cluster_size;
    std::vector<std::uint32_t> group_of(k, kNone);
    s.group_count = 0;
    s.group_cell.clear();
    for (std::size_t c = 0; c < k; ++c) {
        if (live_per_cell[c] < threshold) continue;
        group_of[c] = static_cast<std::uint32_t>(s.group_count++);
        s.group_cell.push_back(static_cast<ClusterId>(c));
    }

    std::vector<Position> centre(s.group_count);
    if (threshold > 1) {
        std::vector<int> n(s.group_count, 0);
        for (WorkerId id : f.members) {
            const auto& w = workers_[id];
            const auto g = group_of[w.cell];
            if (!w.st.connected() || g == kNone) continue;
            centre[g].x += w.st.position->x;
            centre[g].y += w.st.position->y;
            ++n[g];
        }
        for (std::size_t g = 0; g < s.group_count; ++g) {
            centre[g].x /= n[g];
            centre[g].y /= n[g];
        }
    }
    auto group_for = [&](const WorkerRt& w) -> std::uint32_t {
        if (group_of[w.cell] != kNone) return group_of[w.cell];
        if (threshold <= 1) return kNone;
        if (s.group_count == 0) return 0;
        std::uint32_t best = 0;
        double best_d = kInf;
        for (std::uint32_t g = 0; g < s.group_count; ++g) {
            const double dx = w.st.position->x - centre[g].x, dy = w.st.position->y - centre[g].y;
            const double d = dx * dx + dy * dy;
            if (d < best_d) best_d = d, best = g;
        }
        return best;
    };

    for (WorkerId id : f.members) {
        const auto& w = workers_[id];
        if (!w.st.connected()) continue;
        const auto g = group_for(w);
        if (g == kNone) continue;
        s.scope.push_back(id);
        s.scope_epoch.push_back(w.epoch);
        s.scope_group.push_back(g);
    }
    if (s.group_count == 0 && !s.scope.empty()) {
        s.group_count = 1;
        s.group_cell.push_back(workers_[s.scope.front()].cell);
    }
    s.reported.assign(s.scope.size(), 0);
    s.group_reporters.assign(s.group_count, 0);
    s.group_max.assign(s.group_count, -kInf);

    if (s.scope.empty()) {
        s.delta = now();
        s.state.delta = now();
        QuorumResult r = Failed{std::holds_alternative<ComponentRedundant>(sc_.policy)
                                    ? FailureReason::ClusterUnderfull
                                    : FailureReason::RetriesExhausted};
        log_decision(f, 0, 0, r);
        finish_sync(f, SyncOutcome::QuorumFailure, now());
        return;
    }
    s.pending_calls = s.scope.size();
    for (std::size_t i = 0; i < s.scope.size(); ++i) {
        Payload p;
        p.round = s.round;
        p.epoch = s.scope_epoch[i];
        p.index = static_cast<std::uint32_t>(i);
        send_to_worker(f, Msg::SyncCall, s.scope[i], now() + delay(), p);
    }
}

void World::calls_resolved(FogRt& f) {
    auto& s = *f.sync;
    if (sc_.update_scheme == UpdateScheme::PublishSubscribe) {
        for (std::size_t g = 0; g < s.group_count; ++g) {
            Payload p;
            p.round = s.round;
            p.index = static_cast<std::uint32_t>(g);
            send_from_broker(f, Msg::GroupUpdate, s.group_cell[g], now(), p);
            ++s.expected_updates;
        }
    }
    if (s.expected_updates == 0) {
        s.delta = now();
        s.state.delta = now();
        Payload p;
        p.type = static_cast<std::uint8_t>(Timer::QuorumCheck);
        p.fog = f.index;
        p.round = s.round;
        queue_.post(now(), EventKind::QuorumTimerFire, p);
    }
}

void World::on_update(FogRt& f, bool processed) {
    auto& s = *f.sync;
    if (processed) {
        f.ctrl_t = std::max(f.ctrl_t, now()) + cost();
        collector_->add_update_messages(1);
        ++s.received_updates;
    }
    if (s.received_updates < s.expected_updates) return;
    if (s.preds.empty() || s.received_updates == 0) {
        s.delta = std::max(f.ctrl_t, now());
        s.state.delta = s.delta;
        Payload t;
        t.type = static_cast<std::uint8_t>(Timer::QuorumCheck);
        t.fog = f.index;
        t.round = s.round;
        queue_.post(s.delta, EventKind::QuorumTimerFire, t);
        return;
    }
    const double t_proc = f.ctrl_t;
    s.delta = std::max(compute_quorum_check_time(s.preds, cost(), delay()), t_proc);
    s.state.delta = s.delta;
    for (std::size_t i = 0; i < s.scope.size(); ++i) {
        if (!s.reported[i]) continue;
        Payload q;
        q.round = s.round;
        q.epoch = s.scope_epoch[i];
        q.index = static_cast<std::uint32_t>(i);
        send_to_worker(f, Msg::QuorumTime, s.scope[i], t_proc + delay(), q);
    }
    Payload t;
    t.type = static_cast<std::uint8_t>(Timer::QuorumCheck);
    t.fog = f.index;
    t.round = s.round;
    queue_.post(s.delta, EventKind::QuorumTimerFire, t);
}

void World::quorum_check(FogRt& f) {
    auto& s = *f.sync;
    std::vector<std::pair<WorkerId, std::uint32_t>> ready;
    std::vector<int> per_group(s.group_count, 0);
    for (std::size_t i = 0; i < s.scope.size(); ++i) {
        const auto& w = workers_[s.scope[i]];
        if (!s.reported[i] || !w.st.connected() || w.epoch != s.scope_epoch[i]) continue;
        if (w.st.t_avail > s.delta) continue;
        ready.emplace_back(s.scope[i], s.scope_group[i]);
        ++per_group[s.scope_group[i]];
    }

    QuorumResult r;
    int available = static_cast<int>(ready.size());
    int total = static_cast<int>(s.scope.size());
    if (const auto* cr = std::get_if<ComponentRedundant>(&sc_.policy)) {
        r = cluster_quorum_check(per_group, cr->required_per_cluster, s.delta, delay());
        available = static_cast<int>(std::count_if(per_group.begin(), per_group.end(),
                                                   [&](int n) { return n >= cr->required_per_cluster; }));
        total = static_cast<int>(s.group_count);
    } else {
        r = ratio_quorum_check(s.state, ready.size(), s.scope.size(), std::get<TimeRedundant>(sc_.policy),
                               delay());
    }
    log_decision(f, available, total, r);

    if (const auto* ok = std::get_if<Passed>(&r)) {
        start_sync_task(f, ok->start_time, ready);
    } else if (const auto* again = std::get_if<Retry>(&r)) {
        Payload p;
        p.type = static_cast<std::uint8_t>(Timer::RetryCall);
        p.fog = f.index;
        p.round = s.round;
        queue_.post(again->next_attempt, EventKind::QuorumTimerFire, p);
    } else {
        s.state.outcome = Aborted{std::get<Failed>(r).reason};
        finish_sync(f, SyncOutcome::QuorumFailure, now());
    }
}

void World::start_barrier(FogRt& f) {
    auto& s = *f.sync;
    s.attempt = 1;
    s.round = next_round_++;
    s.call_time = now();
    const auto k = static_cast<std::size_t>(sc_.sim.cluster_count);
    std::vector<std::uint32_t> group_of(k, kNone);
    for (WorkerId id : f.members) {
        const auto& w = workers_[id];
        if (!w.st.connected()) continue;
        if (group_of[w.cell] == kNone) {
            group_of[w.cell] = static_cast<std::uint32_t>(s.group_count++);
            s.group_cell.push_back(w.cell);
        }
        s.scope.push_back(id);
        s.scope_epoch.push_back(w.epoch);
        s.scope_group.push_back(group_of[w.cell]);
    }
    s.reported.assign(s.scope.size(), 0);
    s.group_expected.assign(s.group_count, 0);
    s.group_reporters.assign(s.group_count, 0);
    for (auto g : s.scope_group) ++s.group_expected[g];

    if (s.scope.empty()) {
        QuorumResult r = Failed{FailureReason::BarrierTimeout};
        log_decision(f, 0, 0, r);
        finish_sync(f, SyncOutcome::QuorumFailure, now());
        return;
    }
    const bool pubsub = sc_.update_scheme == UpdateScheme::PublishSubscribe;
    if (pubsub) {
        // brokers of empty cells have nobody to wait for and report at once
        for (std::size_t c = 0; c < k; ++c) {
            if (group_of[c] != kNone) continue;
            Payload q;
            q.round = s.round;
            q.index = static_cast<std::uint32_t>(s.group_count++);
            s.group_cell.push_back(static_cast<ClusterId>(c));
            s.group_expected.push_back(0);
            s.group_reporters.push_back(0);
            send_from_broker(f, Msg::BarrierGroup, static_cast<ClusterId>(c), now() + delay(), q);
        }
    }
    s.expected_updates = pubsub ? s.group_count : s.scope.size();
    s.processed.clear();

    const auto& pol = std::get<Barrier>(sc_.policy);
    const double timeout = pol.timeout_s.value_or(10.0 * std::max(segment_stats(f.segment).mean, 1.0));
    Payload t;
    t.type = static_cast<std::uint8_t>(Timer::BarrierTimeout);
    t.fog = f.index;
    t.round = s.round;
    queue_.post(now() + timeout, EventKind::QuorumTimerFire, t);

    for (std::size_t i = 0; i < s.scope.size(); ++i) {
        Payload p;
        p.round = s.round;
        p.epoch = s.scope_epoch[i];
        p.index = static_cast<std::uint32_t>(i);
        send_to_worker(f, Msg::BarrierCall, s.scope[i], now() + delay(), p);
    }
}

void World::on_barrier_update(FogRt& f, const Payload& p) {
    auto& s = *f.sync;
    (void)p;
    f.ctrl_t = std::max(f.ctrl_t, now()) + cost();
    collector_->add_update_messages(1);
    s.processed.emplace_back(f.ctrl_t);
    ++s.received_updates;
    if (s.received_updates < s.expected_updates) return;
    // every scope member has arrived
    s.delta = f.ctrl_t;
    const QuorumResult r = barrier_sync(s.processed, delay());
    std::vector<std::pair<WorkerId, std::uint32_t>> who;
    for (std::size_t i = 0; i < s.scope.size(); ++i) {
        const auto& w = workers_[s.scope[i]];
        if (w.st.connected() && w.epoch == s.scope_epoch[i]) who.emplace_back(s.scope[i], s.scope_group[i]);
    }
    log_decision(f, static_cast<int>(s.scope.size()), static_cast<int>(s.scope.size()), r);
    start_sync_task(f, std::get<Passed>(r).start_time, who);
}

void World::slot_boundary(FogRt& f) {
    auto& s = *f.sync;
    const auto& pol = std::get<TimeSlotted>(sc_.policy);
    std::vector<std::pair<WorkerId, std::uint32_t>> ready;
    for (const auto& [id, epoch] : f.segment_scope) {
        const auto& w = workers_[id];
        if (w.st.connected() && w.epoch == epoch && w.st.t_avail <= s.delta) ready.emplace_back(id, 0);
    }
    s.group_count = 1;
    const QuorumResult r = time_slotted_sync(ready.size(), f.segment_scope.size(), pol, s.delta);
    log_decision(f, static_cast<int>(ready.size()), static_cast<int>(f.segment_scope.size()), r);
    if (const auto* ok = std::get_if<Passed>(&r)) {
        start_sync_task(f, ok->start_time, ready);
    } else {
        s.state.outcome = Aborted{std::get<Failed>(r).reason};
        finish_sync(f, SyncOutcome::QuorumFailure, now());
    }
}

void World::start_sync_task(FogRt& f, double start, const std::vector<std::pair<WorkerId, std::uint32_t>>& who) {
    auto& s = *f.sync;
    s.running = true;
    s.start_time = start;
    s.state.outcome = Scheduled{start};
    s.state.committed.clear();
    s.results_per_group.assign(std::max<std::size_t>(s.group_count, 1), 0);
    s.pending_results = who.size();
    SyncTrace* trace = s.trace_slot != kNone ? &out_.syncs[s.trace_slot] : nullptr;
    for (const auto& [id, group] : who) {
        auto& w = workers_[id];
        const double begin = std::max(w.st.t_avail, start);
        const double dur = sample(*s.task, static_cast<std::uint64_t>(run_), s.task_index, id);
        const std::uint32_t k = w.completions;
        const bool fails = run_worker_task(w, begin, dur, false, s.task->id);
        s.state.committed.push_back(id);
        if (trace) {
            trace->workers.push_back(id);
            trace->worker_starts.push_back(begin);
        }
        Payload p;
        p.fog = f.index;
        p.round = s.round;
        p.worker = id;
        p.epoch = w.epoch;
        p.index = k;
        p.aux = group;
        p.type = fails ? 1 : 0;
        queue_.post(w.st.t_avail, EventKind::TaskComplete, p);
    }
    if (who.empty()) result_resolved(f);
}

void World::result_resolved(FogRt& f) {
    auto& s = *f.sync;
    if (s.pending_results > 0 && --s.pending_results > 0) return;
    std::optional<Failed> missing;
    if (std::holds_alternative<ComponentRedundant>(sc_.policy)) {
        missing = complete_component_sync(s.results_per_group);
    } else {
        const int total = std::accumulate(s.results_per_group.begin(), s.results_per_group.end(), 0);
        const int one[] = {total};
        missing = complete_component_sync(one);
    }
    if (missing) s.state.outcome = Aborted{missing->reason};
    finish_sync(f, missing ? SyncOutcome::IncompleteFailure : SyncOutcome::Success, s.start_time);
}

void World::finish_sync(FogRt& f, SyncOutcome outcome, double start_time) {
    auto& s = *f.sync;
    collector_->record_sync_outcome(s.key, outcome, start_time, s.attempt - 1);
    f.sync.reset();
    f.ctrl_t = std::max(f.ctrl_t, now());
    reset_segment(f);
    advance(f);
}

void World::on_message(const Payload& p) {
    FogRt& f = fogs_[p.fog];
    const auto type = static_cast<Msg>(p.type);
    if (type == Msg::BarrierPublish) {
        // broker bookkeeping only; the group message is the network hop
        if (!f.sync || f.sync->round != p.round || !sender_alive(p)) return;
        auto& s = *f.sync;
        const auto g = s.scope_group[p.index];
        if (++s.group_reporters[g] == s.group_expected[g]) {
            Payload q;
            q.round = p.round;
            q.index = g;
            send_from_broker(f, Msg::BarrierGroup, s.group_cell[g], now(), q);
        }
        return;
    }

    const bool stale = !f.sync || f.sync->round != p.round;
    if (type == Msg::GroupUpdate || type == Msg::BarrierGroup) {
        ++out_.messages.delivered;
        if (stale) return;
        if (type == Msg::GroupUpdate) on_update(f, true);
        else if (!f.sync->running) on_barrier_update(f, p);
        return;
    }
    auto& w = workers_[p.worker];
    switch (type) {
        case Msg::SyncCall:
        case Msg::QuorumTime:
        case Msg::BarrierCall: {
            const bool reachable = w.st.connected() && w.epoch == p.epoch;
            if (!reachable) {
                ++out_.messages.dropped;
                if (type == Msg::SyncCall && !stale && --f.sync->pending_calls == 0) calls_resolved(f);
                return;
            }
            ++out_.messages.delivered;
            if (stale) return;
            auto& s = *f.sync;
            if (type == Msg::SyncCall) {
                const double from = std::max(w.st.t_avail, now());
                const double remaining = from - now();
                const double u = rng_.uniform(Stream::Prediction, static_cast<std::uint64_t>(run_),
                                              (static_cast<std::uint64_t>(s.task_index) << 16) |
                                                  static_cast<std::uint64_t>(s.attempt),
                                              p.worker);
                w.predicted = from + (predicted_finish(remaining, sc_.sim.prediction_accuracy, u) - remaining);
                s.reported[p.index] = 1;
                s.preds.push_back(w.predicted);
                const auto g = s.scope_group[p.index];
                if (sc_.update_scheme == UpdateScheme::AllWorker) {
                    Payload q;
                    q.round = p.round;
                    q.index = p.index;
                    send_to_controller(f, Msg::StatusUpdate, p.worker, now(), q);
                    ++s.expected_updates;
                } else {
                    ++s.group_reporters[g];
                    s.group_max[g] = std::max(s.group_max[g], w.predicted);
                }
                if (--s.pending_calls == 0) calls_resolved(f);
            } else if (type == Msg::QuorumTime) {
                if (w.st.local_queue.empty()) return;
                const double before = std::max(w.st.t_avail, now());
                const auto plan = local_schedule(std::max(w.predicted, now()), w.st.local_queue, s.delta);
                double t = before;
                for (const auto& task : plan.scheduled) {
                    run_worker_task(w, t, task.base_duration, true, task.id);
                    t = w.st.t_avail;
                }
                if (before <= s.delta && w.st.t_avail > s.delta) ++s.local_delayed;
            } else {
                const double arrive = std::max(w.st.t_avail, now());
                Payload q;
                q.round = p.round;
                q.index = p.index;
                if (sc_.update_scheme == UpdateScheme::AllWorker) {
                    send_to_controller(f, Msg::BarrierUpdate, p.worker, arrive, q);
                } else {
                    q.type = static_cast<std::uint8_t>(Msg::BarrierPublish);
                    q.fog = f.index;
                    q.worker = p.worker;
                    q.epoch = w.epoch;
                    q.sent = arrive;
                    queue_.post(arrive, EventKind::MessageArrival, q);
                }
            }
            return;
        }
        case Msg::StatusUpdate:
        case Msg::GroupUpdate:
        case Msg::BarrierUpdate:
        case Msg::BarrierGroup:
        case Msg::Result: {
            if (!sender_alive(p)) {
                ++out_.messages.dropped;
                if (type == Msg::Result && !stale) {
                    result_resolved(f);
                } else if (!stale && type == Msg::StatusUpdate) {
                    --f.sync->expected_updates;
                    on_update(f, false);
                }
                return;
            }
            ++out_.messages.delivered;
            if (stale) return;
            if (type == Msg::Result) {
                ++f.sync->results_per_group[p.aux];
                result_resolved(f);
            } else if (type == Msg::StatusUpdate) {
                on_update(f, true);
            } else if (!f.sync->running) {
                on_barrier_update(f, p);
            }
            return;
        }
        case Msg::BarrierPublish:
            return;
    }
}

void World::on_timer(const Payload& p) {
    FogRt& f = fogs_[p.fog];
    const auto type = static_cast<Timer>(p.type);
    if (type == Timer::Resume) {
        f.resume_posted = false;
        if (!f.sync && !f.done) advance(f);
        return;
    }
    if (!f.sync || f.sync->round != p.round) return;
    switch (type) {
        case Timer::QuorumCheck:
            quorum_check(f);
            break;
        case Timer::RetryCall:
            f.ctrl_t = std::max(f.ctrl_t, now());
            start_attempt(f);
            break;
        case Timer::BarrierTimeout:
            if (f.sync->running) break;
            {
                const QuorumResult r = Failed{FailureReason::BarrierTimeout};
                f.sync->state.outcome = Aborted{FailureReason::BarrierTimeout};
                log_decision(f, static_cast<int>(f.sync->received_updates),
                             static_cast<int>(f.sync->expected_updates), r);
                finish_sync(f, SyncOutcome::QuorumFailure, now());
            }
            break;
        case Timer::Resume:
            break;
    }
}

void World::dispatch(const Queue::Event& ev) {
    switch (ev.kind) {
        case EventKind::MessageArrival:
            on_message(ev.payload);
            break;
        case EventKind::QuorumTimerFire:
            on_timer(ev.payload);
            break;
        case EventKind::SlotBoundary: {
            FogRt& f = fogs_[ev.payload.fog];
            if (f.sync && f.sync->round == ev.payload.round) slot_boundary(f);
            break;
        }
        case EventKind::FailureCheck: {
            auto& w = workers_[ev.payload.worker];
            if (w.epoch != ev.payload.epoch || w.fail_k != ev.payload.index) break;
            const double u = rng_.uniform(Stream::Failure, static_cast<std::uint64_t>(run_), w.st.worker_id,
                                          ev.payload.index);
            if (apply_failure_process(w.st, sc_.sim.fail_probability, u)) {
                ++w.epoch;
                w.failed_at = now();
            }
            break;
        }
        case EventKind::TaskComplete: {
            const Payload& p = ev.payload;
            FogRt& f = fogs_[p.fog];
            auto& w = workers_[p.worker];
            const bool current = f.sync && f.sync->round == p.round;
            if (w.epoch != p.epoch || !w.st.connected()) {
                if (current) result_resolved(f);
                break;
            }
            if (p.type == 1) {
                const double u = rng_.uniform(Stream::Failure, static_cast<std::uint64_t>(run_), w.st.worker_id,
                                              p.index);
                if (apply_failure_process(w.st, sc_.sim.fail_probability, u)) {
                    ++w.epoch;
                    w.failed_at = now();
                    // the result dies with the worker
                    if (current) result_resolved(f);
                    break;
                }
            }
            if (!current) break;
            Payload q;
            q.round = p.round;
            q.aux = p.aux;
            send_to_controller(f, Msg::Result, p.worker, now(), q);
            break;
        }
        case EventKind::MobilitySample: {
            for (auto& w : workers_) {
                if (!w.walker) continue;
                w.walker->advance(sc_.mobility.interval_s);
                w.st.position = w.walker->position();
            }
            if (sc_.clustering == ClusteringMode::Grid) recompute_cells();
            queue_.post(now() + sc_.mobility.interval_s, EventKind::MobilitySample, Payload{});
            break;
        }
        case EventKind::JoinCheck:
            end_run();
            if (++run_ >= sc_.runs) {
                stopped_ = true;
                break;
            }
            start_run(now());
            break;
    }
}

ReplicationResult World::run() {
    if (sc_.mobility.mode == MobilityMode::RandomWaypoint)
        queue_.post(sc_.mobility.interval_s, EventKind::MobilitySample, Payload{});
    start_run(0.0);
    double last = 0.0;
    while (!stopped_ && !queue_.empty()) {
        if (queue_.dispatched() >= sc_.max_events)
            throw LivelockGuard("event budget of " + std::to_string(sc_.max_events) + " exhausted at t=" +
                                std::to_string(now()));
        const auto ev = queue_.pop();
        if (ev.timestamp < last) out_.clock_monotone = false;
        last = ev.timestamp;
        dispatch(ev);
    }
    if (!stopped_) throw SimulationError("event queue drained before the last run finished");
    const double stop_time = now();
    while (!queue_.empty()) {
        const auto ev = queue_.pop();
        if (ev.kind == EventKind::MessageArrival && static_cast<Msg>(ev.payload.type) != Msg::BarrierPublish)
            ++out_.messages.in_flight;
    }
    out_.topology_is_tree = topo_.is_tree();
    out_.events = queue_.dispatched() - out_.messages.in_flight;
    out_.final_time = stop_time;
    out_.final_workers = workers_.size();
    return std::move(out_);
}

}  // namespace

void validate(const Scenario& sc) {
    validate(sc.sim);
    validate(sc.policy);
    if (sc.graphs.empty()) throw ValidationError("graphs", "at least one task graph is required");
    for (const auto& g : sc.graphs)
        if (auto err = validate_task_graph(g)) throw ValidationError("graphs", describe(*err));
    if (sc.runs < 1) throw ValidationError("runs_per_replication", "must be positive");
    if (sc.fog_count < 0) throw ValidationError("fog_count", "must be non-negative");
    if (sc.local_queue.depth < 0) throw ValidationError("local_queue.depth", "must be non-negative");
    if (!(sc.local_queue.mean_s > 0.0)) throw ValidationError("local_queue.mean_s", "must be positive");
    if (!(sc.local_queue.stddev_s >= 0.0)) throw ValidationError("local_queue.stddev_s", "must be non-negative");
    if (!(sc.mobility.interval_s > 0.0)) throw ValidationError("mobility.interval_s", "must be positive");
    if (!(sc.mobility.speed_mps >= 0.0)) throw ValidationError("mobility.speed_mps", "must be non-negative");
    if (!(sc.mobility.box_m > 0.0)) throw ValidationError("mobility.box_m", "must be positive");
    if (sc.max_events == 0) throw ValidationError("max_events", "must be positive");
}

ReplicationResult run_until_idle(const Scenario& scenario) {
    validate(scenario);
    World world(scenario);
    return world.run();
}

}  // namespace syncsim
