#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "syncsim/quorum.hpp"

using namespace syncsim;
using testing::task;

namespace {

std::vector<WorkerState> workers(int n, int failed = 0) {
    std::vector<WorkerState> ws(n);
    for (int i = 0; i < n; ++i) {
        ws[i].worker_id = static_cast<WorkerId>(i);
        if (i < failed) ws[i].liveness = Liveness::Failed;
    }
    return ws;
}

double start_of(const QuorumResult& r) {
    REQUIRE(std::holds_alternative<Passed>(r));
    return std::get<Passed>(r).start_time;
}

FailureReason reason_of(const QuorumResult& r) {
    REQUIRE(std::holds_alternative<Failed>(r));
    return std::get<Failed>(r).reason;
}

}  // namespace

TEST_CASE("sync_call addresses every connected worker") {
    std::vector<WorkerId> targets;
    auto st = sync_call("s", workers(10), targets);
    CHECK(targets.size() == 10);
    CHECK(st.committed.empty());
    CHECK(std::holds_alternative<Pending>(st.outcome));

    sync_call("s", workers(10, 3), targets);
    CHECK(targets.size() == 7);

    sync_call("s", workers(0), targets);
    CHECK(targets.empty());
}

TEST_CASE("sync_call with nobody connected fails the quorum in the engine") {
    auto g = testing::chain("g", {task("a", TaskKind::ControllerToWorkerAsync, 10.0),
                                  task("b", TaskKind::LocalController, 50.0),
                                  task("s", TaskKind::ControllerToWorkerSync, 1.0)});
    auto sc = testing::quiet_scenario(4, 2, {g});
    sc.sim.fail_probability = 1.0;  // all four die at t = 10.2, before the call at 50
    auto res = run_until_idle(sc);
    REQUIRE(res.decisions.size() == 1);
    CHECK(res.decisions[0].total == 0);
    CHECK(res.decisions[0].result.rfind("failed:", 0) == 0);
    CHECK(res.records[0].failed_sync_quorum == 1);
}

TEST_CASE("push_status_update routing") {
    WorkerState w;
    CHECK(push_status_update(w, UpdateScheme::AllWorker).to_controller);
    CHECK_THROWS_AS(push_status_update(w, UpdateScheme::PublishSubscribe), NoCluster);
    w.cluster_id = 3;
    auto r = push_status_update(w, UpdateScheme::PublishSubscribe);
    CHECK_FALSE(r.to_controller);
    CHECK(r.cluster == 3);
}

TEST_CASE("controller update messages: one per worker or one per cluster") {
    auto ws = workers(4000);
    for (auto& w : ws) w.cluster_id = w.worker_id % 40;
    CHECK(controller_update_messages(ws, UpdateScheme::AllWorker) == 4000);
    CHECK(controller_update_messages(ws, UpdateScheme::PublishSubscribe) == 40);
}

TEST_CASE("compute_quorum_check_time") {
    std::vector<double> preds{10.0, 12.0, 15.0};
    CHECK(compute_quorum_check_time(preds, 1.0, 0.2) == doctest::Approx(16.2).epsilon(1e-12));
    std::vector<double> one{5.0};
    CHECK(compute_quorum_check_time(one, 0.0, 0.0) == 5.0);
    std::vector<double> none;
    CHECK_THROWS_AS(compute_quorum_check_time(none, 1.0, 0.2), NoUpdates);
}

TEST_CASE("local_schedule examples") {
    SUBCASE("fits") {
        std::vector<TaskSpec> q{task("l", TaskKind::LocalWorker, 5)};
        auto r = local_schedule(10.0, q, 20.0);
        CHECK(r.scheduled.size() == 1);
        CHECK(r.t_avail == 15.0);
        CHECK(q.empty());
    }
    SUBCASE("too long") {
        std::vector<TaskSpec> q{task("l", TaskKind::LocalWorker, 11)};
        auto r = local_schedule(10.0, q, 20.0);
        CHECK(r.scheduled.empty());
        CHECK(r.t_avail == 10.0);
        CHECK(q.size() == 1);
    }
    SUBCASE("boundary equality") {
        std::vector<TaskSpec> q{task("a", TaskKind::LocalWorker, 8), task("b", TaskKind::LocalWorker, 2)};
        auto r = local_schedule(10.0, q, 20.0);
        CHECK(r.scheduled.size() == 2);
        CHECK(r.t_avail == 20.0);
    }
    SUBCASE("skip and keep scanning") {
        std::vector<TaskSpec> q{task("a", TaskKind::LocalWorker, 12), task("b", TaskKind::LocalWorker, 3)};
        auto r = local_schedule(10.0, q, 20.0);
        REQUIRE(r.scheduled.size() == 1);
        CHECK(r.scheduled[0].id == "b");
        CHECK(r.t_avail == 13.0);
        REQUIRE(q.size() == 1);
        CHECK(q[0].id == "a");
    }
    SUBCASE("worker overload updates t_avail") {
        WorkerState w;
        w.t_avail = 4.0;
        w.local_queue = {task("a", TaskKind::LocalWorker, 6)};
        local_schedule(w, 10.0);
        CHECK(w.t_avail == 10.0);
        CHECK(w.local_queue.empty());
    }
}

TEST_CASE("ratio_quorum_check") {
    TimeRedundant pol{0.7, 20.0, 2};
    SyncPointState st;
    st.delta = 100.0;

    CHECK(start_of(ratio_quorum_check(st, 7, 10, pol, 0.2)) == doctest::Approx(100.2));
    CHECK(st.retries_used == 0);

    auto r = ratio_quorum_check(st, 6, 10, pol, 0.2);
    REQUIRE(std::holds_alternative<Retry>(r));
    CHECK(std::get<Retry>(r).next_attempt == 120.0);
    CHECK(st.retries_used == 1);

    st.retries_used = 2;
    CHECK(reason_of(ratio_quorum_check(st, 6, 10, pol, 0.2)) == FailureReason::RetriesExhausted);

    // ratios that are not exact in binary still meet the inclusive bound
    SyncPointState st2;
    CHECK(std::holds_alternative<Passed>(ratio_quorum_check(st2, 21, 30, pol, 0.2)));
    CHECK(std::holds_alternative<Retry>(ratio_quorum_check(st2, 20, 30, pol, 0.2)));
}

TEST_CASE("cluster_quorum_check") {
    std::vector<int> ok{3, 4, 5}, short_one{3, 2, 5}, ones{1, 1, 2}, none;
    CHECK(std::holds_alternative<Passed>(cluster_quorum_check(ok, 3, 50.0, 0.2)));
    CHECK(start_of(cluster_quorum_check(ok, 3, 50.0, 0.2)) == doctest::Approx(50.2));
    CHECK(reason_of(cluster_quorum_check(short_one, 3, 50.0, 0.2)) == FailureReason::ClusterUnderfull);
    CHECK(std::holds_alternative<Passed>(cluster_quorum_check(ones, 1, 50.0, 0.2)));
    CHECK(reason_of(cluster_quorum_check(none, 1, 50.0, 0.2)) == FailureReason::ClusterUnderfull);
}

TEST_CASE("complete_component_sync") {
    std::vector<int> all{1, 2, 3}, one_empty{2, 0, 1};
    CHECK_FALSE(complete_component_sync(all).has_value());
    auto f = complete_component_sync(one_empty);
    REQUIRE(f.has_value());
    CHECK(f->reason == FailureReason::IncompleteResults);
}

TEST_CASE("component redundancy without failures always completes") {
    auto g = testing::chain("g", {task("a", TaskKind::ControllerToWorkerAsync, 10.0, 2.0),
                                  task("s", TaskKind::ControllerToWorkerSync, 5.0, 1.0),
                                  task("b", TaskKind::ControllerToWorkerAsync, 10.0, 2.0),
                                  task("t", TaskKind::ControllerToWorkerSync, 5.0, 1.0)});
    auto sc = testing::quiet_scenario(12, 3, {g}, 10);
    sc.policy = ComponentRedundant{3, 1};
    auto res = run_until_idle(sc);
    for (const auto& rec : res.records) {
        CHECK(rec.failed_sync_incomplete == 0);
        CHECK(rec.failed_sync_quorum == 0);
        CHECK(rec.sync_successes == rec.sync_points);
    }
}

TEST_CASE("barrier_sync") {
    std::vector<std::optional<double>> arr{10.0, 14.0, 30.0};
    CHECK(start_of(barrier_sync(arr, 0.2)) == doctest::Approx(30.2));
    std::vector<std::optional<double>> one{7.0};
    CHECK(start_of(barrier_sync(one, 0.2)) == doctest::Approx(7.2));
    std::vector<std::optional<double>> missing{10.0, std::nullopt};
    CHECK(reason_of(barrier_sync(missing, 0.2)) == FailureReason::BarrierTimeout);
}

TEST_CASE("barrier timeout through the engine") {
    auto g = testing::chain("g", {task("a", TaskKind::ControllerToWorkerAsync, 20.0),
                                  task("s", TaskKind::ControllerToWorkerSync, 5.0)});
    auto sc = testing::quiet_scenario(3, 1, {g});
    sc.sim.fail_probability = 1.0;  // every worker dies when `a` completes
    sc.policy = Barrier{300.0};
    auto res = run_until_idle(sc);
    REQUIRE(res.decisions.size() == 1);
    CHECK(res.decisions[0].t == 300.0);
    CHECK(res.decisions[0].result == "failed:barrier_timeout");
    CHECK(res.records[0].failed_sync_quorum == 1);
}

TEST_CASE("slot_time") {
    CHECK(slot_time(0.0, {100.0, 20.0}, 1.5) == 130.0);
    CHECK(slot_time(40.0, {100.0, 0.0}, 1.5) == 140.0);
    const TaskSpec a = task("a", TaskKind::LocalWorker, 30.0, 3.0);
    const TaskSpec b = task("b", TaskKind::LocalWorker, 40.0, 4.0);
    std::vector<const TaskSpec*> seg{&a, &b};
    auto s = segment_stats(seg);
    CHECK(s.mean == 70.0);
    CHECK(s.stddev == doctest::Approx(5.0));
}

TEST_CASE("time_slotted_sync: no retry arm") {
    TimeSlotted pol{1.5, 0.7};
    CHECK(start_of(time_slotted_sync(7, 10, pol, 130.0)) == 130.0);
    CHECK(reason_of(time_slotted_sync(6, 10, pol, 130.0)) == FailureReason::SlotMissed);
}

TEST_CASE("time slot with zero spread: identical workers all make it") {
    auto g = testing::chain("g", {task("a", TaskKind::ControllerToWorkerAsync, 10.0),
                                  task("s", TaskKind::ControllerToWorkerSync, 5.0)});
    auto sc = testing::quiet_scenario(5, 1, {g});
    sc.sim.controller_worker_delay = 0.0;
    sc.policy = TimeSlotted{1.5, 0.7};
    sc.record_sync_trace = true;
    auto res = run_until_idle(sc);
    REQUIRE(res.syncs.size() == 1);
    CHECK(res.syncs[0].passed);
    CHECK(res.syncs[0].start == 10.0);
    CHECK(res.syncs[0].workers.size() == 5);
}

TEST_CASE("time slot: one-sided on-time probability at 1.5 sigma") {
    const double mu = 100.0, sigma = 20.0;
    const double slot = slot_time(0.0, {mu, sigma}, 1.5);
    const TaskSpec t = task("a", TaskKind::LocalWorker, mu, sigma);
    SplitMix64 rng(31337);
    int on_time = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (sample_duration(t, rng) <= slot) ++on_time;
    const double phi = 0.5 * std::erfc(-1.5 / std::sqrt(2.0));
    CHECK(phi == doctest::Approx(0.9332).epsilon(1e-3));
    CHECK(std::abs(static_cast<double>(on_time) / n - phi) <= 0.01);
}
