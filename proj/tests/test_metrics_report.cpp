#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "support.hpp"
#include "syncsim/metrics.hpp"
#include "syncsim/trace.hpp"

using namespace syncsim;

namespace {

MetricsRecord random_record(testing::Gen& g, int rep, int run) {
    MetricsRecord m;
    m.replication = rep;
    m.run_index = run;
    m.sync_points = g.integer(0, 8);
    m.failed_sync_quorum = g.integer(0, static_cast<int>(m.sync_points));
    m.failed_sync_incomplete = g.integer(0, static_cast<int>(m.sync_points - m.failed_sync_quorum));
    m.sync_successes = m.sync_points - m.failed_sync_quorum - m.failed_sync_incomplete;
    m.extra_quorum_attempts = g.integer(0, 4);
    m.controller_update_messages = g.integer(0, 500);
    m.runtime_s = g.uniform(10, 5000);
    double t = run * 10000.0;
    for (int i = 0; i < m.sync_successes; ++i) m.sync_times.push_back(t += g.uniform(0, 30));
    return m;
}

}  // namespace

TEST_CASE("record_sync_outcome") {
    MetricsCollector c(0, 0);
    c.record_sync_outcome("s1", SyncOutcome::Success, 12.0, 0);
    CHECK(c.record().sync_successes == 1);
    CHECK(c.record().sync_times == std::vector<double>{12.0});

    c.record_sync_outcome("s2", SyncOutcome::QuorumFailure, 0.0, 3);
    CHECK(c.record().failed_sync_quorum == 1);
    CHECK(c.record().extra_quorum_attempts == 3);

    CHECK_THROWS_AS(c.record_sync_outcome("s1", SyncOutcome::Success, 1.0, 0), DuplicateRecord);
    CHECK(c.record().sync_points == 2);
}

TEST_CASE("aggregate: runtime per sync point") {
    std::vector<MetricsRecord> recs;
    for (int i = 0; i < 200; ++i) {
        MetricsRecord m;
        m.run_index = i;
        m.runtime_s = 5000.0;  // 200 runs, 1e6 s in total
        m.sync_points = 5;
        m.sync_successes = 5;
        recs.push_back(m);
    }
    auto r = aggregate(recs, {});
    CHECK(r.total_runtime_s == 1e6);
    CHECK(r.runtime_per_sync_mean == 1000.0);
    CHECK(r.pct_fail_quorum == 0.0);
    CHECK(r.pct_fail_incomplete == 0.0);
}

TEST_CASE("aggregate: failure percentages and empty input") {
    MetricsRecord m;
    m.sync_points = 8;
    m.failed_sync_quorum = 2;
    m.failed_sync_incomplete = 1;
    m.sync_successes = 5;
    std::vector<MetricsRecord> recs{m};
    auto r = aggregate(recs, {});
    CHECK(r.pct_fail_quorum == 25.0);
    CHECK(r.pct_fail_incomplete == 12.5);
    std::vector<MetricsRecord> none;
    CHECK_THROWS_AS(aggregate(none, {}), EmptyInput);
}

TEST_CASE("max_syncs_per_window") {
    std::vector<double> t{1, 4, 9};
    CHECK(max_syncs_per_window(t) == 3);
    std::vector<double> spread{1, 12, 25};
    CHECK(max_syncs_per_window(spread) == 1);
    std::vector<double> none;
    CHECK(max_syncs_per_window(none) == 0);
}

TEST_CASE("max_syncs_per_window matches a brute-force sweep") {
    testing::Gen g(17);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> t;
        const int n = g.integer(1, 30);
        for (int i = 0; i < n; ++i) t.push_back(g.coin(0.3) ? g.integer(0, 60) : g.uniform(0, 60));
        std::size_t best = 0;
        for (int k = 0; k <= 61; ++k) {
            std::size_t c = 0;
            for (double x : t) c += (x >= k && x < k + 10.0);
            best = std::max(best, c);
        }
        CHECK(max_syncs_per_window(t) == best);
    }
}

TEST_CASE("export: csv header for an empty report, stable bytes, jsonl keys sorted") {
    std::vector<AggregateReport> none;
    const std::string empty = report_csv(none);
    CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);
    CHECK(empty.rfind("policy,update_scheme,", 0) == 0);

    AggregateReport r;
    r.key.policy = "time_redundant";
    r.key.update_scheme = "all_worker";
    r.runtime_per_sync_mean = 1.0 / 3.0;
    std::vector<AggregateReport> reps{r, r};
    CHECK(report_csv(reps) == report_csv(reps));
    CHECK(report_csv(reps).find("0.333333") != std::string::npos);

    const std::string jl = report_jsonl(reps);
    CHECK(std::count(jl.begin(), jl.end(), '\n') == 2);
    const std::string first = jl.substr(0, jl.find('\n'));
    std::vector<std::string> keys;
    for (std::size_t p = 0; (p = first.find('"', p)) != std::string::npos;) {
        const auto q = first.find('"', p + 1);
        if (first[q + 1] == ':') keys.push_back(first.substr(p + 1, q - p - 1));
        p = q + 1;
    }
    CHECK(keys.size() >= 10);
    CHECK(std::is_sorted(keys.begin(), keys.end()));

    auto dir = std::filesystem::temp_directory_path();
    export_report(reps, ExportFormat::Csv, dir / "syncsim_a.csv");
    export_report(reps, ExportFormat::Csv, dir / "syncsim_b.csv");
    CHECK(read_text_file(dir / "syncsim_a.csv") == read_text_file(dir / "syncsim_b.csv"));
    CHECK_THROWS_AS(export_report(reps, ExportFormat::Csv, dir / "no_such_dir" / "x.csv"), IoError);
}

TEST_CASE("format_float6") {
    CHECK(format_float6(1234567.0) == "1.23457e+06");
    CHECK(format_float6(0.1) == "0.1");
    CHECK(round6(2.0 / 3.0) == 0.666667);
}

TEST_CASE("property: conservation of sync outcomes") {
    testing::Gen g(3);
    for (int trial = 0; trial < 200; ++trial) {
        MetricsCollector c(0, 0);
        const int n = g.integer(0, 20);
        for (int i = 0; i < n; ++i) {
            const auto o = static_cast<SyncOutcome>(g.integer(0, 2));
            c.record_sync_outcome("t" + std::to_string(i), o, i, g.integer(0, 2));
        }
        const auto& r = c.record();
        CHECK(r.sync_points == r.sync_successes + r.failed_sync_quorum + r.failed_sync_incomplete);
    }
}

TEST_CASE("property: aggregating a concatenation equals the weighted combination") {
    testing::Gen g(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<MetricsRecord> a, b, ab;
        const int na = g.integer(1, 6), nb = g.integer(1, 6);
        for (int i = 0; i < na; ++i) a.push_back(random_record(g, g.integer(0, 3), i));
        for (int i = 0; i < nb; ++i) b.push_back(random_record(g, g.integer(4, 7), i));
        ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const auto ra = aggregate(a, {}), rb = aggregate(b, {}), rab = aggregate(ab, {});

        CHECK(rab.sync_points == ra.sync_points + rb.sync_points);
        CHECK(rab.sync_successes == ra.sync_successes + rb.sync_successes);
        CHECK(rab.ctrl_msgs == ra.ctrl_msgs + rb.ctrl_msgs);
        CHECK(rab.extra_attempts == ra.extra_attempts + rb.extra_attempts);
        CHECK(rab.total_runtime_s == doctest::Approx(ra.total_runtime_s + rb.total_runtime_s));
        CHECK(rab.replications == ra.replications + rb.replications);

        const double wa = static_cast<double>(ra.sync_points), wb = static_cast<double>(rb.sync_points);
        if (wa > 0 && wb > 0) {
            CHECK(rab.runtime_per_sync_mean * (wa + wb) ==
                  doctest::Approx(ra.runtime_per_sync_mean * wa + rb.runtime_per_sync_mean * wb));
            CHECK(rab.pct_fail_quorum * (wa + wb) ==
                  doctest::Approx(ra.pct_fail_quorum * wa + rb.pct_fail_quorum * wb));
            CHECK(rab.pct_fail_incomplete * (wa + wb) ==
                  doctest::Approx(ra.pct_fail_incomplete * wa + rb.pct_fail_incomplete * wb));
        }
        // SR is a mean over replications
        CHECK(rab.max_sr_per_10s * rab.replications ==
              doctest::Approx(ra.max_sr_per_10s * ra.replications + rb.max_sr_per_10s * rb.replications));
    }
}

TEST_CASE("property: identical reports serialize identically") {
    testing::Gen g(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MetricsRecord> recs;
        for (int i = 0; i < 5; ++i) recs.push_back(random_record(g, i % 2, i));
        ConfigKey key;
        key.policy = "barrier";
        key.sync_degree = g.uniform();
        auto r1 = aggregate(recs, key);
        auto r2 = aggregate(std::vector<MetricsRecord>(recs), key);
        std::vector<AggregateReport> v1{r1}, v2{r2};
        CHECK(report_csv(v1) == report_csv(v2));
        CHECK(report_jsonl(v1) == report_jsonl(v2));
    }
}
