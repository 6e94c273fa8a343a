#include "syncsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "syncsim/trace.hpp"

namespace syncsim {

MetricsCollector::MetricsCollector(int replication, int run_index) {
    record_.replication = replication;
    record_.run_index = run_index;
}

void MetricsCollector::record_sync_outcome(std::string_view task_key, SyncOutcome outcome, double start_time,
                                           std::int64_t extra_attempts) {
    if (!seen_.emplace(task_key).second) throw DuplicateRecord(std::string(task_key));
    ++record_.sync_points;
    record_.extra_quorum_attempts += extra_attempts;
    switch (outcome) {
        case SyncOutcome::Success:
            ++record_.sync_successes;
            record_.sync_times.push_back(start_time);
            break;
        case SyncOutcome::QuorumFailure: ++record_.failed_sync_quorum; break;
        case SyncOutcome::IncompleteFailure: ++record_.failed_sync_incomplete; break;
    }
}

std::size_t max_syncs_per_window(std::span<const double> times, double window, double step) {
    if (times.empty()) return 0;
    std::vector<double> sorted(times.begin(), times.end());
    std::sort(sorted.begin(), sorted.end());
    // The busiest window can always be slid right until its start is the step
    // at or below some sample, so only those starts need checking.
    std::size_t best = 0;
    for (double t : sorted) {
        const double start = std::floor(t / step) * step;
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), start);
        auto hi = std::lower_bound(sorted.begin(), sorted.end(), start + window);
        best = std::max(best, static_cast<std::size_t>(hi - lo));
    }
    return best;
}

AggregateReport aggregate(std::span<const MetricsRecord> records, const ConfigKey& key) {
    if (records.empty()) throw EmptyInput();
    AggregateReport r;
    r.key = key;
    std::int64_t fq = 0, fi = 0;
    std::map<int, std::pair<double, std::int64_t>> per_rep;  // runtime, sync points
    std::map<int, std::vector<double>> rep_times;
    for (const auto& m : records) {
        r.total_runtime_s += m.runtime_s;
        r.sync_points += m.sync_points;
        r.sync_successes += m.sync_successes;
        r.extra_attempts += m.extra_quorum_attempts;
        r.ctrl_msgs += m.controller_update_messages;
        fq += m.failed_sync_quorum;
        fi += m.failed_sync_incomplete;
        auto& pr = per_rep[m.replication];
        pr.first += m.runtime_s;
        pr.second += m.sync_points;
        auto& t = rep_times[m.replication];
        t.insert(t.end(), m.sync_times.begin(), m.sync_times.end());
    }
    r.replications = static_cast<int>(per_rep.size());
    if (r.sync_points > 0) {
        const double n = static_cast<double>(r.sync_points);
        r.runtime_per_sync_mean = r.total_runtime_s / n;
        r.pct_fail_quorum = 100.0 * static_cast<double>(fq) / n;
        r.pct_fail_incomplete = 100.0 * static_cast<double>(fi) / n;
    }
    std::vector<double> ratios;
    for (const auto& [rep, pr] : per_rep)
        if (pr.second > 0) ratios.push_back(pr.first / static_cast<double>(pr.second));
    if (ratios.size() > 1) {
        double mean = 0.0;
        for (double v : ratios) mean += v;
        mean /= static_cast<double>(ratios.size());
        double ss = 0.0;
        for (double v : ratios) ss += (v - mean) * (v - mean);
        r.runtime_per_sync_stddev = std::sqrt(ss / static_cast<double>(ratios.size() - 1));
    }
    double sr = 0.0;
    for (const auto& [rep, t] : rep_times) sr += static_cast<double>(max_syncs_per_window(t));
    r.max_sr_per_10s = sr / static_cast<double>(rep_times.size());
    return r;
}

std::string format_float6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double round6(double v) { return std::stod(format_float6(v)); }

namespace {

constexpr const char* kCsvHeader =
    "policy,update_scheme,workers,clusters,min_cluster_size,sync_degree,lambda_s,retries,accuracy,seed,"
    "runtime_per_sync_s,pct_fail_quorum,pct_fail_incomplete,extra_attempts,ctrl_msgs,max_sr_per_10s";

}  // namespace

std::string report_csv(std::span<const AggregateReport> reports) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : reports) {
        const auto& k = r.key;
        out += k.policy + "," + k.update_scheme + "," + std::to_string(k.workers) + "," + std::to_string(k.clusters) +
               "," + std::to_string(k.min_cluster_size) + "," + format_float6(k.sync_degree) + "," +
               format_float6(k.lambda_s) + "," + std::to_string(k.retries) + "," + format_float6(k.accuracy) + "," +
               std::to_string(k.seed) + "," + format_float6(r.runtime_per_sync_mean) + "," +
               format_float6(r.pct_fail_quorum) + "," + format_float6(r.pct_fail_incomplete) + "," +
               std::to_string(r.extra_attempts) + "," + std::to_string(r.ctrl_msgs) + "," +
               format_float6(r.max_sr_per_10s) + "\n";
    }
    return out;
}

std::string report_jsonl(std::span<const AggregateReport> reports) {
    std::string out;
    for (const auto& r : reports) {
        const auto& k = r.key;
        nlohmann::json j;  // std::map-backed, so keys come out sorted
        j["policy"] = k.policy;
        j["update_scheme"] = k.update_scheme;
        j["workers"] = k.workers;
        j["clusters"] = k.clusters;
        j["min_cluster_size"] = k.min_cluster_size;
        j["sync_degree"] = round6(k.sync_degree);
        j["lambda_s"] = round6(k.lambda_s);
        j["retries"] = k.retries;
        j["accuracy"] = round6(k.accuracy);
        j["seed"] = k.seed;
        j["runtime_per_sync_s"] = round6(r.runtime_per_sync_mean);
        j["runtime_per_sync_stddev_s"] = round6(r.runtime_per_sync_stddev);
        j["pct_fail_quorum"] = round6(r.pct_fail_quorum);
        j["pct_fail_incomplete"] = round6(r.pct_fail_incomplete);
        j["extra_attempts"] = r.extra_attempts;
        j["ctrl_msgs"] = r.ctrl_msgs;
        j["max_sr_per_10s"] = round6(r.max_sr_per_10s);
        j["sync_points"] = r.sync_points;
        j["sync_successes"] = r.sync_successes;
        j["replications"] = r.replications;
        out += j.dump() + "\n";
    }
    return out;
}

void export_report(std::span<const AggregateReport> reports, ExportFormat format, const std::filesystem::path& path) {
    write_text_file(path, format == ExportFormat::Csv ? report_csv(reports) : report_jsonl(reports));
}

}  // namespace syncsim
