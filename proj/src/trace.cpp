#include "syncsim/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "syncsim/errors.hpp"

namespace syncsim {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Calls `row(fields, line_no)` for every data line after checking the header.
template <class F>
void for_each_row(std::string_view text, std::string_view header, std::size_t columns, F&& row) {
    std::size_t line_no = 0;
    bool saw_header = false;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!saw_header) {
            if (line != header) throw CsvError(line_no, "expected header '" + std::string(header) + "'");
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (fields.size() != columns)
            throw CsvError(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                        std::to_string(fields.size()));
        row(fields, line_no);
    }
    if (!saw_header) throw CsvError(1, "missing header '" + std::string(header) + "'");
}

double number_field(std::string_view s, std::size_t line, const char* name) {
    auto v = parse_double(s);
    if (!v) throw CsvError(line, std::string("non-numeric ") + name + " '" + std::string(s) + "'");
    return *v;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<MobilitySample> parse_mobility_csv(std::string_view text) {
    std::vector<MobilitySample> out;
    for_each_row(text, "node_id,timestamp,x,y", 4, [&](const auto& f, std::size_t line) {
        if (f[0].empty()) throw CsvError(line, "empty node_id");
        out.push_back(MobilitySample{std::string(f[0]), number_field(f[1], line, "timestamp"),
                                     number_field(f[2], line, "x"), number_field(f[3], line, "y")});
    });
    return out;
}

std::string emit_mobility_csv(std::span<const MobilitySample> samples) {
    std::string out = "node_id,timestamp,x,y\n";
    for (const auto& s : samples)
        out += s.node_id + "," + format_number(s.timestamp) + "," + format_number(s.x) + "," + format_number(s.y) + "\n";
    return out;
}

DurationTrace parse_duration_csv(std::string_view text) {
    DurationTrace trace;
    for_each_row(text, "task_label,duration_s", 2, [&](const auto& f, std::size_t line) {
        double d = number_field(f[1], line, "duration_s");
        if (!(d > 0.0)) throw CsvError(line, "duration must be positive");
        trace.entries.push_back(DurationEntry{std::string(f[0]), d});
    });
    return trace;
}

std::string emit_duration_csv(const DurationTrace& trace) {
    std::string out = "task_label,duration_s\n";
    for (const auto& e : trace.entries) out += e.task_label + "," + format_number(e.duration) + "\n";
    return out;
}

ResampledTrace resample(std::span<const MobilitySample> samples, double interval) {
    if (!(interval > 0.0)) throw ValidationError("interval", "must be positive");
    ResampledTrace out;
    out.interval = interval;
    if (samples.empty()) return out;

    std::map<std::string, std::vector<const MobilitySample*>> by_node;
    double first = samples.front().timestamp, last = first;
    for (const auto& s : samples) {
        by_node[s.node_id].push_back(&s);
        first = std::min(first, s.timestamp);
        last = std::max(last, s.timestamp);
    }
    out.epoch = first;
    out.points = static_cast<std::size_t>(std::floor((last - first) / interval)) + 1;

    for (const auto& [node, raw] : by_node) {
        for (std::size_t i = 1; i < raw.size(); ++i)
            if (!(raw[i]->timestamp > raw[i - 1]->timestamp))
                throw ValidationError("timestamp", "samples of node '" + node + "' are not strictly increasing");
        auto& grid = out.positions[node];
        grid.reserve(out.points);
        std::size_t j = 0;
        for (std::size_t k = 0; k < out.points; ++k) {
            const double t = first + static_cast<double>(k) * interval;
            while (j + 1 < raw.size() && raw[j + 1]->timestamp <= t) ++j;
            const MobilitySample& a = *raw[j];
            if (t <= a.timestamp || j + 1 == raw.size()) {
                grid.push_back({a.x, a.y});
                continue;
            }
            const MobilitySample& b = *raw[j + 1];
            const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
            grid.push_back({a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)});
        }
    }
    return out;
}

std::vector<MobilitySample> flatten(const ResampledTrace& trace) {
    std::vector<MobilitySample> out;
    for (const auto& [node, grid] : trace.positions)
        for (std::size_t k = 0; k < grid.size(); ++k)
            out.push_back({node, trace.epoch + static_cast<double>(k) * trace.interval, grid[k].x, grid[k].y});
    return out;
}

std::vector<ClusterId> grid_cells(std::span<const Position> positions, int cluster_count) {
    if (cluster_count < 1) throw ValidationError("cluster_count", "must be at least 1");
    int rows = 1;
    for (int r = 1; r * r <= cluster_count; ++r)
        if (cluster_count % r == 0) rows = r;
    const int cols = cluster_count / rows;

    std::vector<ClusterId> cells(positions.size(), 0);
    if (positions.empty()) return cells;
    double minx = positions[0].x, maxx = minx, miny = positions[0].y, maxy = miny;
    for (const auto& p : positions) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    auto bin = [](double v, double lo, double hi, int n) {
        if (!(hi > lo)) return 0;
        int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * n));
        return std::clamp(b, 0, n - 1);
    };
    for (std::size_t i = 0; i < positions.size(); ++i) {
        int c = bin(positions[i].x, minx, maxx, cols);
        int r = bin(positions[i].y, miny, maxy, rows);
        cells[i] = static_cast<ClusterId>(r * cols + c);
    }
    return cells;
}

ClusterAssignment assign_clusters(std::span<const WorkerId> workers, std::span<const Position> positions,
                                  int cluster_count, int min_cluster_size) {
    if (workers.size() != positions.size()) throw ValidationError("positions", "one position per worker required");
    const auto cells = grid_cells(positions, cluster_count);
    std::vector<std::vector<WorkerId>> members(static_cast<std::size_t>(cluster_count));
    for (std::size_t i = 0; i < workers.size(); ++i) members[cells[i]].push_back(workers[i]);

    ClusterAssignment out;
    out.cluster_of.assign(workers.size(), std::nullopt);
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].empty() || static_cast<int>(members[c].size()) < min_cluster_size) continue;
        out.clusters.push_back(Cluster{static_cast<ClusterId>(c), members[c], 0});
    }
    for (std::size_t i = 0; i < workers.size(); ++i) {
        const auto& m = members[cells[i]];
        if (!m.empty() && static_cast<int>(m.size()) >= min_cluster_size) out.cluster_of[i] = cells[i];
    }
    return out;
}

DurationTrace synth_duration_trace(std::size_t count, double min_s, double max_s, std::uint64_t seed) {
    if (!(min_s > 0.0 && min_s <= max_s)) throw ValidationError("duration range", "need 0 < min <= max");
    DurationTrace trace;
    RandomStreams streams(seed);
    const double lo = std::log(min_s), hi = std::log(max_s);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = streams.uniform(Stream::Durations, i);
        const double d = std::clamp(std::exp(lo + u * (hi - lo)), min_s, max_s);
        trace.entries.push_back({"task" + std::to_string(i), d});
    }
    return trace;
}

RandomWaypoint::RandomWaypoint(SplitMix64 rng, MobilityBox box, double speed_mps)
    : rng_(rng), box_(box), speed_(speed_mps) {
    pos_ = random_point();
    target_ = random_point();
}

Position RandomWaypoint::random_point() {
    std::uniform_real_distribution<double> ux(0.0, box_.width), uy(0.0, box_.height);
    const double x = ux(rng_);
    return {x, uy(rng_)};
}

void RandomWaypoint::advance(double dt) {
    double budget = speed_ * dt;
    while (budget > 0.0) {
        const double dx = target_.x - pos_.x, dy = target_.y - pos_.y;
        const double dist = std::hypot(dx, dy);
        if (dist <= budget) {
            pos_ = target_;
            budget -= dist;
            target_ = random_point();
            if (dist == 0.0 && budget > 0.0 && target_ == pos_) break;
        } else {
            pos_.x += dx / dist * budget;
            pos_.y += dy / dist * budget;
            budget = 0.0;
        }
    }
}

std::vector<MobilitySample> synth_mobility(std::size_t node_count, double duration_s, double speed_mps,
                                           std::uint64_t seed, double interval, MobilityBox box) {
    if (!(duration_s > 0.0) || !(interval > 0.0) || speed_mps < 0.0)
        throw ValidationError("mobility", "duration and interval must be positive, speed non-negative");
    RandomStreams streams(seed);
    const auto steps = static_cast<std::size_t>(std::ceil(duration_s / interval));
    std::vector<MobilitySample> out;
    out.reserve(node_count * steps);
    for (std::size_t n = 0; n < node_count; ++n) {
        RandomWaypoint walker(streams.engine(Stream::Mobility, n), box, speed_mps);
        const std::string id = "n" + std::to_string(n);
        for (std::size_t k = 0; k < steps; ++k) {
            if (k > 0) walker.advance(interval);
            const auto p = walker.position();
            out.push_back({id, static_cast<double>(k) * interval, p.x, p.y});
        }
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace syncsim
