#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncsim/errors.hpp"
#include "syncsim/nodes.hpp"
#include "syncsim/random.hpp"

namespace syncsim {

struct MobilitySample {
    std::string node_id;
    double timestamp = 0.0;  // seconds since trace epoch
    double x = 0.0;          // meters
    double y = 0.0;
    friend bool operator==(const MobilitySample&, const MobilitySample&) = default;
};

struct DurationEntry {
    std::string task_label;
    double duration = 0.0;
    friend bool operator==(const DurationEntry&, const DurationEntry&) = default;
};

struct DurationTrace {
    std::vector<DurationEntry> entries;
};

/// Thrown for malformed CSV rows; carries the 1-based line number.
class CsvError : public ParseError {
public:
    CsvError(std::size_t line, const std::string& reason)
        : ParseError("line " + std::to_string(line) + ": " + reason), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Header `node_id,timestamp,x,y` required.
std::vector<MobilitySample> parse_mobility_csv(std::string_view text);
std::string emit_mobility_csv(std::span<const MobilitySample> samples);

/// Header `task_label,duration_s` required; durations must be positive.
DurationTrace parse_duration_csv(std::string_view text);
std::string emit_duration_csv(const DurationTrace& trace);

/// Shortest round-trip decimal form used by every emitter.
std::string format_number(double v);

struct ResampledTrace {
    double epoch = 0.0;
    double interval = 0.0;
    std::size_t points = 0;
    std::map<std::string, std::vector<Position>> positions;  // node -> one position per grid time
};

/// Grid t = epoch + k*interval for k = 0 .. floor((last - epoch)/interval).
/// Positions are linearly interpolated between bracketing samples and held
/// constant outside a node's observed span. Per-node samples must be sorted.
ResampledTrace resample(std::span<const MobilitySample> samples, double interval);
std::vector<MobilitySample> flatten(const ResampledTrace& trace);

struct ClusterAssignment {
    std::vector<std::optional<ClusterId>> cluster_of;  // parallel to the input positions
    std::vector<Cluster> clusters;                      // formed clusters, ascending id
};

/// Index of the grid cell (0 .. cluster_count-1) each position falls in; the
/// grid partitions the bounding box of `positions` into cluster_count cells.
std::vector<ClusterId> grid_cells(std::span<const Position> positions, int cluster_count);

/// Groups workers by grid cell; cells with fewer than `min_cluster_size`
/// workers form no cluster and their workers stay unclustered.
ClusterAssignment assign_clusters(std::span<const WorkerId> workers, std::span<const Position> positions,
                                  int cluster_count, int min_cluster_size);

/// Log-uniform durations in [min_s, max_s].
DurationTrace synth_duration_trace(std::size_t count, double min_s, double max_s, std::uint64_t seed);

struct MobilityBox {
    double width = 10000.0;
    double height = 10000.0;
};

/// Random-waypoint mover inside a box.
class RandomWaypoint {
public:
    RandomWaypoint(SplitMix64 rng, MobilityBox box, double speed_mps);

    Position position() const noexcept { return pos_; }
    void advance(double dt);

private:
    Position random_point();

    SplitMix64 rng_;
    MobilityBox box_;
    double speed_;
    Position pos_;
    Position target_;
};

/// Random-waypoint walks sampled every `interval` seconds over [0, duration_s).
std::vector<MobilitySample> synth_mobility(std::size_t node_count, double duration_s, double speed_mps,
                                           std::uint64_t seed, double interval = 30.0, MobilityBox box = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace syncsim
