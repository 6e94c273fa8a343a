#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "syncsim/task.hpp"

namespace syncsim {

using WorkerId = std::uint32_t;
using ControllerId = std::uint32_t;
using ClusterId = std::uint32_t;

enum class Liveness { Connected, Disconnected, Failed };

struct Position {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Position&, const Position&) = default;
};

struct WorkerState {
    WorkerId worker_id = 0;
    double t_avail = 0.0;
    Liveness liveness = Liveness::Connected;
    std::optional<ClusterId> cluster_id;
    std::vector<TaskSpec> local_queue;  // kind == LocalWorker, durations known exactly
    std::optional<Position> position;

    bool connected() const noexcept { return liveness == Liveness::Connected; }
};

enum class ControllerLevel { Cloud, Fog, Device };

struct ControllerNode {
    ControllerId controller_id = 0;
    ControllerLevel level = ControllerLevel::Fog;
    std::vector<ControllerId> child_controllers;
    std::vector<WorkerId> child_workers;
    double t_avail = 0.0;
};

struct Cluster {
    ClusterId cluster_id = 0;
    std::vector<WorkerId> members;
    ControllerId broker_controller = 0;
};

}  // namespace syncsim
