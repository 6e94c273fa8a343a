#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace syncsim {

enum class TaskKind {
    ControllerToWorkerSync,   // c2w_s
    ControllerToWorkerAsync,  // c2w_a
    WorkerToControllerSync,   // w2c_s
    WorkerToControllerAsync,  // w2c_a
    LocalWorker,              // w_l
    LocalController,          // c_l
};

std::string_view to_string(TaskKind kind) noexcept;
TaskKind task_kind_from_string(std::string_view s);

/// True for kinds whose execution occupies every worker of the group.
constexpr bool runs_on_workers(TaskKind k) noexcept {
    return k == TaskKind::ControllerToWorkerSync || k == TaskKind::ControllerToWorkerAsync ||
           k == TaskKind::LocalWorker;
}

struct TaskSpec {
    std::string id;
    TaskKind kind = TaskKind::ControllerToWorkerAsync;
    double base_duration = 1.0;   // seconds, > 0
    double duration_stddev = 0.0; // seconds, >= 0
    std::vector<std::string> predecessors;
};

/// Throws ValidationError when the duration parameters are out of range.
void check_task_spec(const TaskSpec& task);

class TaskGraph {
public:
    TaskGraph() = default;
    TaskGraph(std::string graph_id, std::vector<TaskSpec> tasks);

    const std::string& graph_id() const noexcept { return graph_id_; }
    const std::vector<TaskSpec>& tasks() const noexcept { return tasks_; }
    std::size_t size() const noexcept { return tasks_.size(); }
    bool empty() const noexcept { return tasks_.empty(); }

    const TaskSpec* find(std::string_view id) const;

private:
    std::string graph_id_;
    std::vector<TaskSpec> tasks_;
};

struct CycleDetected {
    std::vector<std::string> task_ids;
};

struct DanglingPredecessor {
    std::string task_id;
    std::string missing_id;
};

using GraphError = std::variant<CycleDetected, DanglingPredecessor>;

std::string describe(const GraphError& error);

/// nullopt when the graph is acyclic and every predecessor resolves.
std::optional<GraphError> validate_task_graph(const TaskGraph& graph);

/// Tasks whose predecessors are all in `completed` and which are not completed
/// themselves, ascending by task id.
std::vector<const TaskSpec*> ready_tasks(const TaskGraph& graph,
                                         const std::set<std::string>& completed);

/// Order in which a controller walks the graph: repeatedly take the first ready
/// task. Requires a valid graph.
std::vector<const TaskSpec*> processing_order(const TaskGraph& graph);

/// Loads `{ "graph_id", "tasks": [...] }`. Unknown keys are rejected and the
/// graph is validated before it is returned.
TaskGraph task_graph_from_json(std::string_view text);
TaskGraph load_task_graph(const std::filesystem::path& path);
std::string task_graph_to_json(const TaskGraph& graph);

inline constexpr double kDurationFloor = 1e-3;

/// Gaussian execution time truncated below at `floor`.
template <class URBG>
double sample_duration(const TaskSpec& task, URBG& rng, double floor = kDurationFloor) {
    if (task.duration_stddev <= 0.0) return task.base_duration;
    std::normal_distribution<double> dist(task.base_duration, task.duration_stddev);
    return std::max(floor, dist(rng));
}

}  // namespace syncsim
