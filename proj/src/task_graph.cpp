#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "syncsim/errors.hpp"
#include "syncsim/task.hpp"

namespace syncsim {

namespace {

struct KindName {
    TaskKind kind;
    std::string_view name;
};

constexpr KindName kKindNames[] = {
    {TaskKind::ControllerToWorkerSync, "c2w_s"},  {TaskKind::ControllerToWorkerAsync, "c2w_a"},
    {TaskKind::WorkerToControllerSync, "w2c_s"},  {TaskKind::WorkerToControllerAsync, "w2c_a"},
    {TaskKind::LocalWorker, "w_l"},               {TaskKind::LocalController, "c_l"},
};

// Finds one cycle among `remaining` tasks (those Kahn's algorithm could not
// retire) by walking predecessor links until a task repeats.
std::vector<std::string> find_cycle(const TaskGraph& graph, const std::set<std::string>& remaining) {
    std::string cur = *remaining.begin();
    std::vector<std::string> path;
    std::map<std::string, std::size_t> seen;
    while (!seen.contains(cur)) {
        seen[cur] = path.size();
        path.push_back(cur);
        const TaskSpec* t = graph.find(cur);
        for (const auto& p : t->predecessors) {
            if (remaining.contains(p)) {
                cur = p;
                break;
            }
        }
    }
    std::vector<std::string> cycle(path.begin() + static_cast<std::ptrdiff_t>(seen[cur]), path.end());
    std::sort(cycle.begin(), cycle.end());
    return cycle;
}

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
    for (const auto& k : kKindNames)
        if (k.kind == kind) return k.name;
    return "?";
}

TaskKind task_kind_from_string(std::string_view s) {
    for (const auto& k : kKindNames)
        if (k.name == s) return k.kind;
    throw ParseError("unknown task kind '" + std::string(s) + "'");
}

void check_task_spec(const TaskSpec& task) {
    if (!(task.base_duration > 0.0))
        throw ValidationError("base_duration_s", "task '" + task.id + "' needs a positive duration");
    if (!(task.duration_stddev >= 0.0))
        throw ValidationError("stddev_s", "task '" + task.id + "' has a negative stddev");
}

TaskGraph::TaskGraph(std::string graph_id, std::vector<TaskSpec> tasks)
    : graph_id_(std::move(graph_id)), tasks_(std::move(tasks)) {
    std::set<std::string> ids;
    for (const auto& t : tasks_) {
        check_task_spec(t);
        if (!ids.insert(t.id).second) throw ValidationError("id", "duplicate task id '" + t.id + "'");
    }
}

const TaskSpec* TaskGraph::find(std::string_view id) const {
    for (const auto& t : tasks_)
        if (t.id == id) return &t;
    return nullptr;
}

std::string describe(const GraphError& error) {
    return std::visit(
        [](const auto& e) -> std::string {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, CycleDetected>) {
                std::string s = "cycle detected among tasks [";
                for (std::size_t i = 0; i < e.task_ids.size(); ++i)
                    s += (i ? "," : "") + e.task_ids[i];
                return s + "]";
            } else {
                return "task '" + e.task_id + "' references missing predecessor '" + e.missing_id + "'";
            }
        },
        error);
}

std::optional<GraphError> validate_task_graph(const TaskGraph& graph) {
    for (const auto& t : graph.tasks())
        for (const auto& p : t.predecessors)
            if (!graph.find(p)) return DanglingPredecessor{t.id, p};

    std::set<std::string> remaining;
    for (const auto& t : graph.tasks()) remaining.insert(t.id);
    std::set<std::string> done;
    bool progress = true;
    while (!remaining.empty() && progress) {
        progress = false;
        for (auto it = remaining.begin(); it != remaining.end();) {
            const TaskSpec* t = graph.find(*it);
            bool ready = std::all_of(t->predecessors.begin(), t->predecessors.end(),
                                     [&](const std::string& p) { return done.contains(p); });
            if (ready) {
                done.insert(*it);
                it = remaining.erase(it);
                progress = true;
            } else {
                ++it;
            }
        }
    }
    if (!remaining.empty()) return CycleDetected{find_cycle(graph, remaining)};
    return std::nullopt;
}

std::vector<const TaskSpec*> ready_tasks(const TaskGraph& graph, const std::set<std::string>& completed) {
    std::vector<const TaskSpec*> out;
    for (const auto& t : graph.tasks()) {
        if (completed.contains(t.id)) continue;
        bool ready = std::all_of(t.predecessors.begin(), t.predecessors.end(),
                                 [&](const std::string& p) { return completed.contains(p); });
        if (ready) out.push_back(&t);
    }
    std::sort(out.begin(), out.end(), [](const TaskSpec* a, const TaskSpec* b) { return a->id < b->id; });
    return out;
}

std::vector<const TaskSpec*> processing_order(const TaskGraph& graph) {
    std::vector<const TaskSpec*> order;
    std::set<std::string> completed;
    while (order.size() < graph.size()) {
        auto ready = ready_tasks(graph, completed);
        if (ready.empty()) throw ValidationError("tasks", "graph '" + graph.graph_id() + "' is not acyclic");
        order.push_back(ready.front());
        completed.insert(ready.front()->id);
    }
    return order;
}

namespace {

void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
    for (const auto& [k, v] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ParseError("unknown key '" + k + "' in " + std::string(where));
    }
}

}  // namespace

TaskGraph task_graph_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("task graph: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("task graph must be a JSON object");
    reject_unknown(doc, {"graph_id", "tasks"}, "task graph");
    try {
        std::vector<TaskSpec> tasks;
        for (const auto& jt : doc.at("tasks")) {
            reject_unknown(jt, {"id", "kind", "base_duration_s", "stddev_s", "preds"}, "task");
            TaskSpec t;
            t.id = jt.at("id").get<std::string>();
            t.kind = task_kind_from_string(jt.at("kind").get<std::string>());
            t.base_duration = jt.at("base_duration_s").get<double>();
            t.duration_stddev = jt.value("stddev_s", 0.0);
            if (jt.contains("preds")) t.predecessors = jt.at("preds").get<std::vector<std::string>>();
            tasks.push_back(std::move(t));
        }
        TaskGraph graph(doc.at("graph_id").get<std::string>(), std::move(tasks));
        if (auto err = validate_task_graph(graph)) throw ValidationError("tasks", describe(*err));
        return graph;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("task graph: ") + e.what());
    }
}

TaskGraph load_task_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open task graph " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return task_graph_from_json(ss.str());
}

std::string task_graph_to_json(const TaskGraph& graph) {
    nlohmann::ordered_json doc;
    doc["graph_id"] = graph.graph_id();
    doc["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : graph.tasks()) {
        nlohmann::ordered_json jt;
        jt["id"] = t.id;
        jt["kind"] = std::string(to_string(t.kind));
        jt["base_duration_s"] = t.base_duration;
        jt["stddev_s"] = t.duration_stddev;
        jt["preds"] = t.predecessors;
        doc["tasks"].push_back(std::move(jt));
    }
    return doc.dump(2) + "\n";
}

}  // namespace syncsim
