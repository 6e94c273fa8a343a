#include "syncsim/topology.hpp"

#include <string>

#include "syncsim/errors.hpp"

namespace syncsim {

void Topology::add_controller(ControllerId id, ControllerLevel level, std::optional<ControllerId> parent) {
    if (parent && !has_controller(*parent)) throw TopologyViolation("unknown parent controller");
    if (id >= controllers_.size()) controllers_.resize(id + 1);
    if (controllers_[id].present) throw TopologyViolation("controller " + std::to_string(id) + " added twice");
    controllers_[id] = Entry{true, level, parent};
}

void Topology::add_worker(WorkerId id, ControllerId parent) {
    if (!has_controller(parent)) throw TopologyViolation("unknown parent controller");
    if (id >= worker_parent_.size()) worker_parent_.resize(id + 1);
    worker_parent_[id] = parent;
}

bool Topology::has_controller(ControllerId id) const noexcept {
    return id < controllers_.size() && controllers_[id].present;
}

bool Topology::has_worker(WorkerId id) const noexcept {
    return id < worker_parent_.size() && worker_parent_[id].has_value();
}

ControllerId Topology::parent_of(WorkerId w) const {
    if (!has_worker(w)) throw TopologyViolation("unknown worker " + std::to_string(w));
    return *worker_parent_[w];
}

std::optional<ControllerId> Topology::parent_of_controller(ControllerId c) const {
    if (!has_controller(c)) throw TopologyViolation("unknown controller " + std::to_string(c));
    return controllers_[c].parent;
}

ControllerLevel Topology::level_of(ControllerId c) const {
    if (!has_controller(c)) throw TopologyViolation("unknown controller " + std::to_string(c));
    return controllers_[c].level;
}

bool Topology::is_edge(NodeRef a, NodeRef b) const noexcept {
    auto child_of = [this](NodeRef child, NodeRef parent) {
        if (parent.type != NodeType::Controller) return false;
        if (child.type == NodeType::Worker)
            return has_worker(child.id) && *worker_parent_[child.id] == parent.id;
        return has_controller(child.id) && controllers_[child.id].parent == parent.id;
    };
    return child_of(a, b) || child_of(b, a);
}

void Topology::check_link(NodeRef from, NodeRef to) const {
    if (from.type == NodeType::Worker && to.type == NodeType::Worker)
        throw TopologyViolation("workers " + std::to_string(from.id) + " and " + std::to_string(to.id) +
                                " have no direct link");
    if (!is_edge(from, to)) throw TopologyViolation("no tree edge between the endpoints");
}

bool Topology::is_tree() const {
    std::size_t roots = 0;
    for (std::size_t c = 0; c < controllers_.size(); ++c) {
        if (!controllers_[c].present) continue;
        if (!controllers_[c].parent) {
            ++roots;
            continue;
        }
        // walk up; a cycle would exceed the controller count
        std::size_t steps = 0;
        std::optional<ControllerId> cur = controllers_[c].parent;
        while (cur && steps <= controllers_.size()) {
            cur = controllers_[*cur].parent;
            ++steps;
        }
        if (cur) return false;
    }
    return roots == 1;
}

}  // namespace syncsim
