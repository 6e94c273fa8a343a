#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "syncsim/nodes.hpp"

namespace syncsim {

enum class NodeType { Controller, Worker };

struct NodeRef {
    NodeType type = NodeType::Worker;
    std::uint32_t id = 0;

    static constexpr NodeRef controller(ControllerId c) noexcept { return {NodeType::Controller, c}; }
    static constexpr NodeRef worker(WorkerId w) noexcept { return {NodeType::Worker, w}; }
    friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

/// Controller tree with workers at the leaves. Messages may only travel along
/// parent-child edges.
class Topology {
public:
    void add_controller(ControllerId id, ControllerLevel level, std::optional<ControllerId> parent);
    void add_worker(WorkerId id, ControllerId parent);

    bool has_controller(ControllerId id) const noexcept;
    bool has_worker(WorkerId id) const noexcept;
    ControllerId parent_of(WorkerId w) const;
    std::optional<ControllerId> parent_of_controller(ControllerId c) const;
    ControllerLevel level_of(ControllerId c) const;
    std::size_t controller_count() const noexcept { return controllers_.size(); }
    std::size_t worker_count() const noexcept { return worker_parent_.size(); }

    bool is_edge(NodeRef a, NodeRef b) const noexcept;

    /// Throws TopologyViolation unless `from -> to` is a tree edge.
    void check_link(NodeRef from, NodeRef to) const;

    /// Exactly one root and every node reaches it through parent links.
    bool is_tree() const;

private:
    struct Entry {
        bool present = false;
        ControllerLevel level = ControllerLevel::Fog;
        std::optional<ControllerId> parent;
    };
    std::vector<Entry> controllers_;
    std::vector<std::optional<ControllerId>> worker_parent_;
};

}  // namespace syncsim
