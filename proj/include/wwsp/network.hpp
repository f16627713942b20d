#pragma once

#include <boost/dynamic_bitset.hpp>
#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wwsp {

using NodeId = std::uint32_t;

enum class NodeKind { Leaf, Junction };

// Per-building data. Only leaves carry attributes; a leaf needs at least one
// of outbreak_prior / poisson_rate. Flow fields are required only by the
// hydraulic sampler.
struct LeafAttributes {
    double population = 0.0;
    std::optional<double> flow_mean;
    std::optional<double> flow_std;
    std::optional<double> outbreak_prior;  // Bernoulli P(outbreak)
    std::optional<double> poisson_rate;    // expected infected per sampling period
};

// Set of leaves, indexed by leaf position (ascending leaf id).
using LeafMask = boost::dynamic_bitset<>;

// Reverse directed tree: every edge points along wastewater flow, leaves
// (buildings) upstream, a unique root (treatment plant) downstream.
// Immutable after build(); safe for unrestricted concurrent reads.
class WastewaterGraph {
public:
    struct NodeSpec {
        NodeId id;
        NodeKind kind;
    };
    struct Edge {
        NodeId from;
        NodeId to;
        friend bool operator==(const Edge&, const Edge&) = default;
    };

    // Validates all structural invariants; throws ValidationError naming the
    // offending nodes otherwise.
    static WastewaterGraph build(std::vector<NodeSpec> nodes, std::vector<Edge> edges);

    // Empty graph; every non-empty instance comes out of build().
    WastewaterGraph() = default;

    std::size_t node_count() const { return ids_.size(); }
    std::size_t leaf_count() const { return leaf_ids_.size(); }
    const std::vector<NodeId>& node_ids() const { return ids_; }    // ascending
    const std::vector<NodeId>& leaf_ids() const { return leaf_ids_; }  // ascending
    const std::vector<Edge>& edges() const { return edges_; }       // sorted (from, to)
    NodeId root() const { return root_; }

    bool contains(NodeId id) const;
    NodeKind kind(NodeId id) const;
    bool is_leaf(NodeId id) const { return kind(id) == NodeKind::Leaf; }

    // Upstream neighbors (edges into the node), ascending.
    std::span<const NodeId> parents(NodeId id) const;
    // Downstream neighbor; empty at the root.
    std::optional<NodeId> child(NodeId id) const;

    // Dense position of a leaf within leaf_ids().
    std::size_t leaf_index(NodeId leaf) const;

    // {l in leaves : directed path l -> node exists, or l == node}.
    const LeafMask& upstream_mask(NodeId id) const;
    std::vector<NodeId> upstream_leaves(NodeId id) const;
    LeafMask leaves_to_mask(std::span<const NodeId> leaves) const;

    // Every node appears after all of its parents (leaves first, root last).
    const std::vector<NodeId>& topological_order() const { return topo_order_; }

private:
    std::size_t index_of(NodeId id) const;  // throws on unknown id

    std::vector<NodeId> ids_;
    std::vector<NodeKind> kinds_;
    std::vector<std::vector<NodeId>> parents_;
    std::vector<std::optional<NodeId>> child_;
    std::vector<Edge> edges_;
    std::vector<NodeId> leaf_ids_;
    std::vector<LeafMask> upstream_masks_;
    std::vector<NodeId> topo_order_;
    NodeId root_ = 0;
};

// Maps every node of the pre-reduction graph either into the kept set or to
// a retained representative with an identical upstream-leaf set.
struct ReductionMap {
    std::vector<NodeId> kept;  // ascending
    std::map<NodeId, NodeId> removed_to_representative;
};

// Graph plus per-leaf attributes.
struct Network {
    WastewaterGraph graph;
    std::map<NodeId, LeafAttributes> attributes;
};

// Splices out every non-leaf node with in-degree 1 and out-degree 1,
// reconnecting its unique parent to its unique child. Node ids are preserved;
// the leaf set is unchanged; the result is a fixed point (idempotent).
std::pair<WastewaterGraph, ReductionMap> reduce(const WastewaterGraph& graph);
std::pair<Network, ReductionMap> reduce(const Network& network);

// JSON document I/O. Schema:
//   {"nodes":[{"id":int,"kind":"leaf"|"junction","population":float?,
//              "flow_mean":float?,"flow_std":float?,"outbreak_prior":float?,
//              "poisson_rate":float?}],
//    "edges":[{"from":int,"to":int}]}
Network load_network(const nlohmann::json& doc);
Network load_network_file(const std::string& path);
nlohmann::json network_to_json(const Network& network);
void save_network_file(const Network& network, const std::string& path);

struct DotAnnotations {
    std::map<NodeId, std::string> labels;  // explicit labels win
    std::vector<NodeId> highlights;        // sensor nodes, drawn with a distinct style
    bool population_percent = false;       // leaf labels as % of total population
};

// Deterministic Graphviz rendering: ascending node order, sorted edges;
// identical input yields byte-identical output.
std::string export_dot(const Network& network, const DotAnnotations& annotations = {});

}  // namespace wwsp
