#pragma once

#include <cstdint>
#include <vector>

#include "wwsp/bench.hpp"
#include "wwsp/network.hpp"

namespace wwsp::testing {

// Two buildings behind a shared junction that drains into the root:
//   1, 2 -> 3 -> 4
inline WastewaterGraph two_building_graph() {
    return WastewaterGraph::build({{1, NodeKind::Leaf},
                                   {2, NodeKind::Leaf},
                                   {3, NodeKind::Junction},
                                   {4, NodeKind::Junction}},
                                  {{1, 3}, {2, 3}, {3, 4}});
}

inline Network two_building_network(double p1 = 0.3, double p2 = 0.6) {
    Network net;
    net.graph = two_building_graph();
    LeafAttributes a1;
    a1.population = 40.0;
    a1.flow_mean = 1000.0;
    a1.flow_std = 100.0;
    a1.outbreak_prior = p1;
    LeafAttributes a2;
    a2.population = 60.0;
    a2.flow_mean = 1000.0;
    a2.flow_std = 100.0;
    a2.outbreak_prior = p2;
    net.attributes = {{1, a1}, {2, a2}};
    return net;
}

// Leaves 1..n draining straight into root 0.
inline WastewaterGraph star_graph(NodeId leaves) {
    std::vector<WastewaterGraph::NodeSpec> nodes{{0, NodeKind::Junction}};
    std::vector<WastewaterGraph::Edge> edges;
    for (NodeId i = 1; i <= leaves; ++i) {
        nodes.push_back({i, NodeKind::Leaf});
        edges.push_back({i, 0});
    }
    return WastewaterGraph::build(std::move(nodes), std::move(edges));
}

// Single path leaf = first -> first+1 -> ... -> last (root).
inline WastewaterGraph chain_graph(NodeId first, NodeId last) {
    std::vector<WastewaterGraph::NodeSpec> nodes{{first, NodeKind::Leaf}};
    std::vector<WastewaterGraph::Edge> edges;
    for (NodeId i = first + 1; i <= last; ++i) {
        nodes.push_back({i, NodeKind::Junction});
        edges.push_back({i - 1, i});
    }
    return WastewaterGraph::build(std::move(nodes), std::move(edges));
}

inline Network random_network(std::uint64_t seed, std::size_t nodes = 25) {
    RandomGraphSpec spec;
    spec.node_count = nodes;
    spec.seed = seed;
    return random_tree(spec);
}

}  // namespace wwsp::testing
