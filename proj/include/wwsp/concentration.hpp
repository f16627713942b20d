#pragma once

#include <string>
#include <vector>

#include "wwsp/network.hpp"
#include "wwsp/scenario.hpp"

namespace wwsp {

// Cumulative copies/flow and the resulting concentration at every node,
// indexed like graph.node_ids().
struct PropagationResult {
    std::vector<NodeId> node_ids;       // ascending
    std::vector<double> cum_copies;     // copies/day
    std::vector<double> cum_flow;       // liters/day
    std::vector<double> concentration;  // copies/liter

    double concentration_at(NodeId node) const;
    double flow_at(NodeId node) const;
    double copies_at(NodeId node) const;

private:
    std::size_t index_of(NodeId node) const;
};

// Conservation of mass, leaves to root: a node's cumulative copies and flow
// are the sums over its parents' cumulative quantities; concentration is
// their ratio.
PropagationResult propagate(const WastewaterGraph& graph, const HydraulicDraw& draw);

// Inclusive comparison: a concentration exactly at the threshold counts as
// detectable.
bool meets_threshold(const PropagationResult& result, NodeId node, double threshold);

// CSV rows: node id, cum_flow, cum_copies, concentration.
std::string propagation_to_csv(const PropagationResult& result);

}  // namespace wwsp
