#include "wwsp/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wwsp/errors.hpp"

namespace wwsp {

std::size_t PropagationResult::index_of(NodeId node) const {
    auto it = std::lower_bound(node_ids.begin(), node_ids.end(), node);
    if (it == node_ids.end() || *it != node) {
        throw ValidationError("unknown node " + std::to_string(node));
    }
    return static_cast<std::size_t>(it - node_ids.begin());
}

double PropagationResult::concentration_at(NodeId node) const {
    return concentration[index_of(node)];
}

double PropagationResult::flow_at(NodeId node) const { return cum_flow[index_of(node)]; }

double PropagationResult::copies_at(NodeId node) const { return cum_copies[index_of(node)]; }

PropagationResult propagate(const WastewaterGraph& graph, const HydraulicDraw& draw) {
    if (draw.flows.size() != graph.leaf_count() || draw.copies.size() != graph.leaf_count()) {
        throw ValidationError("hydraulic draw does not match graph leaf count");
    }
    PropagationResult result;
    result.node_ids = graph.node_ids();
    result.cum_copies.resize(graph.node_count());
    result.cum_flow.resize(graph.node_count());
    result.concentration.resize(graph.node_count());

    auto index = [&](NodeId id) {
        auto it = std::lower_bound(result.node_ids.begin(), result.node_ids.end(), id);
        return static_cast<std::size_t>(it - result.node_ids.begin());
    };

    for (NodeId id : graph.topological_order()) {
        const std::size_t at = index(id);
        if (graph.is_leaf(id)) {
            const std::size_t li = graph.leaf_index(id);
            const double flow = draw.flows[li];
            if (!(std::isfinite(flow)) || flow <= 0.0) {
                throw ValidationError("leaf " + std::to_string(id) +
                                      " has non-positive flow in the hydraulic draw");
            }
            if (!(draw.copies[li] >= 0.0)) {
                throw ValidationError("leaf " + std::to_string(id) +
                                      " has negative virus copies in the hydraulic draw");
            }
            result.cum_flow[at] = flow;
            result.cum_copies[at] = draw.copies[li];
        } else {
            double flow = 0.0;
            double copies = 0.0;
            for (NodeId parent : graph.parents(id)) {
                const std::size_t pi = index(parent);
                flow += result.cum_flow[pi];
                copies += result.cum_copies[pi];
            }
            result.cum_flow[at] = flow;
            result.cum_copies[at] = copies;
        }
        result.concentration[at] = result.cum_copies[at] / result.cum_flow[at];
    }
    return result;
}

bool meets_threshold(const PropagationResult& result, NodeId node, double threshold) {
    if (!std::isfinite(threshold) || threshold < 0.0) {
        throw ValidationError("concentration threshold must be finite and non-negative");
    }
    return result.concentration_at(node) >= threshold;
}

std::string propagation_to_csv(const PropagationResult& result) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "node,cum_flow,cum_copies,concentration\n";
    for (std::size_t i = 0; i < result.node_ids.size(); ++i) {
        out << result.node_ids[i] << ',' << result.cum_flow[i] << ',' << result.cum_copies[i]
            << ',' << result.concentration[i] << '\n';
    }
    return out.str();
}

}  // namespace wwsp
