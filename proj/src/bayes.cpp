#include "wwsp/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wwsp/errors.hpp"

namespace wwsp {

std::vector<JunctionCpd::Row> JunctionCpd::rows() const {
    if (parents_.size() > 24) {
        throw ValidationError("refusing to materialize CPD of junction " +
                              std::to_string(junction_) + ": " + std::to_string(parents_.size()) +
                              " parents (limit 24)");
    }
    std::vector<Row> out;
    const std::uint64_t n = std::uint64_t{1} << parents_.size();
    out.reserve(n);
    for (std::uint64_t bits = 0; bits < n; ++bits) {
        out.push_back(Row{bits, probability(bits, false), probability(bits, true)});
    }
    return out;
}

const JunctionCpd& OrGateNet::cpd(NodeId junction) const {
    auto it = std::lower_bound(cpds_.begin(), cpds_.end(), junction,
                               [](const JunctionCpd& c, NodeId id) { return c.junction() < id; });
    if (it == cpds_.end() || it->junction() != junction) {
        throw ValidationError("node " + std::to_string(junction) + " is not a junction");
    }
    return *it;
}

OrGateNet build_bayes_net(WastewaterGraph graph, const std::map<NodeId, double>& leaf_priors) {
    for (const auto& [id, p] : leaf_priors) {
        if (!graph.contains(id) || !graph.is_leaf(id)) {
            throw ValidationError("outbreak prior given for non-leaf node " + std::to_string(id));
        }
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            throw ValidationError("outbreak prior of leaf " + std::to_string(id) +
                                  " must lie in [0, 1]");
        }
    }
    std::vector<double> priors(graph.leaf_count());
    for (NodeId leaf : graph.leaf_ids()) {
        auto it = leaf_priors.find(leaf);
        if (it == leaf_priors.end()) {
            throw ValidationError("no outbreak prior for leaf " + std::to_string(leaf));
        }
        priors[graph.leaf_index(leaf)] = it->second;
    }
    std::vector<JunctionCpd> cpds;
    for (NodeId id : graph.node_ids()) {
        if (graph.is_leaf(id)) continue;
        auto parents = graph.parents(id);
        cpds.emplace_back(id, std::vector<NodeId>(parents.begin(), parents.end()));
    }
    return OrGateNet(std::move(graph), std::move(priors), std::move(cpds));
}

OrGateNet build_bayes_net(const Network& network) {
    std::map<NodeId, double> priors;
    for (NodeId leaf : network.graph.leaf_ids()) {
        auto it = network.attributes.find(leaf);
        if (it == network.attributes.end()) {
            throw ValidationError("leaf " + std::to_string(leaf) + " has no attributes");
        }
        priors[leaf] = effective_prior(it->second);
    }
    return build_bayes_net(network.graph, priors);
}

double PosteriorVector::at(NodeId leaf) const {
    auto it = std::lower_bound(leaf_ids.begin(), leaf_ids.end(), leaf);
    if (it == leaf_ids.end() || *it != leaf) {
        throw ValidationError("unknown leaf " + std::to_string(leaf));
    }
    return probs[static_cast<std::size_t>(it - leaf_ids.begin())];
}

ObservationSet simulate_observations(const OrGateNet& net, const Scenario& scenario,
                                     std::span<const NodeId> placement) {
    const WastewaterGraph& g = net.graph();
    if (scenario.outbreak.size() != g.leaf_count()) {
        throw ValidationError("scenario has " + std::to_string(scenario.outbreak.size()) +
                              " bits, graph has " + std::to_string(g.leaf_count()) + " leaves");
    }
    ObservationSet out;
    for (NodeId w : placement) {
        out.readings[w] = (g.upstream_mask(w) & scenario.outbreak).any();
    }
    return out;
}

namespace detail {

void posterior_core(const OrGateNet& net, std::span<const std::pair<NodeId, bool>> readings,
                    PosteriorWorkspace& ws, std::vector<double>& probs_out) {
    const WastewaterGraph& g = net.graph();
    const std::vector<double>& priors = net.priors();
    const std::size_t n_leaves = g.leaf_count();

    probs_out.assign(priors.begin(), priors.end());
    ws.forced_false.resize(n_leaves);
    ws.forced_false.reset();
    ws.true_sets.clear();
    ws.minimal_sets.clear();
    ws.or_probs.clear();

    for (const auto& [node, value] : readings) {
        if (!value) ws.forced_false |= g.upstream_mask(node);
    }
    for (std::size_t i = ws.forced_false.find_first(); i != LeafMask::npos;
         i = ws.forced_false.find_next(i)) {
        if (priors[i] >= 1.0) {
            throw InconsistentEvidenceError(
                "leaf " + std::to_string(g.leaf_ids()[i]) +
                " has prior 1 but a downstream sensor read negative");
        }
    }

    // Each positive reading constrains the OR of its upstream leaves not
    // already forced off.
    for (const auto& [node, value] : readings) {
        if (!value) continue;
        LeafMask active = g.upstream_mask(node);
        active -= ws.forced_false;
        if (active.none()) {
            throw InconsistentEvidenceError(
                "sensor at node " + std::to_string(node) +
                " read positive but every upstream leaf is excluded by negative readings");
        }
        ws.true_sets.push_back(std::move(active));
    }

    // Upstream-leaf sets in a tree form a laminar family, and subtracting a
    // common mask preserves that, so the inclusion-minimal constraint sets
    // are pairwise disjoint and imply all the others.
    std::sort(ws.true_sets.begin(), ws.true_sets.end(),
              [](const LeafMask& a, const LeafMask& b) { return a.count() < b.count(); });
    for (LeafMask& s : ws.true_sets) {
        bool implied = false;
        for (const LeafMask& m : ws.minimal_sets) {
            if (m.is_subset_of(s)) {
                implied = true;
                break;
            }
        }
        if (!implied) ws.minimal_sets.push_back(std::move(s));
    }

    for (const LeafMask& m : ws.minimal_sets) {
        double log_all_off = 0.0;
        bool certain = false;
        for (std::size_t i = m.find_first(); i != LeafMask::npos; i = m.find_next(i)) {
            if (priors[i] >= 1.0) {
                certain = true;
                break;
            }
            log_all_off += std::log1p(-priors[i]);
        }
        const double q = certain ? 1.0 : -std::expm1(log_all_off);
        if (q <= 0.0) {
            throw InconsistentEvidenceError(
                "a positive reading constrains only leaves with prior 0");
        }
        ws.or_probs.push_back(q);
    }

    for (std::size_t i = ws.forced_false.find_first(); i != LeafMask::npos;
         i = ws.forced_false.find_next(i)) {
        probs_out[i] = 0.0;
    }
    for (std::size_t s = 0; s < ws.minimal_sets.size(); ++s) {
        const LeafMask& m = ws.minimal_sets[s];
        for (std::size_t i = m.find_first(); i != LeafMask::npos; i = m.find_next(i)) {
            probs_out[i] = priors[i] / ws.or_probs[s];
        }
    }
}

}  // namespace detail

PosteriorVector posterior(const OrGateNet& net, const ObservationSet& observations) {
    std::vector<std::pair<NodeId, bool>> readings(observations.readings.begin(),
                                                  observations.readings.end());
    for (const auto& [node, value] : readings) {
        if (!net.graph().contains(node)) {
            throw ValidationError("observation at unknown node " + std::to_string(node));
        }
        (void)value;
    }
    detail::PosteriorWorkspace ws;
    PosteriorVector out;
    out.leaf_ids = net.graph().leaf_ids();
    detail::posterior_core(net, readings, ws, out.probs);
    return out;
}

PosteriorVector posterior_bruteforce(const OrGateNet& net, const ObservationSet& observations) {
    const WastewaterGraph& g = net.graph();
    const std::size_t n = g.leaf_count();
    if (n > 20) {
        throw ValidationError("brute-force posterior limited to 20 leaves, graph has " +
                              std::to_string(n));
    }
    std::vector<std::pair<std::uint64_t, bool>> constraints;
    for (const auto& [node, value] : observations.readings) {
        if (!g.contains(node)) {
            throw ValidationError("observation at unknown node " + std::to_string(node));
        }
        const LeafMask& m = g.upstream_mask(node);
        std::uint64_t bits = 0;
        for (std::size_t i = m.find_first(); i != LeafMask::npos; i = m.find_next(i)) {
            bits |= std::uint64_t{1} << i;
        }
        constraints.emplace_back(bits, value);
    }

    const std::vector<double>& priors = net.priors();
    std::vector<double> mass(n, 0.0);
    double total = 0.0;
    for (std::uint64_t assign = 0; assign < (std::uint64_t{1} << n); ++assign) {
        bool consistent = true;
        for (const auto& [bits, value] : constraints) {
            if (((assign & bits) != 0) != value) {
                consistent = false;
                break;
            }
        }
        if (!consistent) continue;
        double w = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            w *= ((assign >> i) & 1) ? priors[i] : 1.0 - priors[i];
        }
        total += w;
        for (std::size_t i = 0; i < n; ++i) {
            if ((assign >> i) & 1) mass[i] += w;
        }
    }
    if (total == 0.0) {
        throw InconsistentEvidenceError("observations have probability zero under the priors");
    }
    PosteriorVector out;
    out.leaf_ids = g.leaf_ids();
    out.probs.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.probs[i] = mass[i] / total;
    return out;
}

std::map<NodeId, bool> predict(const PosteriorVector& posteriors, double detection_threshold) {
    if (!(detection_threshold >= 0.0 && detection_threshold < 1.0)) {
        throw ValidationError("detection threshold must lie in [0, 1)");
    }
    std::map<NodeId, bool> out;
    for (std::size_t i = 0; i < posteriors.leaf_ids.size(); ++i) {
        out[posteriors.leaf_ids[i]] = posteriors.probs[i] > detection_threshold;
    }
    return out;
}

}  // namespace wwsp
