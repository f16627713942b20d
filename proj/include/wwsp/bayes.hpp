#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "wwsp/network.hpp"
#include "wwsp/scenario.hpp"

namespace wwsp {

// Deterministic OR rule of one junction over its parents' boolean states.
// Semantically the full 2^|parents| CPD table; rows() materializes it.
class JunctionCpd {
public:
    JunctionCpd(NodeId junction, std::vector<NodeId> parents)
        : junction_(junction), parents_(std::move(parents)) {}

    NodeId junction() const { return junction_; }
    const std::vector<NodeId>& parents() const { return parents_; }

    // P(junction = state | parent states); bit i of parent_bits is parents()[i].
    // 1 for the OR-consistent row, 0 otherwise.
    double probability(std::uint64_t parent_bits, bool state) const {
        return (parent_bits != 0) == state ? 1.0 : 0.0;
    }

    struct Row {
        std::uint64_t parent_bits;
        double p_false;
        double p_true;
    };
    std::vector<Row> rows() const;  // throws above 24 parents

private:
    NodeId junction_;
    std::vector<NodeId> parents_;
};

// Binary Bayesian network over the wastewater graph: independent Bernoulli
// leaves, deterministic OR junctions. Immutable after build.
class OrGateNet {
public:
    OrGateNet() = default;  // empty; usable nets come out of build_bayes_net()

    const WastewaterGraph& graph() const { return graph_; }
    const std::vector<double>& priors() const { return priors_; }  // by leaf index
    double prior(NodeId leaf) const { return priors_[graph_.leaf_index(leaf)]; }
    const JunctionCpd& cpd(NodeId junction) const;
    const std::vector<JunctionCpd>& cpds() const { return cpds_; }  // ascending id

private:
    friend OrGateNet build_bayes_net(WastewaterGraph graph,
                                     const std::map<NodeId, double>& leaf_priors);
    OrGateNet(WastewaterGraph graph, std::vector<double> priors, std::vector<JunctionCpd> cpds)
        : graph_(std::move(graph)), priors_(std::move(priors)), cpds_(std::move(cpds)) {}

    WastewaterGraph graph_;
    std::vector<double> priors_;
    std::vector<JunctionCpd> cpds_;
};

OrGateNet build_bayes_net(WastewaterGraph graph, const std::map<NodeId, double>& leaf_priors);
// Priors taken as effective_prior() of each leaf's attributes.
OrGateNet build_bayes_net(const Network& network);

// True = virus present in the sample at that node.
struct ObservationSet {
    std::map<NodeId, bool> readings;
};

struct PosteriorVector {
    std::vector<NodeId> leaf_ids;  // ascending
    std::vector<double> probs;     // P(outbreak | observations), by leaf index
    double at(NodeId leaf) const;
};

// Ideal sensor readings under a scenario: the reading at w is the OR of the
// scenario bits over upstream_leaves(w).
ObservationSet simulate_observations(const OrGateNet& net, const Scenario& scenario,
                                     std::span<const NodeId> placement);

// Exact P(outbreak_l | observations), computed on the laminar family of
// upstream-leaf sets. Throws InconsistentEvidenceError when the evidence
// event has probability zero.
PosteriorVector posterior(const OrGateNet& net, const ObservationSet& observations);

// Independent oracle: sums prior mass over all 2^|L| leaf assignments
// consistent with the observations. Capped at 20 leaves.
PosteriorVector posterior_bruteforce(const OrGateNet& net, const ObservationSet& observations);

// Outbreak predicted iff P > detection_threshold (strict); threshold in [0, 1).
std::map<NodeId, bool> predict(const PosteriorVector& posteriors,
                               double detection_threshold = 0.5);

namespace detail {

// Allocation-reusing core for the optimizer's evaluation loop.
struct PosteriorWorkspace {
    LeafMask forced_false;
    std::vector<LeafMask> true_sets;
    std::vector<LeafMask> minimal_sets;
    std::vector<double> or_probs;
};

// readings are (node, value) pairs; probs_out is sized to leaf_count.
void posterior_core(const OrGateNet& net,
                    std::span<const std::pair<NodeId, bool>> readings,
                    PosteriorWorkspace& ws, std::vector<double>& probs_out);

}  // namespace detail

}  // namespace wwsp
