#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wwsp/network.hpp"
#include "wwsp/objective.hpp"

namespace wwsp {

// A sensor placement: selection order is preserved, |nodes| <= k.
struct Placement {
    std::vector<NodeId> nodes;
    std::size_t k = 0;

    std::vector<NodeId> sorted() const;
};

struct OptimizerTrace {
    struct Row {
        std::size_t iteration;     // 1-based
        NodeId node;               // chosen this iteration
        double gain;               // marginal gain of the chosen node
        double objective;          // objective value after adding it
        std::size_t evaluations;   // objective computations this iteration
    };
    std::vector<Row> rows;
    std::size_t total_evaluations = 0;
    // Times a re-evaluated gain exceeded its stale upper bound; nonzero only
    // for non-submodular objectives (lazy variants).
    std::size_t bound_violations = 0;
};

// Caches objective values by placement set (order-insensitive) and counts
// underlying computations, shared by the lazy variants' repeated prefix
// queries.
class MemoizedEvaluator {
public:
    explicit MemoizedEvaluator(SetObjective fn) : fn_(std::move(fn)) {}

    double operator()(std::vector<NodeId> nodes);
    std::size_t evaluations() const { return misses_; }

private:
    SetObjective fn_;
    std::map<std::vector<NodeId>, double> cache_;
    std::size_t misses_ = 0;
};

struct GreedyResult {
    Placement placement;
    OptimizerTrace trace;
};

// Ties everywhere break toward the lowest node id, which makes lazy runs
// reproduce naive runs exactly on submodular objectives.

// Evaluates every remaining candidate each iteration, takes the largest
// marginal gain.
GreedyResult greedy_naive(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                          std::size_t k);

// CELF: keeps stale upper bounds in a max-priority queue and re-evaluates
// only the top until it stays on top. Identical placements to naive whenever
// true marginal gains are non-increasing in the growing set.
GreedyResult greedy_lazy(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                         std::size_t k);

// Lazy variant accepting a re-evaluated top once its fresh gain reaches
// (1 - epsilon) times the next stale bound; epsilon = 0 reduces to lazy.
GreedyResult greedy_approx_lazy(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                                std::size_t k, double epsilon);

// Each iteration evaluates a uniform random subset of the remaining
// candidates of size ceil(|candidates|/k * ln(1/delta)).
GreedyResult greedy_stochastic(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                               std::size_t k, double delta, std::uint64_t seed);

// Removes r nodes one at a time, each time the node whose removal costs the
// least objective.
Placement greedy_remove(MemoizedEvaluator& evaluate, const Placement& current,
                        std::size_t remove_count);

// True argmax over all k-subsets; ties resolve to the lexicographically
// smallest id sequence. Refuses above 10^6 combinations.
Placement exhaustive(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                     std::size_t k);

// CSV rows: iteration, node, gain, evaluations.
std::string trace_to_csv(const OptimizerTrace& trace);

}  // namespace wwsp
