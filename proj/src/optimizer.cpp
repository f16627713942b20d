#include "wwsp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "wwsp/errors.hpp"
#include "wwsp/rng.hpp"

namespace wwsp {

namespace {

// Slack when deciding whether a re-evaluated gain rose above its stale bound;
// absorbs float noise so submodular objectives never report violations.
constexpr double kBoundTolerance = 1e-12;

std::vector<NodeId> sorted_unique(std::span<const NodeId> candidates) {
    std::vector<NodeId> out(candidates.begin(), candidates.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct HeapEntry {
    double gain;       // stale upper bound (fresh right after evaluation)
    double value;      // objective of current-set-at-evaluation + node
    NodeId node;
    // Max-heap on gain; equal gains surface the lowest node id first.
    friend bool operator<(const HeapEntry& a, const HeapEntry& b) {
        if (a.gain != b.gain) return a.gain < b.gain;
        return a.node > b.node;
    }
};

GreedyResult lazy_core(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                       std::size_t k, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw ValidationError("epsilon must lie in [0, 1)");
    }
    GreedyResult result;
    const std::vector<NodeId> pool = sorted_unique(candidates);
    k = std::min(k, pool.size());
    result.placement.k = k;
    if (k == 0) return result;

    const std::size_t run_start = evaluate.evaluations();
    double current_value = evaluate({});
    std::vector<NodeId> current;

    std::priority_queue<HeapEntry> heap;
    for (NodeId v : pool) {
        const double value = evaluate({v});
        heap.push(HeapEntry{value - current_value, value, v});
    }
    const std::size_t init_evals = evaluate.evaluations() - run_start;

    for (std::size_t it = 1; it <= k; ++it) {
        const std::size_t iter_start = evaluate.evaluations();
        HeapEntry chosen{};
        if (it == 1) {
            // Initial gains are exact, so the top is the true argmax.
            chosen = heap.top();
            heap.pop();
        } else if (epsilon == 0.0) {
            // Exact mode must reproduce the naive scan bit for bit, including
            // its lowest-id tie-breaks. Stale bounds carry float noise from
            // older base sets, so every entry whose bound reaches into the
            // noise band around the best fresh gain is re-evaluated before
            // the pick is committed; fresh gains share one base and compare
            // exactly like naive's objective values.
            HeapEntry best{-std::numeric_limits<double>::infinity(), 0.0, 0};
            std::vector<HeapEntry> refreshed;
            while (!heap.empty() &&
                   (refreshed.empty() || heap.top().gain > best.gain - kBoundTolerance)) {
                HeapEntry top = heap.top();
                heap.pop();
                std::vector<NodeId> trial = current;
                trial.push_back(top.node);
                const double value = evaluate(std::move(trial));
                const double gain = value - current_value;
                if (gain > top.gain + kBoundTolerance) ++result.trace.bound_violations;
                refreshed.push_back(HeapEntry{gain, value, top.node});
                if (best < refreshed.back()) best = refreshed.back();
            }
            chosen = best;
            // Losers re-enter with tightened bounds for later iterations.
            for (const HeapEntry& entry : refreshed) {
                if (entry.node != chosen.node) heap.push(entry);
            }
        } else {
            while (true) {
                HeapEntry top = heap.top();
                heap.pop();
                std::vector<NodeId> trial = current;
                trial.push_back(top.node);
                const double value = evaluate(std::move(trial));
                const double gain = value - current_value;
                if (gain > top.gain + kBoundTolerance) ++result.trace.bound_violations;
                if (heap.empty()) {
                    chosen = HeapEntry{gain, value, top.node};
                    break;
                }
                const double next_bound = heap.top().gain;
                // Accept once the fresh gain reaches the discounted runner-up
                // bound. A refreshed entry that stays on top of the heap is
                // always taken, which keeps the loop finite even when every
                // remaining gain is negative noise.
                if (gain >= (1.0 - epsilon) * next_bound || gain >= next_bound) {
                    chosen = HeapEntry{gain, value, top.node};
                    break;
                }
                heap.push(HeapEntry{gain, value, top.node});
            }
        }
        current.push_back(chosen.node);
        current_value = chosen.value;
        result.trace.rows.push_back(OptimizerTrace::Row{
            it, chosen.node, chosen.gain, chosen.value, evaluate.evaluations() - iter_start});
    }
    // The up-front exact gains belong to the first selection.
    if (!result.trace.rows.empty()) {
        result.trace.rows.front().evaluations += init_evals;
    }
    result.placement.nodes = std::move(current);
    result.trace.total_evaluations = evaluate.evaluations() - run_start;
    return result;
}

}  // namespace

std::vector<NodeId> Placement::sorted() const {
    std::vector<NodeId> out = nodes;
    std::sort(out.begin(), out.end());
    return out;
}

double MemoizedEvaluator::operator()(std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    auto it = cache_.find(nodes);
    if (it != cache_.end()) return it->second;
    ++misses_;
    const double value = fn_(nodes);
    cache_.emplace(std::move(nodes), value);
    return value;
}

GreedyResult greedy_naive(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                          std::size_t k) {
    GreedyResult result;
    std::vector<NodeId> remaining = sorted_unique(candidates);
    k = std::min(k, remaining.size());
    result.placement.k = k;
    if (k == 0) return result;

    const std::size_t run_start = evaluate.evaluations();
    double current_value = evaluate({});
    const std::size_t base_evals = evaluate.evaluations() - run_start;
    std::vector<NodeId> current;

    for (std::size_t it = 1; it <= k; ++it) {
        const std::size_t iter_start = evaluate.evaluations();
        double best_value = -std::numeric_limits<double>::infinity();
        std::size_t best_pos = remaining.size();
        for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
            std::vector<NodeId> trial = current;
            trial.push_back(remaining[pos]);
            const double value = evaluate(std::move(trial));
            if (value > best_value) {  // ties keep the earlier (lower) id
                best_value = value;
                best_pos = pos;
            }
        }
        const NodeId chosen = remaining[best_pos];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
        result.trace.rows.push_back(OptimizerTrace::Row{it, chosen, best_value - current_value,
                                                        best_value,
                                                        evaluate.evaluations() - iter_start});
        current.push_back(chosen);
        current_value = best_value;
    }
    if (!result.trace.rows.empty()) {
        result.trace.rows.front().evaluations += base_evals;  // the empty-set baseline
    }
    result.placement.nodes = std::move(current);
    result.trace.total_evaluations = evaluate.evaluations() - run_start;
    return result;
}

GreedyResult greedy_lazy(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                         std::size_t k) {
    return lazy_core(evaluate, candidates, k, 0.0);
}

GreedyResult greedy_approx_lazy(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                                std::size_t k, double epsilon) {
    return lazy_core(evaluate, candidates, k, epsilon);
}

GreedyResult greedy_stochastic(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                               std::size_t k, double delta, std::uint64_t seed) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ValidationError("delta must lie in (0, 1)");
    }
    GreedyResult result;
    std::vector<NodeId> remaining = sorted_unique(candidates);
    const std::size_t pool_size = remaining.size();
    k = std::min(k, pool_size);
    result.placement.k = k;
    if (k == 0) return result;

    const std::size_t run_start = evaluate.evaluations();
    double current_value = evaluate({});
    const std::size_t base_evals = evaluate.evaluations() - run_start;
    std::vector<NodeId> current;
    const double per_iteration = std::ceil(static_cast<double>(pool_size) /
                                           static_cast<double>(k) * std::log(1.0 / delta));
    const std::size_t sample_target = static_cast<std::size_t>(std::max(per_iteration, 1.0));
    rng::Stream stream(rng::derive_stream(seed, 0x73746f63));  // sampling stream

    for (std::size_t it = 1; it <= k; ++it) {
        const std::size_t iter_start = evaluate.evaluations();
        const std::size_t sample_size = std::min(sample_target, remaining.size());
        // Partial Fisher-Yates over the (sorted) remaining pool.
        std::vector<NodeId> pool = remaining;
        for (std::size_t i = 0; i < sample_size; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(stream.uniform() *
                                             static_cast<double>(pool.size() - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<NodeId> sampled(pool.begin(),
                                    pool.begin() + static_cast<std::ptrdiff_t>(sample_size));
        std::sort(sampled.begin(), sampled.end());

        double best_value = -std::numeric_limits<double>::infinity();
        NodeId best_node = sampled.front();
        for (NodeId v : sampled) {
            std::vector<NodeId> trial = current;
            trial.push_back(v);
            const double value = evaluate(std::move(trial));
            if (value > best_value) {
                best_value = value;
                best_node = v;
            }
        }
        remaining.erase(std::find(remaining.begin(), remaining.end(), best_node));
        result.trace.rows.push_back(OptimizerTrace::Row{it, best_node, best_value - current_value,
                                                        best_value,
                                                        evaluate.evaluations() - iter_start});
        current.push_back(best_node);
        current_value = best_value;
    }
    if (!result.trace.rows.empty()) {
        result.trace.rows.front().evaluations += base_evals;
    }
    result.placement.nodes = std::move(current);
    result.trace.total_evaluations = evaluate.evaluations() - run_start;
    return result;
}

Placement greedy_remove(MemoizedEvaluator& evaluate, const Placement& current,
                        std::size_t remove_count) {
    if (remove_count > current.nodes.size()) {
        throw ValidationError("cannot remove " + std::to_string(remove_count) +
                              " sensors from a placement of " +
                              std::to_string(current.nodes.size()));
    }
    std::vector<NodeId> kept = current.nodes;
    for (std::size_t r = 0; r < remove_count; ++r) {
        double best_value = -std::numeric_limits<double>::infinity();
        std::size_t best_pos = 0;
        // Evaluate drops in ascending id order so ties drop the lowest id.
        std::vector<std::size_t> order(kept.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return kept[a] < kept[b]; });
        for (std::size_t pos : order) {
            std::vector<NodeId> trial;
            trial.reserve(kept.size() - 1);
            for (std::size_t i = 0; i < kept.size(); ++i) {
                if (i != pos) trial.push_back(kept[i]);
            }
            const double value = evaluate(std::move(trial));
            if (value > best_value) {
                best_value = value;
                best_pos = pos;
            }
        }
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }
    Placement out;
    out.nodes = std::move(kept);
    out.k = out.nodes.size();
    return out;
}

Placement exhaustive(MemoizedEvaluator& evaluate, std::span<const NodeId> candidates,
                     std::size_t k) {
    const std::vector<NodeId> pool = sorted_unique(candidates);
    k = std::min(k, pool.size());
    Placement best;
    best.k = k;
    if (k == 0) return best;

    double combinations = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        combinations = combinations * static_cast<double>(pool.size() - i) /
                       static_cast<double>(i + 1);
        if (combinations > 1e6) {
            throw ValidationError("exhaustive search over " + std::to_string(pool.size()) +
                                  " candidates choose " + std::to_string(k) +
                                  " exceeds 1e6 combinations");
        }
    }

    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    double best_value = -std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<NodeId> trial(k);
        for (std::size_t i = 0; i < k; ++i) trial[i] = pool[idx[i]];
        const double value = evaluate(trial);
        if (value > best_value) {  // lexicographic order makes first-win smallest
            best_value = value;
            best.nodes = std::move(trial);
        }
        // Advance to the next k-combination.
        std::size_t pos = k;
        while (pos > 0 && idx[pos - 1] == pool.size() - k + pos - 1) --pos;
        if (pos == 0) break;
        ++idx[pos - 1];
        for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
    }
    return best;
}

std::string trace_to_csv(const OptimizerTrace& trace) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "iteration,node,gain,evaluations\n";
    for (const OptimizerTrace::Row& row : trace.rows) {
        out << row.iteration << ',' << row.node << ',' << row.gain << ',' << row.evaluations
            << '\n';
    }
    return out.str();
}

}  // namespace wwsp
