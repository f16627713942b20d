#include "wwsp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "wwsp/errors.hpp"

namespace wwsp {

namespace {

std::size_t configured_threads() {
    const char* env = std::getenv("WWSP_THREADS");
    if (!env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) return 1;
    return static_cast<std::size_t>(std::min<long>(v, 64));
}

// Runs fn(i, slot) for i in [0, n); results must be written into per-index
// slots so the outcome never depends on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t threads = std::min(configured_threads(), std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i, std::size_t{0});
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += threads) fn(i, t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct ScenarioOutcome {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
    int indicator = 0;
};

double score_from_counts(const ScenarioOutcome& o, Metric metric) {
    const double tp = static_cast<double>(o.tp);
    const double fp = static_cast<double>(o.fp);
    const double fn = static_cast<double>(o.fn);
    const double tn = static_cast<double>(o.tn);
    const bool no_predicted = o.tp + o.fp == 0;
    const bool no_actual = o.tp + o.fn == 0;
    switch (metric) {
        case Metric::Accuracy:
            return (tp + tn) / (tp + tn + fp + fn);
        case Metric::Precision:
            if (no_predicted) return no_actual ? 1.0 : 0.0;
            return tp / (tp + fp);
        case Metric::Recall:
            if (no_actual) return no_predicted ? 1.0 : 0.0;
            return tp / (tp + fn);
        case Metric::F1:
            if (no_predicted && no_actual) return 1.0;
            // Equals 2PR/(P+R) with the zero conventions above.
            return 2.0 * tp / (2.0 * tp + fp + fn);
    }
    throw ValidationError("unknown metric");
}

std::vector<NodeId> sorted_unique_placement(const WastewaterGraph& graph,
                                            std::span<const NodeId> placement) {
    std::vector<NodeId> nodes(placement.begin(), placement.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (NodeId w : nodes) {
        if (!graph.contains(w)) {
            throw ValidationError("placement names unknown node " + std::to_string(w));
        }
    }
    return nodes;
}

// The full per-scenario pipeline: ideal readings, posterior, prediction
// counts, detectability indicator.
std::vector<ScenarioOutcome> run_scenarios(const OrGateNet& net, std::span<const NodeId> placement,
                                           const SimulationSet& sims,
                                           const ObjectiveConfig& config) {
    const WastewaterGraph& g = net.graph();
    const std::vector<NodeId> nodes = sorted_unique_placement(g, placement);
    const std::size_t n = sims.batch.scenarios.size();
    if (n == 0) throw ValidationError("simulation set has no scenarios");
    if (config.concentration_threshold && sims.propagations.size() != n) {
        throw ValidationError(
            "objective applies a concentration threshold but the simulation set has no "
            "hydraulic propagations");
    }

    const std::size_t threads = std::min(configured_threads(), std::max<std::size_t>(n, 1));
    std::vector<detail::PosteriorWorkspace> workspaces(threads);
    std::vector<std::vector<double>> probs(threads);
    std::vector<std::vector<std::pair<NodeId, bool>>> readings(threads);

    std::vector<ScenarioOutcome> outcomes(n);
    parallel_for(n, [&](std::size_t i, std::size_t slot) {
        const Scenario& sc = sims.batch.scenarios[i];
        if (sc.outbreak.size() != g.leaf_count()) {
            throw ValidationError("scenario " + std::to_string(i) +
                                  " does not match the graph leaf count");
        }
        auto& reading = readings[slot];
        reading.clear();
        for (NodeId w : nodes) {
            reading.emplace_back(w, (g.upstream_mask(w) & sc.outbreak).any());
        }
        detail::posterior_core(net, reading, workspaces[slot], probs[slot]);

        ScenarioOutcome& o = outcomes[i];
        for (std::size_t j = 0; j < g.leaf_count(); ++j) {
            const bool predicted = probs[slot][j] > config.detection_threshold;
            const bool actual = sc.outbreak.test(j);
            if (predicted && actual) {
                ++o.tp;
            } else if (predicted) {
                ++o.fp;
            } else if (actual) {
                ++o.fn;
            } else {
                ++o.tn;
            }
        }
        o.indicator = config.concentration_threshold
                          ? threshold_indicator(g, nodes, sc, sims.propagations[i],
                                                *config.concentration_threshold,
                                                config.coverage_mode,
                                                config.conjunctive_thresholds)
                          : coverage_indicator(g, nodes, sc, config.coverage_mode);
    });
    return outcomes;
}

}  // namespace

void validate(const ObjectiveConfig& config) {
    if (!std::isfinite(config.lambda) || config.lambda < 0.0 || config.lambda > 1.0) {
        throw ValidationError("lambda must lie in [0, 1]");
    }
    if (!(config.detection_threshold >= 0.0 && config.detection_threshold < 1.0)) {
        throw ValidationError("detection threshold must lie in [0, 1)");
    }
    if (config.concentration_threshold &&
        (!std::isfinite(*config.concentration_threshold) || *config.concentration_threshold < 0.0)) {
        throw ValidationError("concentration threshold must be finite and non-negative");
    }
}

Metric metric_from_string(const std::string& name) {
    if (name == "accuracy") return Metric::Accuracy;
    if (name == "precision") return Metric::Precision;
    if (name == "recall") return Metric::Recall;
    if (name == "f1") return Metric::F1;
    throw ValidationError("unknown metric \"" + name +
                          "\" (expected accuracy, precision, recall, or f1)");
}

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::Accuracy: return "accuracy";
        case Metric::Precision: return "precision";
        case Metric::Recall: return "recall";
        case Metric::F1: return "f1";
    }
    throw ValidationError("unknown metric");
}

SimulationSet prepare_simulations(const Network& network, std::size_t count, std::uint64_t seed,
                                  ScenarioSource source, bool with_hydraulics,
                                  SheddingRange shedding) {
    SimulationSet sims;
    sims.batch = sample_scenarios(network, count, seed, source);
    if (with_hydraulics) {
        sims.draws = sample_hydraulics_batch(network, sims.batch, seed, shedding);
        sims.propagations.reserve(sims.draws.size());
        for (const HydraulicDraw& draw : sims.draws) {
            sims.propagations.push_back(propagate(network.graph, draw));
        }
    }
    return sims;
}

double score(const LeafMask& predictions, const LeafMask& truth, Metric metric) {
    if (predictions.size() != truth.size()) {
        throw ValidationError("prediction and truth masks differ in size");
    }
    ScenarioOutcome o;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool p = predictions.test(i);
        const bool a = truth.test(i);
        if (p && a) {
            ++o.tp;
        } else if (p) {
            ++o.fp;
        } else if (a) {
            ++o.fn;
        } else {
            ++o.tn;
        }
    }
    return score_from_counts(o, metric);
}

double score(const std::map<NodeId, bool>& predictions, const std::map<NodeId, bool>& truth,
             Metric metric) {
    if (predictions.size() != truth.size()) {
        throw ValidationError("prediction and truth maps differ in size");
    }
    ScenarioOutcome o;
    auto pit = predictions.begin();
    auto tit = truth.begin();
    for (; pit != predictions.end(); ++pit, ++tit) {
        if (pit->first != tit->first) {
            throw ValidationError("prediction and truth maps cover different leaves");
        }
        if (pit->second && tit->second) {
            ++o.tp;
        } else if (pit->second) {
            ++o.fp;
        } else if (tit->second) {
            ++o.fn;
        } else {
            ++o.tn;
        }
    }
    return score_from_counts(o, metric);
}

int coverage_indicator(const WastewaterGraph& graph, std::span<const NodeId> placement,
                       const Scenario& scenario, CoverageMode mode) {
    if (scenario.outbreak.size() != graph.leaf_count()) {
        throw ValidationError("scenario does not match the graph leaf count");
    }
    if (scenario.outbreak.none()) return 1;
    LeafMask covered(graph.leaf_count());
    for (NodeId w : placement) covered |= graph.upstream_mask(w);
    if (mode == CoverageMode::AllSources) {
        return scenario.outbreak.is_subset_of(covered) ? 1 : 0;
    }
    return (scenario.outbreak & covered).any() ? 1 : 0;
}

int threshold_indicator(const WastewaterGraph& graph, std::span<const NodeId> placement,
                        const Scenario& scenario, const PropagationResult& propagation,
                        double threshold, CoverageMode mode, bool conjunctive) {
    if (scenario.outbreak.size() != graph.leaf_count()) {
        throw ValidationError("scenario does not match the graph leaf count");
    }
    if (scenario.outbreak.none()) return 1;
    LeafMask detected(graph.leaf_count());
    LeafMask covered(graph.leaf_count());
    LeafMask failed(graph.leaf_count());
    for (NodeId w : placement) {
        const LeafMask& up = graph.upstream_mask(w);
        covered |= up;
        if (meets_threshold(propagation, w, threshold)) {
            detected |= up;
        } else {
            failed |= up;
        }
    }
    if (conjunctive) {
        // A leaf counts only when every sensor it reaches sees enough virus.
        detected = covered - failed;
    }
    if (mode == CoverageMode::AllSources) {
        return scenario.outbreak.is_subset_of(detected) ? 1 : 0;
    }
    return (scenario.outbreak & detected).any() ? 1 : 0;
}

EvalReport evaluate_placement(const OrGateNet& net, std::span<const NodeId> placement,
                              const SimulationSet& sims, const ObjectiveConfig& config) {
    validate(config);
    const std::vector<ScenarioOutcome> outcomes = run_scenarios(net, placement, sims, config);
    EvalReport report;
    report.per_scenario.reserve(outcomes.size());
    double sum_score = 0.0;
    double sum_indicator = 0.0;
    double sum_combined = 0.0;
    for (const ScenarioOutcome& o : outcomes) {
        const double s = score_from_counts(o, config.metric);
        const double ind = static_cast<double>(o.indicator);
        sum_score += s;
        sum_indicator += ind;
        sum_combined += config.lambda * s + (1.0 - config.lambda) * ind;
        report.per_scenario.emplace_back(s, ind);
    }
    const double n = static_cast<double>(outcomes.size());
    report.mean_score = sum_score / n;
    report.coverage_fraction = sum_indicator / n;
    report.combined = sum_combined / n;
    return report;
}

double MetricBreakdown::by_metric(Metric metric) const {
    switch (metric) {
        case Metric::Accuracy: return accuracy;
        case Metric::Precision: return precision;
        case Metric::Recall: return recall;
        case Metric::F1: return f1;
    }
    throw ValidationError("unknown metric");
}

MetricBreakdown evaluate_all_metrics(const OrGateNet& net, std::span<const NodeId> placement,
                                     const SimulationSet& sims, const ObjectiveConfig& config) {
    validate(config);
    const std::vector<ScenarioOutcome> outcomes = run_scenarios(net, placement, sims, config);
    MetricBreakdown b;
    double sum_combined = 0.0;
    for (const ScenarioOutcome& o : outcomes) {
        b.accuracy += score_from_counts(o, Metric::Accuracy);
        b.precision += score_from_counts(o, Metric::Precision);
        b.recall += score_from_counts(o, Metric::Recall);
        b.f1 += score_from_counts(o, Metric::F1);
        b.coverage += static_cast<double>(o.indicator);
        sum_combined += config.lambda * score_from_counts(o, config.metric) +
                        (1.0 - config.lambda) * static_cast<double>(o.indicator);
    }
    const double n = static_cast<double>(outcomes.size());
    b.accuracy /= n;
    b.precision /= n;
    b.recall /= n;
    b.f1 /= n;
    b.coverage /= n;
    b.combined = sum_combined / n;
    return b;
}

SetObjective make_placement_objective(const OrGateNet& net, const SimulationSet& sims,
                                      ObjectiveConfig config) {
    validate(config);
    return [&net, &sims, config](const std::vector<NodeId>& nodes) {
        return evaluate_placement(net, nodes, sims, config).combined;
    };
}

SetObjective add_objective(const OrGateNet& net, std::vector<NodeId> current,
                           const SimulationSet& sims, ObjectiveConfig config) {
    validate(config);
    std::sort(current.begin(), current.end());
    current.erase(std::unique(current.begin(), current.end()), current.end());
    return [&net, &sims, config, current = std::move(current)](const std::vector<NodeId>& add) {
        std::vector<NodeId> combined = current;
        for (NodeId w : add) {
            if (std::binary_search(current.begin(), current.end(), w)) {
                throw ValidationError("node " + std::to_string(w) + " is already placed");
            }
            combined.push_back(w);
        }
        return evaluate_placement(net, combined, sims, config).combined;
    };
}

SetObjective remove_objective(const OrGateNet& net, std::vector<NodeId> current,
                              const SimulationSet& sims, ObjectiveConfig config) {
    validate(config);
    std::sort(current.begin(), current.end());
    current.erase(std::unique(current.begin(), current.end()), current.end());
    return [&net, &sims, config, current = std::move(current)](const std::vector<NodeId>& remove) {
        std::vector<NodeId> kept = current;
        for (NodeId w : remove) {
            auto it = std::find(kept.begin(), kept.end(), w);
            if (it == kept.end()) {
                throw ValidationError("node " + std::to_string(w) +
                                      " is not part of the current placement");
            }
            kept.erase(it);
        }
        return evaluate_placement(net, kept, sims, config).combined;
    };
}

}  // namespace wwsp
