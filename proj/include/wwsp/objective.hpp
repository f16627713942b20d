#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wwsp/bayes.hpp"
#include "wwsp/concentration.hpp"
#include "wwsp/network.hpp"
#include "wwsp/scenario.hpp"

namespace wwsp {

enum class Metric { Accuracy, Precision, Recall, F1 };

enum class CoverageMode {
    AllSources,  // every outbreak building must have a sensor downstream
    AnySource    // at least one outbreak building must
};

struct ObjectiveConfig {
    Metric metric = Metric::F1;
    double lambda = 0.5;  // weight on the score term, in [0, 1]
    std::optional<double> concentration_threshold;  // copies/liter; none = pure coverage
    double detection_threshold = 0.5;               // posterior cutoff, in [0, 1)
    CoverageMode coverage_mode = CoverageMode::AllSources;
    // When set, every covering sensor of an outbreak leaf must meet the
    // concentration threshold, not just one.
    bool conjunctive_thresholds = false;
};

void validate(const ObjectiveConfig& config);

Metric metric_from_string(const std::string& name);
std::string to_string(Metric metric);

struct EvalReport {
    double mean_score = 0.0;
    double coverage_fraction = 0.0;
    double combined = 0.0;  // mean of lambda*score + (1-lambda)*indicator
    std::vector<std::pair<double, double>> per_scenario;  // (score, indicator)
};

// Scenarios plus the hydraulic draws and per-scenario propagation cached
// once, so every candidate placement in an optimization run sees the same
// random numbers.
struct SimulationSet {
    ScenarioBatch batch;
    std::vector<HydraulicDraw> draws;             // empty when hydraulics unused
    std::vector<PropagationResult> propagations;  // parallel to draws
};

SimulationSet prepare_simulations(const Network& network, std::size_t count,
                                  std::uint64_t seed, ScenarioSource source,
                                  bool with_hydraulics, SheddingRange shedding = {});

// Confusion-matrix score of a prediction against the true scenario, over the
// positive (outbreak) class. Zero-denominator conventions: with neither
// predicted nor actual positives, precision = recall = f1 = 1; with exactly
// one empty side, the affected metric is 0.
double score(const LeafMask& predictions, const LeafMask& truth, Metric metric);
double score(const std::map<NodeId, bool>& predictions, const std::map<NodeId, bool>& truth,
             Metric metric);

// 1 iff the scenario's outbreak leaves are detectable by the placement
// (all-False scenarios are vacuously detected).
int coverage_indicator(const WastewaterGraph& graph, std::span<const NodeId> placement,
                       const Scenario& scenario, CoverageMode mode = CoverageMode::AllSources);

// Coverage that additionally requires detecting sensors to meet the
// concentration threshold computed from the scenario's hydraulic draw.
int threshold_indicator(const WastewaterGraph& graph, std::span<const NodeId> placement,
                        const Scenario& scenario, const PropagationResult& propagation,
                        double threshold, CoverageMode mode = CoverageMode::AllSources,
                        bool conjunctive = false);

// Full pipeline per scenario: simulate observations, condition, predict,
// score, indicate; deterministic for a given simulation set regardless of
// thread count (WWSP_THREADS).
EvalReport evaluate_placement(const OrGateNet& net, std::span<const NodeId> placement,
                              const SimulationSet& sims, const ObjectiveConfig& config);

// The placement evaluated under every metric at once, plus coverage and the
// combined objective under config.metric.
struct MetricBreakdown {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double coverage = 0.0;
    double combined = 0.0;
    double by_metric(Metric metric) const;
};
MetricBreakdown evaluate_all_metrics(const OrGateNet& net, std::span<const NodeId> placement,
                                     const SimulationSet& sims, const ObjectiveConfig& config);

using SetObjective = std::function<double(const std::vector<NodeId>&)>;

// combined objective of a placement set.
SetObjective make_placement_objective(const OrGateNet& net, const SimulationSet& sims,
                                      ObjectiveConfig config);
// Evaluates current ∪ W for candidate additions W (must not overlap current).
SetObjective add_objective(const OrGateNet& net, std::vector<NodeId> current,
                           const SimulationSet& sims, ObjectiveConfig config);
// Evaluates current ∖ W for removal sets W (must lie within current).
SetObjective remove_objective(const OrGateNet& net, std::vector<NodeId> current,
                              const SimulationSet& sims, ObjectiveConfig config);

}  // namespace wwsp
