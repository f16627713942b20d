#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wwsp/network.hpp"
#include "wwsp/objective.hpp"
#include "wwsp/optimizer.hpp"
#include "wwsp/scenario.hpp"

namespace wwsp {

// Reading of "redirected to successor nodes ... away from the root":
// Upstream re-attaches the new node to a parent of the picked node (away
// from the root); Downstream to its unique child.
enum class RedirectDirection { Upstream, Downstream };

struct RandomGraphSpec {
    std::size_t node_count = 25;
    double redirect_prob = 0.2;
    std::array<double, 2> population_range{0.0, 100.0};
    std::array<double, 2> flow_range{1000.0, 3000.0};
    std::uint64_t seed = 0;
    RedirectDirection redirect_direction = RedirectDirection::Upstream;
    double flow_std_fraction = 0.1;            // declared default, not a source value
    double infection_rate_per_person = 0.001;  // Poisson rate per head of population
};

// Grows a reverse directed tree by attaching each new node to a uniformly
// chosen existing node (optionally redirected), then assigns populations and
// flows to the resulting leaves.
Network random_tree(const RandomGraphSpec& spec);

// population' = max(0, population * (1 + U[-noise, +noise])); Poisson rates
// are rescaled proportionally.
std::map<NodeId, LeafAttributes> perturb_populations(
    const std::map<NodeId, LeafAttributes>& attrs, double noise_fraction, std::uint64_t seed);

enum class SweepAxis { Metric, Optimizer, Lambda, ConcentrationThreshold, DetectionThreshold };

SweepAxis sweep_axis_from_string(const std::string& name);
std::string to_string(SweepAxis axis);

enum class OptimizerKind { Naive, Lazy, ApproxLazy, Stochastic };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerParams {
    OptimizerKind kind = OptimizerKind::Naive;
    double epsilon = 0.1;  // approx-lazy slack
    double delta = 0.01;   // stochastic failure probability
    std::uint64_t seed = 0;
};

GreedyResult run_optimizer(const OptimizerParams& params, MemoizedEvaluator& evaluate,
                           std::span<const NodeId> candidates, std::size_t k);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Metric;
    std::vector<std::string> values;  // parsed per axis
    ObjectiveConfig base;
    OptimizerParams optimizer;
    std::size_t k = 6;
    std::size_t scenario_count = 1000;
    ScenarioSource source = ScenarioSource::Poisson;
    std::uint64_t scenario_seed = 0;
    bool junctions_only = false;  // restrict candidates to junction nodes
};

struct SweepRow {
    std::string axis;
    std::string value;
    MetricBreakdown metrics;
    double wall_time_ms = 0.0;
    std::uint64_t seed = 0;
    std::vector<NodeId> placement;
};

// One optimized placement per axis value, all sharing one scenario batch and
// hydraulic draws; the graph is reduced before optimization.
std::vector<SweepRow> run_sweep(const Network& network, const SweepSpec& spec);

// Columns: axis, value, accuracy, precision, recall, f1, coverage, combined,
// wall_time_ms, seed.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
nlohmann::json sweep_manifest(const SweepSpec& spec);

}  // namespace wwsp
