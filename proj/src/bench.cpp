#include "wwsp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "wwsp/bayes.hpp"
#include "wwsp/errors.hpp"
#include "wwsp/rng.hpp"

namespace wwsp {

namespace {

constexpr std::uint64_t kTreeStream = 0x74726565;     // structure + attribute draws
constexpr std::uint64_t kPerturbStream = 0x70657274;  // population noise

double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("cannot parse " + what + " value \"" + text + "\" as a number");
    }
}

void check_range(const std::array<double, 2>& range, const std::string& what, double min_lo) {
    if (!std::isfinite(range[0]) || !std::isfinite(range[1]) || range[0] < min_lo ||
        range[1] < range[0]) {
        throw ValidationError("invalid " + what + " range");
    }
}

}  // namespace

Network random_tree(const RandomGraphSpec& spec) {
    if (spec.node_count < 2) {
        throw ValidationError("random graphs need at least 2 nodes");
    }
    if (!(spec.redirect_prob >= 0.0 && spec.redirect_prob <= 1.0)) {
        throw ValidationError("redirect probability must lie in [0, 1]");
    }
    check_range(spec.population_range, "population", 0.0);
    check_range(spec.flow_range, "flow", std::numeric_limits<double>::min());
    if (!(spec.flow_std_fraction >= 0.0) || !std::isfinite(spec.flow_std_fraction)) {
        throw ValidationError("flow std fraction must be non-negative");
    }
    if (!(spec.infection_rate_per_person >= 0.0) ||
        !std::isfinite(spec.infection_rate_per_person)) {
        throw ValidationError("per-person infection rate must be non-negative");
    }

    rng::Stream stream(rng::derive_stream(spec.seed, kTreeStream));

    // Node 0 is the treatment plant; every later node drains into a uniformly
    // chosen earlier one, sometimes redirected one hop.
    std::vector<std::vector<NodeId>> parents(spec.node_count);
    std::vector<std::optional<NodeId>> child(spec.node_count);
    std::vector<WastewaterGraph::Edge> edges;
    for (NodeId t = 1; t < spec.node_count; ++t) {
        NodeId target = static_cast<NodeId>(stream.uniform() * static_cast<double>(t));
        if (stream.bernoulli(spec.redirect_prob)) {
            if (spec.redirect_direction == RedirectDirection::Upstream) {
                if (!parents[target].empty()) {
                    const auto& options = parents[target];
                    target = options[static_cast<std::size_t>(
                        stream.uniform() * static_cast<double>(options.size()))];
                }
            } else if (child[target]) {
                target = *child[target];
            }
        }
        parents[target].push_back(t);
        child[t] = target;
        edges.push_back(WastewaterGraph::Edge{t, target});
    }

    std::vector<WastewaterGraph::NodeSpec> nodes;
    nodes.reserve(spec.node_count);
    for (NodeId id = 0; id < spec.node_count; ++id) {
        nodes.push_back(WastewaterGraph::NodeSpec{
            id, parents[id].empty() ? NodeKind::Leaf : NodeKind::Junction});
    }

    Network net;
    net.graph = WastewaterGraph::build(std::move(nodes), std::move(edges));
    for (NodeId leaf : net.graph.leaf_ids()) {
        LeafAttributes attrs;
        attrs.population = stream.uniform(spec.population_range[0], spec.population_range[1]);
        attrs.flow_mean = stream.uniform(spec.flow_range[0], spec.flow_range[1]);
        attrs.flow_std = spec.flow_std_fraction * *attrs.flow_mean;
        attrs.poisson_rate = spec.infection_rate_per_person * attrs.population;
        net.attributes[leaf] = attrs;
    }
    return net;
}

std::map<NodeId, LeafAttributes> perturb_populations(
    const std::map<NodeId, LeafAttributes>& attrs, double noise_fraction, std::uint64_t seed) {
    if (!(noise_fraction >= 0.0) || !std::isfinite(noise_fraction)) {
        throw ValidationError("noise fraction must be non-negative");
    }
    std::map<NodeId, LeafAttributes> out;
    for (const auto& [leaf, a] : attrs) {
        LeafAttributes p = a;
        rng::Stream stream(rng::derive_stream(seed, leaf, kPerturbStream));
        const double factor = 1.0 + stream.uniform(-noise_fraction, noise_fraction);
        p.population = std::max(0.0, a.population * factor);
        if (a.poisson_rate && a.population > 0.0) {
            p.poisson_rate = *a.poisson_rate * (p.population / a.population);
        }
        out[leaf] = p;
    }
    return out;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    if (name == "metric") return SweepAxis::Metric;
    if (name == "optimizer") return SweepAxis::Optimizer;
    if (name == "lambda") return SweepAxis::Lambda;
    if (name == "concentration-threshold") return SweepAxis::ConcentrationThreshold;
    if (name == "detection-threshold") return SweepAxis::DetectionThreshold;
    throw ValidationError("unknown sweep axis \"" + name +
                          "\" (expected metric, optimizer, lambda, concentration-threshold, or "
                          "detection-threshold)");
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Metric: return "metric";
        case SweepAxis::Optimizer: return "optimizer";
        case SweepAxis::Lambda: return "lambda";
        case SweepAxis::ConcentrationThreshold: return "concentration-threshold";
        case SweepAxis::DetectionThreshold: return "detection-threshold";
    }
    throw ValidationError("unknown sweep axis");
}

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "naive") return OptimizerKind::Naive;
    if (name == "lazy") return OptimizerKind::Lazy;
    if (name == "approx-lazy") return OptimizerKind::ApproxLazy;
    if (name == "stochastic") return OptimizerKind::Stochastic;
    throw ValidationError("unknown optimizer \"" + name +
                          "\" (expected naive, lazy, approx-lazy, or stochastic)");
}

std::string to_string(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Naive: return "naive";
        case OptimizerKind::Lazy: return "lazy";
        case OptimizerKind::ApproxLazy: return "approx-lazy";
        case OptimizerKind::Stochastic: return "stochastic";
    }
    throw ValidationError("unknown optimizer");
}

GreedyResult run_optimizer(const OptimizerParams& params, MemoizedEvaluator& evaluate,
                           std::span<const NodeId> candidates, std::size_t k) {
    switch (params.kind) {
        case OptimizerKind::Naive: return greedy_naive(evaluate, candidates, k);
        case OptimizerKind::Lazy: return greedy_lazy(evaluate, candidates, k);
        case OptimizerKind::ApproxLazy:
            return greedy_approx_lazy(evaluate, candidates, k, params.epsilon);
        case OptimizerKind::Stochastic:
            return greedy_stochastic(evaluate, candidates, k, params.delta, params.seed);
    }
    throw ValidationError("unknown optimizer");
}

std::vector<SweepRow> run_sweep(const Network& network, const SweepSpec& spec) {
    if (spec.values.empty()) throw ValidationError("sweep has no axis values");
    validate(spec.base);

    const auto [reduced, map] = reduce(network);
    const OrGateNet net = build_bayes_net(reduced);

    bool needs_hydraulics = spec.base.concentration_threshold.has_value();
    if (spec.axis == SweepAxis::ConcentrationThreshold) {
        for (const std::string& v : spec.values) {
            if (v != "none") needs_hydraulics = true;
        }
    }
    const SimulationSet sims = prepare_simulations(reduced, spec.scenario_count,
                                                   spec.scenario_seed, spec.source,
                                                   needs_hydraulics);

    std::vector<NodeId> candidates;
    for (NodeId id : reduced.graph.node_ids()) {
        if (!spec.junctions_only || !reduced.graph.is_leaf(id)) candidates.push_back(id);
    }

    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size());
    for (const std::string& value : spec.values) {
        ObjectiveConfig config = spec.base;
        OptimizerParams params = spec.optimizer;
        switch (spec.axis) {
            case SweepAxis::Metric: config.metric = metric_from_string(value); break;
            case SweepAxis::Optimizer: params.kind = optimizer_from_string(value); break;
            case SweepAxis::Lambda: config.lambda = parse_double(value, "lambda"); break;
            case SweepAxis::ConcentrationThreshold:
                if (value == "none") {
                    config.concentration_threshold.reset();
                } else {
                    config.concentration_threshold = parse_double(value, "threshold");
                }
                break;
            case SweepAxis::DetectionThreshold:
                config.detection_threshold = parse_double(value, "threshold");
                break;
        }
        validate(config);

        const SetObjective objective = make_placement_objective(net, sims, config);
        MemoizedEvaluator evaluate(objective);
        const auto start = std::chrono::steady_clock::now();
        const GreedyResult result = run_optimizer(params, evaluate, candidates, spec.k);
        const auto stop = std::chrono::steady_clock::now();

        SweepRow row;
        row.axis = to_string(spec.axis);
        row.value = value;
        row.metrics = evaluate_all_metrics(net, result.placement.nodes, sims, config);
        row.wall_time_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();
        row.seed = spec.scenario_seed;
        row.placement = result.placement.nodes;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "axis,value,accuracy,precision,recall,f1,coverage,combined,wall_time_ms,seed\n";
    for (const SweepRow& row : rows) {
        out << row.axis << ',' << row.value << ',' << row.metrics.accuracy << ','
            << row.metrics.precision << ',' << row.metrics.recall << ',' << row.metrics.f1 << ','
            << row.metrics.coverage << ',' << row.metrics.combined << ',' << row.wall_time_ms
            << ',' << row.seed << '\n';
    }
    return out.str();
}

nlohmann::json sweep_manifest(const SweepSpec& spec) {
    nlohmann::json doc;
    doc["axis"] = to_string(spec.axis);
    doc["values"] = spec.values;
    doc["k"] = spec.k;
    doc["scenarios"] = spec.scenario_count;
    doc["scenario_seed"] = spec.scenario_seed;
    doc["source"] = spec.source == ScenarioSource::Poisson ? "poisson" : "bernoulli";
    doc["junctions_only"] = spec.junctions_only;
    doc["optimizer"] = {{"kind", to_string(spec.optimizer.kind)},
                        {"epsilon", spec.optimizer.epsilon},
                        {"delta", spec.optimizer.delta},
                        {"seed", spec.optimizer.seed}};
    nlohmann::json base;
    base["metric"] = to_string(spec.base.metric);
    base["lambda"] = spec.base.lambda;
    if (spec.base.concentration_threshold) {
        base["concentration_threshold"] = *spec.base.concentration_threshold;
    } else {
        base["concentration_threshold"] = nullptr;
    }
    base["detection_threshold"] = spec.base.detection_threshold;
    base["coverage_mode"] = spec.base.coverage_mode == CoverageMode::AllSources ? "all" : "any";
    base["conjunctive_thresholds"] = spec.base.conjunctive_thresholds;
    doc["objective"] = std::move(base);
    return doc;
}

}  // namespace wwsp
