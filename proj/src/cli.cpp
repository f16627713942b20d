#include "wwsp/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "wwsp/bayes.hpp"
#include "wwsp/bench.hpp"
#include "wwsp/errors.hpp"
#include "wwsp/network.hpp"
#include "wwsp/objective.hpp"
#include "wwsp/optimizer.hpp"
#include "wwsp/scenario.hpp"

namespace wwsp {

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("failed to parse " + path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << content;
    if (!out) throw Error("failed writing " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

NodeId parse_node_id(const std::string& key) {
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(key, &used);
        if (used != key.size() || v > std::numeric_limits<NodeId>::max()) {
            throw std::invalid_argument(key);
        }
        return static_cast<NodeId>(v);
    } catch (const std::exception&) {
        throw ValidationError("invalid node id \"" + key + "\"");
    }
}

ScenarioSource source_from_string(const std::string& name) {
    if (name == "poisson") return ScenarioSource::Poisson;
    if (name == "bernoulli") return ScenarioSource::Bernoulli;
    throw ValidationError("unknown scenario source \"" + name + "\"");
}

// Objective flags shared by place/add/remove/sweep; mirrors ObjectiveConfig.
struct ObjectiveOptions {
    std::string metric = "f1";
    std::string objective = "coverage";
    double conc_threshold = 4.8e5;
    double detection_threshold = 0.5;
    double lambda_weight = 0.5;
    std::string coverage_mode = "all";
    bool conjunctive = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--metric", metric, "Localization score to optimize")
            ->check(CLI::IsMember({"accuracy", "precision", "recall", "f1"}))
            ->capture_default_str();
        cmd->add_option("--objective", objective,
                        "coverage: plain detectability; thresholded: detecting sensors must "
                        "also see enough virus")
            ->check(CLI::IsMember({"coverage", "thresholded"}))
            ->capture_default_str();
        cmd->add_option("--conc-threshold", conc_threshold,
                        "Minimum detectable concentration in copies/liter (inclusive: a "
                        "concentration exactly at the threshold counts); used with "
                        "--objective thresholded")
            ->capture_default_str();
        cmd->add_option("--detection-threshold", detection_threshold,
                        "Posterior probability above which a building is predicted infected")
            ->capture_default_str();
        cmd->add_option("--lambda", lambda_weight,
                        "Weight of the score term against the coverage term")
            ->capture_default_str();
        cmd->add_option("--coverage-mode", coverage_mode,
                        "all: every outbreak building must be detectable; any: one suffices")
            ->check(CLI::IsMember({"all", "any"}))
            ->capture_default_str();
        cmd->add_flag("--conjunctive-thresholds", conjunctive,
                      "Require every covering sensor (not just one) to meet the "
                      "concentration threshold");
    }

    ObjectiveConfig to_config() const {
        ObjectiveConfig config;
        config.metric = metric_from_string(metric);
        config.lambda = lambda_weight;
        if (objective == "thresholded") config.concentration_threshold = conc_threshold;
        config.detection_threshold = detection_threshold;
        config.coverage_mode =
            coverage_mode == "any" ? CoverageMode::AnySource : CoverageMode::AllSources;
        config.conjunctive_thresholds = conjunctive;
        return config;
    }
};

struct OptimizerOptions {
    std::string kind = "lazy";
    double epsilon = 0.1;
    double delta = 0.01;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--optimizer", kind, "Greedy variant")
            ->check(CLI::IsMember({"naive", "lazy", "approx-lazy", "stochastic"}))
            ->capture_default_str();
        cmd->add_option("--epsilon", epsilon, "Slack of approx-lazy acceptance")
            ->capture_default_str();
        cmd->add_option("--delta", delta, "Failure probability of stochastic greedy")
            ->capture_default_str();
        cmd->add_option("--opt-seed", seed, "Seed of stochastic greedy subsampling")
            ->capture_default_str();
    }

    OptimizerParams to_params() const {
        OptimizerParams params;
        params.kind = optimizer_from_string(kind);
        params.epsilon = epsilon;
        params.delta = delta;
        params.seed = seed;
        return params;
    }
};

struct SimOptions {
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    std::string source = "poisson";

    void attach(CLI::App* cmd) {
        cmd->add_option("--scenarios,--count", count, "Number of simulated outbreak scenarios")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Scenario/hydraulics master seed")
            ->capture_default_str();
        cmd->add_option("--source", source, "Scenario sampling model")
            ->check(CLI::IsMember({"poisson", "bernoulli"}))
            ->capture_default_str();
    }
};

nlohmann::json config_manifest(const ObjectiveOptions& obj, const OptimizerOptions& opt,
                               const SimOptions& sim) {
    nlohmann::json doc;
    doc["objective"] = {{"metric", obj.metric},
                        {"objective", obj.objective},
                        {"conc_threshold", obj.conc_threshold},
                        {"detection_threshold", obj.detection_threshold},
                        {"lambda", obj.lambda_weight},
                        {"coverage_mode", obj.coverage_mode},
                        {"conjunctive_thresholds", obj.conjunctive}};
    doc["optimizer"] = {{"kind", opt.kind},
                        {"epsilon", opt.epsilon},
                        {"delta", opt.delta},
                        {"seed", opt.seed}};
    doc["scenarios"] = {{"count", sim.count}, {"seed", sim.seed}, {"source", sim.source}};
    return doc;
}

std::vector<NodeId> load_placement_nodes(const std::string& path) {
    const nlohmann::json doc = load_json_file(path);
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ValidationError(path + " must be a JSON object with a \"nodes\" array");
    }
    std::vector<NodeId> nodes;
    for (const auto& v : doc["nodes"]) {
        if (!v.is_number_integer()) throw ValidationError("placement nodes must be integers");
        nodes.push_back(v.get<NodeId>());
    }
    return nodes;
}

nlohmann::json metrics_to_json(const MetricBreakdown& m) {
    return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
            {"f1", m.f1},             {"coverage", m.coverage},   {"combined", m.combined}};
}

void write_placement_artifacts(const std::string& out_dir, const std::string& command,
                               const Network& network, const std::vector<NodeId>& nodes,
                               const MetricBreakdown& metrics, const OptimizerTrace* trace,
                               const nlohmann::json& manifest) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    nlohmann::json doc;
    doc["command"] = command;
    doc["nodes"] = nodes;
    doc["k"] = nodes.size();
    doc["metrics"] = metrics_to_json(metrics);
    doc["config"] = manifest;
    if (trace) {
        doc["total_evaluations"] = trace->total_evaluations;
        doc["bound_violations"] = trace->bound_violations;
    }
    write_json_file((dir / "placement.json").string(), doc);

    if (trace) write_text_file((dir / "trace.csv").string(), trace_to_csv(*trace));

    DotAnnotations annotations;
    annotations.highlights = nodes;
    write_text_file((dir / "placement.dot").string(), export_dot(network, annotations));
}

struct PreparedProblem {
    Network network;  // reduced unless --no-reduce
    OrGateNet net;
    SimulationSet sims;
    std::vector<NodeId> candidates;
};

PreparedProblem prepare_problem(const std::string& network_path, bool no_reduce,
                                bool junctions_only, const ObjectiveOptions& obj,
                                const SimOptions& sim) {
    PreparedProblem p;
    const Network loaded = load_network_file(network_path);
    p.network = no_reduce ? loaded : reduce(loaded).first;
    p.net = build_bayes_net(p.network);
    const bool hydraulics = obj.objective == "thresholded";
    p.sims = prepare_simulations(p.network, sim.count, sim.seed,
                                 source_from_string(sim.source), hydraulics);
    for (NodeId id : p.network.graph.node_ids()) {
        if (!junctions_only || !p.network.graph.is_leaf(id)) p.candidates.push_back(id);
    }
    return p;
}

int cmd_reduce(const std::string& network_path, const std::string& out,
               const std::string& map_out) {
    const Network network = load_network_file(network_path);
    const auto [reduced, map] = reduce(network);
    save_network_file(reduced, out);

    nlohmann::json map_doc;
    map_doc["kept"] = map.kept;
    nlohmann::json removed = nlohmann::json::object();
    for (const auto& [node, rep] : map.removed_to_representative) {
        removed[std::to_string(node)] = rep;
    }
    map_doc["removed"] = std::move(removed);
    const std::string map_path = map_out.empty() ? out + ".map.json" : map_out;
    write_json_file(map_path, map_doc);

    std::cout << "reduced " << network.graph.node_count() << " nodes to "
              << reduced.graph.node_count() << " (" << out << ", " << map_path << ")\n";
    return 0;
}

int cmd_scenarios(const std::string& network_path, const SimOptions& sim,
                  const std::string& out) {
    const Network network = load_network_file(network_path);
    const ScenarioBatch batch =
        sample_scenarios(network, sim.count, sim.seed, source_from_string(sim.source));
    save_scenario_batch_file(batch, out);
    std::cout << "wrote " << batch.scenarios.size() << " scenarios to " << out << "\n";
    return 0;
}

int cmd_place(const std::string& network_path, std::size_t k, bool no_reduce,
              bool junctions_only, const ObjectiveOptions& obj, const OptimizerOptions& opt,
              const SimOptions& sim, const std::string& out_dir) {
    if (k < 1) throw ValidationError("k must be at least 1");
    PreparedProblem p = prepare_problem(network_path, no_reduce, junctions_only, obj, sim);
    const ObjectiveConfig config = obj.to_config();
    const SetObjective objective = make_placement_objective(p.net, p.sims, config);
    MemoizedEvaluator evaluate(objective);
    const GreedyResult result = run_optimizer(opt.to_params(), evaluate, p.candidates, k);
    const MetricBreakdown metrics =
        evaluate_all_metrics(p.net, result.placement.nodes, p.sims, config);

    nlohmann::json manifest = config_manifest(obj, opt, sim);
    manifest["network"] = network_path;
    manifest["reduced"] = !no_reduce;
    manifest["junctions_only"] = junctions_only;
    write_placement_artifacts(out_dir, "place", p.network, result.placement.nodes, metrics,
                              &result.trace, manifest);
    std::cout << "placed " << result.placement.nodes.size() << " sensors, combined objective "
              << metrics.combined << " (" << out_dir << ")\n";
    return 0;
}

int cmd_add(const std::string& network_path, const std::string& current_path, std::size_t add,
            bool no_reduce, bool junctions_only, const ObjectiveOptions& obj,
            const OptimizerOptions& opt, const SimOptions& sim, const std::string& out_dir) {
    if (add < 1) throw ValidationError("--add must be at least 1");
    PreparedProblem p = prepare_problem(network_path, no_reduce, junctions_only, obj, sim);
    std::vector<NodeId> current = load_placement_nodes(current_path);
    for (NodeId w : current) {
        if (!p.network.graph.contains(w)) {
            throw ValidationError("current placement names node " + std::to_string(w) +
                                  ", which the (reduced) network lacks; try --no-reduce");
        }
    }
    const ObjectiveConfig config = obj.to_config();
    std::vector<NodeId> candidates;
    for (NodeId id : p.candidates) {
        if (std::find(current.begin(), current.end(), id) == current.end()) {
            candidates.push_back(id);
        }
    }
    const SetObjective objective = add_objective(p.net, current, p.sims, config);
    MemoizedEvaluator evaluate(objective);
    const GreedyResult result = run_optimizer(opt.to_params(), evaluate, candidates, add);

    std::vector<NodeId> combined = current;
    combined.insert(combined.end(), result.placement.nodes.begin(),
                    result.placement.nodes.end());
    const MetricBreakdown metrics = evaluate_all_metrics(p.net, combined, p.sims, config);

    nlohmann::json manifest = config_manifest(obj, opt, sim);
    manifest["network"] = network_path;
    manifest["current"] = current;
    manifest["added"] = result.placement.nodes;
    write_placement_artifacts(out_dir, "add", p.network, combined, metrics, &result.trace,
                              manifest);
    std::cout << "extended placement to " << combined.size() << " sensors, combined objective "
              << metrics.combined << " (" << out_dir << ")\n";
    return 0;
}

int cmd_remove(const std::string& network_path, const std::string& current_path,
               std::size_t remove, bool no_reduce, const ObjectiveOptions& obj,
               const SimOptions& sim, const std::string& out_dir) {
    if (remove < 1) throw ValidationError("--remove must be at least 1");
    PreparedProblem p = prepare_problem(network_path, no_reduce, false, obj, sim);
    Placement current;
    current.nodes = load_placement_nodes(current_path);
    current.k = current.nodes.size();
    for (NodeId w : current.nodes) {
        if (!p.network.graph.contains(w)) {
            throw ValidationError("current placement names node " + std::to_string(w) +
                                  ", which the (reduced) network lacks; try --no-reduce");
        }
    }
    const ObjectiveConfig config = obj.to_config();
    const SetObjective objective = make_placement_objective(p.net, p.sims, config);
    MemoizedEvaluator evaluate(objective);
    const Placement result = greedy_remove(evaluate, current, remove);
    const MetricBreakdown metrics = evaluate_all_metrics(p.net, result.nodes, p.sims, config);

    nlohmann::json manifest = config_manifest(obj, OptimizerOptions{}, sim);
    manifest["network"] = network_path;
    manifest["current"] = current.nodes;
    write_placement_artifacts(out_dir, "remove", p.network, result.nodes, metrics, nullptr,
                              manifest);
    std::cout << "kept " << result.nodes.size() << " sensors, combined objective "
              << metrics.combined << " (" << out_dir << ")\n";
    return 0;
}

int cmd_localize(const std::string& network_path, const std::string& observations_path,
                 const std::string& placement_path, double detection_threshold,
                 const std::string& out) {
    const Network network = load_network_file(network_path);
    const OrGateNet net = build_bayes_net(network);

    const nlohmann::json obs_doc = load_json_file(observations_path);
    if (!obs_doc.is_object()) {
        throw ValidationError(observations_path +
                              " must be a JSON object mapping node id to boolean");
    }
    ObservationSet observations;
    for (const auto& [key, value] : obs_doc.items()) {
        if (!value.is_boolean()) {
            throw ValidationError("observation at node " + key + " must be true or false");
        }
        observations.readings[parse_node_id(key)] = value.get<bool>();
    }

    if (!placement_path.empty()) {
        const std::vector<NodeId> placement = load_placement_nodes(placement_path);
        for (const auto& [node, value] : observations.readings) {
            (void)value;
            if (std::find(placement.begin(), placement.end(), node) == placement.end()) {
                throw ValidationError("observation at node " + std::to_string(node) +
                                      " which carries no sensor in " + placement_path);
            }
        }
    }

    const PosteriorVector post = posterior(net, observations);
    const std::map<NodeId, bool> predictions = predict(post, detection_threshold);

    nlohmann::json doc;
    nlohmann::json posteriors = nlohmann::json::object();
    for (std::size_t i = 0; i < post.leaf_ids.size(); ++i) {
        posteriors[std::to_string(post.leaf_ids[i])] = post.probs[i];
    }
    nlohmann::json preds = nlohmann::json::object();
    for (const auto& [leaf, hit] : predictions) preds[std::to_string(leaf)] = hit;
    doc["posteriors"] = std::move(posteriors);
    doc["predictions"] = std::move(preds);
    doc["detection_threshold"] = detection_threshold;
    write_json_file(out, doc);
    std::cout << "wrote posterior over " << post.leaf_ids.size() << " buildings to " << out
              << "\n";
    return 0;
}

int cmd_sweep(const std::string& network_path, const std::string& axis,
              const std::vector<std::string>& values, std::size_t k, bool junctions_only,
              const ObjectiveOptions& obj, const OptimizerOptions& opt, const SimOptions& sim,
              const std::string& out, const std::string& manifest_out) {
    const Network network = load_network_file(network_path);
    SweepSpec spec;
    spec.axis = sweep_axis_from_string(axis);
    spec.values = values;
    spec.base = obj.to_config();
    spec.optimizer = opt.to_params();
    spec.k = k;
    spec.scenario_count = sim.count;
    spec.source = source_from_string(sim.source);
    spec.scenario_seed = sim.seed;
    spec.junctions_only = junctions_only;

    const std::vector<SweepRow> rows = run_sweep(network, spec);
    write_text_file(out, sweep_to_csv(rows));
    nlohmann::json manifest = sweep_manifest(spec);
    manifest["network"] = network_path;
    const std::string manifest_path = manifest_out.empty() ? out + ".manifest.json" : manifest_out;
    write_json_file(manifest_path, manifest);
    std::cout << "swept " << rows.size() << " " << axis << " values (" << out << ", "
              << manifest_path << ")\n";
    return 0;
}

int cmd_randgraph(const RandomGraphSpec& spec, const std::string& out) {
    const Network network = random_tree(spec);
    save_network_file(network, out);
    std::cout << "generated " << network.graph.node_count() << " nodes ("
              << network.graph.leaf_count() << " buildings) to " << out << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{
        "wwsp: wastewater sensor placement and outbreak localization.\n"
        "Set WWSP_THREADS to parallelize objective evaluation (default 1)."};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a TOML file (flags override it)");

    std::string network_path;
    std::string out;
    std::string out_dir = ".";
    std::string map_out;
    std::string manifest_out;
    std::string current_path;
    std::string observations_path;
    std::string placement_path;
    std::string axis;
    std::vector<std::string> values;
    std::size_t k = 6;
    std::size_t add_count = 1;
    std::size_t remove_count = 1;
    bool no_reduce = false;
    bool junctions_only = false;
    double detection_threshold = 0.5;
    ObjectiveOptions obj;
    OptimizerOptions opt;
    SimOptions sim;
    RandomGraphSpec rand_spec;
    std::string redirect_direction = "upstream";

    int exit_code = 0;

    CLI::App* reduce_cmd =
        app.add_subcommand("reduce", "Splice out pass-through junctions of a network");
    reduce_cmd->add_option("--network", network_path, "Network JSON")->required();
    reduce_cmd->add_option("--out", out, "Reduced network JSON")->required();
    reduce_cmd->add_option("--map-out", map_out,
                           "Reduction map JSON (default: <out>.map.json)");
    reduce_cmd->callback([&] { exit_code = cmd_reduce(network_path, out, map_out); });

    CLI::App* scenarios_cmd =
        app.add_subcommand("scenarios", "Sample outbreak scenarios from a network's priors");
    scenarios_cmd->add_option("--network", network_path, "Network JSON")->required();
    sim.attach(scenarios_cmd);
    scenarios_cmd->add_option("--out", out, "Scenario batch JSON")->required();
    scenarios_cmd->callback([&] { exit_code = cmd_scenarios(network_path, sim, out); });

    CLI::App* place_cmd = app.add_subcommand("place", "Optimize a k-sensor placement");
    place_cmd->add_option("--network", network_path, "Network JSON")->required();
    place_cmd->add_option("--k", k, "Number of sensors")->capture_default_str();
    place_cmd->add_flag("--no-reduce", no_reduce, "Skip graph reduction");
    place_cmd->add_flag("--junctions-only", junctions_only,
                        "Restrict candidate sites to junction nodes");
    obj.attach(place_cmd);
    opt.attach(place_cmd);
    sim.attach(place_cmd);
    place_cmd->add_option("--out-dir", out_dir, "Artifact directory")->capture_default_str();
    place_cmd->callback([&] {
        exit_code = cmd_place(network_path, k, no_reduce, junctions_only, obj, opt, sim, out_dir);
    });

    CLI::App* add_cmd = app.add_subcommand("add", "Extend an existing placement greedily");
    add_cmd->add_option("--network", network_path, "Network JSON")->required();
    add_cmd->add_option("--current", current_path, "Existing placement JSON")->required();
    add_cmd->add_option("--add", add_count, "Sensors to add")->capture_default_str();
    add_cmd->add_flag("--no-reduce", no_reduce, "Skip graph reduction");
    add_cmd->add_flag("--junctions-only", junctions_only,
                      "Restrict candidate sites to junction nodes");
    obj.attach(add_cmd);
    opt.attach(add_cmd);
    sim.attach(add_cmd);
    add_cmd->add_option("--out-dir", out_dir, "Artifact directory")->capture_default_str();
    add_cmd->callback([&] {
        exit_code = cmd_add(network_path, current_path, add_count, no_reduce, junctions_only,
                            obj, opt, sim, out_dir);
    });

    CLI::App* remove_cmd =
        app.add_subcommand("remove", "Shrink an existing placement, dropping the cheapest "
                                     "sensors first");
    remove_cmd->add_option("--network", network_path, "Network JSON")->required();
    remove_cmd->add_option("--current", current_path, "Existing placement JSON")->required();
    remove_cmd->add_option("--remove", remove_count, "Sensors to remove")->capture_default_str();
    remove_cmd->add_flag("--no-reduce", no_reduce, "Skip graph reduction");
    obj.attach(remove_cmd);
    sim.attach(remove_cmd);
    remove_cmd->add_option("--out-dir", out_dir, "Artifact directory")->capture_default_str();
    remove_cmd->callback([&] {
        exit_code = cmd_remove(network_path, current_path, remove_count, no_reduce, obj, sim,
                               out_dir);
    });

    CLI::App* localize_cmd =
        app.add_subcommand("localize", "Compute per-building outbreak posteriors from sensor "
                                       "readings");
    localize_cmd->add_option("--network", network_path, "Network JSON")->required();
    localize_cmd->add_option("--observations", observations_path,
                             "JSON object: node id -> boolean reading (missing = unobserved)")
        ->required();
    localize_cmd->add_option("--placement", placement_path,
                             "Placement JSON; observed nodes must carry sensors");
    localize_cmd->add_option("--detection-threshold", detection_threshold,
                             "Posterior probability above which a building is predicted "
                             "infected")
        ->capture_default_str();
    localize_cmd->add_option("--out", out, "Posterior/prediction JSON")->required();
    localize_cmd->callback([&] {
        exit_code = cmd_localize(network_path, observations_path, placement_path,
                                 detection_threshold, out);
    });

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Optimize one placement per axis value and tabulate "
                                    "metrics");
    sweep_cmd->add_option("--network", network_path, "Network JSON")->required();
    sweep_cmd->add_option("--axis", axis,
                          "metric | optimizer | lambda | concentration-threshold | "
                          "detection-threshold")
        ->required();
    sweep_cmd->add_option("--values", values, "Axis values (comma separated)")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--k", k, "Number of sensors")->capture_default_str();
    sweep_cmd->add_flag("--junctions-only", junctions_only,
                        "Restrict candidate sites to junction nodes");
    obj.attach(sweep_cmd);
    opt.attach(sweep_cmd);
    sim.attach(sweep_cmd);
    sweep_cmd->add_option("--out", out, "Sweep CSV")->required();
    sweep_cmd->add_option("--manifest-out", manifest_out,
                          "Seed manifest JSON (default: <out>.manifest.json)");
    sweep_cmd->callback([&] {
        exit_code = cmd_sweep(network_path, axis, values, k, junctions_only, obj, opt, sim, out,
                              manifest_out);
    });

    CLI::App* rand_cmd =
        app.add_subcommand("randgraph", "Generate a random sewer network with building "
                                        "attributes");
    rand_cmd->add_option("--nodes", rand_spec.node_count, "Total node count")
        ->capture_default_str();
    rand_cmd->add_option("--redirect-prob", rand_spec.redirect_prob,
                         "Probability of redirecting a new node one hop")
        ->capture_default_str();
    rand_cmd->add_option("--redirect-direction", redirect_direction,
                         "upstream: away from the treatment plant; downstream: toward it")
        ->check(CLI::IsMember({"upstream", "downstream"}))
        ->capture_default_str();
    rand_cmd->add_option("--pop-range", rand_spec.population_range,
                         "Building population bounds")
        ->expected(2)
        ->capture_default_str();
    rand_cmd->add_option("--flow-range", rand_spec.flow_range,
                         "Building flow-mean bounds (liters/day)")
        ->expected(2)
        ->capture_default_str();
    rand_cmd->add_option("--flow-std-fraction", rand_spec.flow_std_fraction,
                         "Flow standard deviation as a fraction of the mean")
        ->capture_default_str();
    rand_cmd->add_option("--infection-rate", rand_spec.infection_rate_per_person,
                         "Expected infections per person per sampling period")
        ->capture_default_str();
    rand_cmd->add_option("--seed", rand_spec.seed, "Generator seed")->capture_default_str();
    rand_cmd->add_option("--out", out, "Network JSON")->required();
    rand_cmd->callback([&] {
        rand_spec.redirect_direction = redirect_direction == "downstream"
                                           ? RedirectDirection::Downstream
                                           : RedirectDirection::Upstream;
        exit_code = cmd_randgraph(rand_spec, out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}

}  // namespace wwsp
