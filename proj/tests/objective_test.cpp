#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <map>
#include <vector>

#include "helpers.hpp"
#include "wwsp/errors.hpp"
#include "wwsp/objective.hpp"

using namespace wwsp;
using testing::random_network;
using testing::two_building_graph;
using testing::two_building_network;

namespace {

LeafMask mask_of(std::initializer_list<int> bits) {
    LeafMask m(bits.size());
    std::size_t i = 0;
    for (int b : bits) m.set(i++, b != 0);
    return m;
}

Scenario scenario_of(std::initializer_list<int> bits) {
    Scenario s;
    s.outbreak = mask_of(bits);
    return s;
}

const std::vector<NodeId> kNoSensors;

}  // namespace

TEST_CASE("confusion-matrix scores on a worked example") {
    const LeafMask truth = mask_of({1, 0, 1, 0});
    const LeafMask pred = mask_of({1, 1, 0, 0});
    // tp=1 fp=1 fn=1 tn=1
    CHECK(score(pred, truth, Metric::Accuracy) == 0.5);
    CHECK(score(pred, truth, Metric::Precision) == 0.5);
    CHECK(score(pred, truth, Metric::Recall) == 0.5);
    CHECK(score(pred, truth, Metric::F1) == 0.5);
}

TEST_CASE("score conventions at empty denominators") {
    const LeafMask nothing = mask_of({0, 0, 0});

    SUBCASE("no positives anywhere is a perfect call") {
        for (Metric m : {Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1})
            CHECK(score(nothing, nothing, m) == 1.0);
    }
    SUBCASE("missed outbreaks zero recall but not precision's denominator") {
        const LeafMask truth = mask_of({1, 0, 0});
        CHECK(score(nothing, truth, Metric::Recall) == 0.0);
        CHECK(score(nothing, truth, Metric::Precision) == 0.0);
        CHECK(score(nothing, truth, Metric::F1) == 0.0);
        CHECK(score(nothing, truth, Metric::Accuracy) == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("false alarms with a clean truth") {
        const LeafMask pred = mask_of({1, 1, 0});
        CHECK(score(pred, nothing, Metric::Precision) == 0.0);
        CHECK(score(pred, nothing, Metric::Recall) == 0.0);
        CHECK(score(pred, nothing, Metric::F1) == 0.0);
    }
    SUBCASE("accuracy rewards inaction on quiet networks") {
        // 9 quiet buildings, 1 outbreak: saying "nothing happened" scores 0.9
        LeafMask truth(10), pred(10);
        truth.set(4);
        CHECK(score(pred, truth, Metric::Accuracy) == doctest::Approx(0.9));
        CHECK(score(pred, truth, Metric::F1) == 0.0);
    }

    CHECK_THROWS_AS((void)score(mask_of({1}), mask_of({1, 0}), Metric::F1), ValidationError);
}

TEST_CASE("map-keyed scores match the mask form") {
    const std::map<NodeId, bool> truth{{1, true}, {2, false}, {5, true}, {9, false}};
    const std::map<NodeId, bool> pred{{1, true}, {2, true}, {5, false}, {9, false}};
    for (Metric m : {Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1})
        CHECK(score(pred, truth, m) == score(mask_of({1, 1, 0, 0}), mask_of({1, 0, 1, 0}), m));

    const std::map<NodeId, bool> different_keys{{1, true}, {2, true}, {5, false}, {8, false}};
    CHECK_THROWS_AS((void)score(different_keys, truth, Metric::F1), ValidationError);
}

TEST_CASE("metric names round-trip") {
    for (Metric m : {Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1})
        CHECK(metric_from_string(to_string(m)) == m);
    CHECK(metric_from_string("f1") == Metric::F1);
    CHECK_THROWS_AS((void)metric_from_string("auc"), ValidationError);
}

TEST_CASE("coverage asks whether outbreaks drain past a sensor") {
    const WastewaterGraph g = two_building_graph();
    const std::vector<NodeId> at_root{4};
    const std::vector<NodeId> at_leaf2{2};
    const std::vector<NodeId> at_junction{3};

    const Scenario one = scenario_of({1, 0});
    CHECK(coverage_indicator(g, at_root, one) == 1);
    CHECK(coverage_indicator(g, at_junction, one) == 1);
    CHECK(coverage_indicator(g, at_leaf2, one) == 0);
    CHECK(coverage_indicator(g, kNoSensors, one) == 0);

    const Scenario quiet = scenario_of({0, 0});
    CHECK(coverage_indicator(g, kNoSensors, quiet) == 1);  // vacuous

    const Scenario both = scenario_of({1, 1});
    CHECK(coverage_indicator(g, at_leaf2, both, CoverageMode::AllSources) == 0);
    CHECK(coverage_indicator(g, at_leaf2, both, CoverageMode::AnySource) == 1);
    CHECK(coverage_indicator(g, at_root, both, CoverageMode::AllSources) == 1);
}

TEST_CASE("threshold coverage also needs a strong enough signal") {
    const WastewaterGraph g = two_building_graph();
    HydraulicDraw d;
    d.flows = {1000.0, 1000.0};
    d.copies = {1e9, 0.0};
    d.infected = {12, 0};
    const PropagationResult prop = propagate(g, d);
    const Scenario s = scenario_of({1, 0});

    const std::vector<NodeId> at_root{4};       // reads 5e5
    const std::vector<NodeId> at_leaf1{1};      // reads 1e6
    const std::vector<NodeId> split{1, 4};

    CHECK(threshold_indicator(g, at_root, s, prop, 4.8e5) == 1);
    CHECK(threshold_indicator(g, at_root, s, prop, 5e5) == 1);  // inclusive
    CHECK(threshold_indicator(g, at_root, s, prop, 6e5) == 0);  // covered but too dilute
    CHECK(threshold_indicator(g, at_leaf1, s, prop, 1e6) == 1);
    CHECK(threshold_indicator(g, kNoSensors, s, prop, 0.0) == 0);

    // any sensor may carry the detection by default; conjunctive mode makes
    // every covering sensor carry it
    CHECK(threshold_indicator(g, split, s, prop, 6e5) == 1);
    CHECK(threshold_indicator(g, split, s, prop, 6e5, CoverageMode::AllSources, true) == 0);
    CHECK(threshold_indicator(g, split, s, prop, 4.8e5, CoverageMode::AllSources, true) == 1);

    const Scenario quiet = scenario_of({0, 0});
    CHECK(threshold_indicator(g, kNoSensors, quiet, prop, 1e9) == 1);

    SUBCASE("zero threshold reduces to plain coverage") {
        for (std::uint64_t seed = 400; seed < 410; ++seed) {
            const Network net = random_network(seed, 14);
            const SimulationSet sims =
                prepare_simulations(net, 25, seed, ScenarioSource::Poisson, true);
            std::vector<NodeId> placement;
            for (NodeId id : net.graph.node_ids())
                if (id % 3 == 0) placement.push_back(id);
            for (std::size_t i = 0; i < sims.batch.scenarios.size(); ++i) {
                const int plain =
                    coverage_indicator(net.graph, placement, sims.batch.scenarios[i]);
                const int gated =
                    threshold_indicator(net.graph, placement, sims.batch.scenarios[i],
                                        sims.propagations[i], 0.0);
                CHECK(plain == gated);
            }
        }
    }
}

TEST_CASE("placement evaluation on a hand-built batch") {
    const Network network = two_building_network(0.5, 0.5);
    const OrGateNet net = build_bayes_net(network);

    SimulationSet sims;
    sims.batch.seed = 0;
    sims.batch.source = ScenarioSource::Bernoulli;
    for (auto bits : {std::initializer_list<int>{0, 0}, {1, 0}, {0, 1}, {1, 1}})
        sims.batch.scenarios.push_back(scenario_of(bits));

    ObjectiveConfig config;
    config.metric = Metric::F1;
    config.lambda = 0.5;

    SUBCASE("sensors on both buildings localize perfectly") {
        const std::vector<NodeId> both{1, 2};
        const EvalReport r = evaluate_placement(net, both, sims, config);
        CHECK(r.mean_score == 1.0);
        CHECK(r.coverage_fraction == 1.0);
        CHECK(r.combined == 1.0);
        REQUIRE(r.per_scenario.size() == 4);
        for (const auto& [s, ind] : r.per_scenario) {
            CHECK(s == 1.0);
            CHECK(ind == 1.0);
        }
    }

    SUBCASE("no sensors leave the prior guess") {
        // posteriors stay at 0.5, never above the 0.5 cutoff: no alarms.
        // scores: quiet scenario 1, others 0; coverage only vacuous.
        const EvalReport r = evaluate_placement(net, kNoSensors, sims, config);
        CHECK(r.mean_score == doctest::Approx(0.25));
        CHECK(r.coverage_fraction == doctest::Approx(0.25));
        CHECK(r.combined == doctest::Approx(0.25));
    }

    SUBCASE("a root sensor covers everything but localizes nothing extra") {
        const std::vector<NodeId> root_only{4};
        const EvalReport r = evaluate_placement(net, root_only, sims, config);
        CHECK(r.coverage_fraction == 1.0);
        // positive root reading lifts both buildings to 2/3 > 0.5: alarms on
        // both; quiet scenario correctly silent.
        // scores: {0,0}: 1; {1,0}: f1 of tp=1 fp=1 fn=0 = 2/3; {0,1}: 2/3; {1,1}: 1
        CHECK(r.mean_score == doctest::Approx((1.0 + 2.0 / 3.0 + 2.0 / 3.0 + 1.0) / 4.0));
    }

    SUBCASE("lambda endpoints isolate the two terms") {
        const std::vector<NodeId> root_only{4};
        ObjectiveConfig score_only = config;
        score_only.lambda = 1.0;
        ObjectiveConfig coverage_only = config;
        coverage_only.lambda = 0.0;
        const EvalReport base = evaluate_placement(net, root_only, sims, config);
        const EvalReport s = evaluate_placement(net, root_only, sims, score_only);
        const EvalReport c = evaluate_placement(net, root_only, sims, coverage_only);
        CHECK(s.combined == doctest::Approx(s.mean_score));
        CHECK(c.combined == doctest::Approx(c.coverage_fraction));
        CHECK(base.combined == doctest::Approx(0.5 * base.mean_score +
                                               0.5 * base.coverage_fraction));
    }

    SUBCASE("empty simulation sets are rejected") {
        SimulationSet empty;
        CHECK_THROWS_AS((void)evaluate_placement(net, kNoSensors, empty, config),
                        ValidationError);
    }
    SUBCASE("unknown sensors are rejected") {
        const std::vector<NodeId> bogus{17};
        CHECK_THROWS_AS((void)evaluate_placement(net, bogus, sims, config), ValidationError);
    }
}

TEST_CASE("config validation bounds every knob") {
    ObjectiveConfig config;
    CHECK_NOTHROW(validate(config));
    ObjectiveConfig bad_lambda = config;
    bad_lambda.lambda = 1.5;
    CHECK_THROWS_AS(validate(bad_lambda), ValidationError);
    ObjectiveConfig bad_tau = config;
    bad_tau.detection_threshold = 1.0;
    CHECK_THROWS_AS(validate(bad_tau), ValidationError);
    ObjectiveConfig bad_conc = config;
    bad_conc.concentration_threshold = -2.0;
    CHECK_THROWS_AS(validate(bad_conc), ValidationError);
}

TEST_CASE("simulation sets cache hydraulics only when asked") {
    const Network net = random_network(55, 20);
    const SimulationSet dry = prepare_simulations(net, 30, 9, ScenarioSource::Poisson, false);
    CHECK(dry.batch.scenarios.size() == 30);
    CHECK(dry.draws.empty());
    CHECK(dry.propagations.empty());

    const SimulationSet wet = prepare_simulations(net, 30, 9, ScenarioSource::Poisson, true);
    REQUIRE(wet.draws.size() == 30);
    REQUIRE(wet.propagations.size() == 30);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(wet.batch.scenarios[i].outbreak == dry.batch.scenarios[i].outbreak);
        double copies = 0.0;
        for (double c : wet.draws[i].copies) copies += c;
        CHECK(wet.propagations[i].copies_at(net.graph.root()) ==
              doctest::Approx(copies).epsilon(1e-12));
    }

    // a thresholded objective refuses to run without cached hydraulics
    ObjectiveConfig gated;
    gated.concentration_threshold = 4.8e5;
    const OrGateNet bayes = build_bayes_net(net);
    CHECK_THROWS_AS((void)evaluate_placement(bayes, kNoSensors, dry, gated), ValidationError);
    CHECK_NOTHROW((void)evaluate_placement(bayes, kNoSensors, wet, gated));
}

TEST_CASE("thread count never changes the numbers") {
    const Network net = random_network(77, 30);
    const OrGateNet bayes = build_bayes_net(net);
    const SimulationSet sims = prepare_simulations(net, 200, 3, ScenarioSource::Poisson, true);
    ObjectiveConfig config;
    config.concentration_threshold = 4.8e5;
    std::vector<NodeId> placement;
    for (NodeId id : net.graph.node_ids())
        if (id % 4 == 0) placement.push_back(id);

    setenv("WWSP_THREADS", "1", 1);
    const EvalReport solo = evaluate_placement(bayes, placement, sims, config);
    setenv("WWSP_THREADS", "7", 1);
    const EvalReport multi = evaluate_placement(bayes, placement, sims, config);
    unsetenv("WWSP_THREADS");

    CHECK(solo.mean_score == multi.mean_score);
    CHECK(solo.coverage_fraction == multi.coverage_fraction);
    CHECK(solo.combined == multi.combined);
    REQUIRE(solo.per_scenario.size() == multi.per_scenario.size());
    for (std::size_t i = 0; i < solo.per_scenario.size(); ++i) {
        CHECK(solo.per_scenario[i].first == multi.per_scenario[i].first);
        CHECK(solo.per_scenario[i].second == multi.per_scenario[i].second);
    }
}

TEST_CASE("metric breakdown agrees with single-metric runs") {
    const Network net = random_network(88, 25);
    const OrGateNet bayes = build_bayes_net(net);
    const SimulationSet sims = prepare_simulations(net, 120, 8, ScenarioSource::Poisson, false);
    std::vector<NodeId> placement{net.graph.root()};

    ObjectiveConfig config;
    config.metric = Metric::Recall;
    const MetricBreakdown all = evaluate_all_metrics(bayes, placement, sims, config);

    for (Metric m : {Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1}) {
        ObjectiveConfig single = config;
        single.metric = m;
        const EvalReport r = evaluate_placement(bayes, placement, sims, single);
        CHECK(all.by_metric(m) == doctest::Approx(r.mean_score).epsilon(1e-15));
        if (m == config.metric) CHECK(all.combined == doctest::Approx(r.combined).epsilon(1e-15));
        CHECK(all.coverage == doctest::Approx(r.coverage_fraction).epsilon(1e-15));
    }
}

TEST_CASE("set objectives compose for add and remove") {
    const Network net = random_network(99, 22);
    const OrGateNet bayes = build_bayes_net(net);
    const SimulationSet sims = prepare_simulations(net, 80, 4, ScenarioSource::Poisson, false);
    ObjectiveConfig config;

    const SetObjective f = make_placement_objective(bayes, sims, config);
    const auto nodes = net.graph.node_ids();
    const NodeId a = nodes[0], b = nodes[3], c = nodes[5];

    const SetObjective add = add_objective(bayes, {a}, sims, config);
    CHECK(add({b}) == f({a, b}));
    CHECK(add({b, c}) == f({a, b, c}));
    CHECK(add({}) == f({a}));
    CHECK_THROWS_AS((void)add({a}), ValidationError);

    const SetObjective rem = remove_objective(bayes, {a, b, c}, sims, config);
    CHECK(rem({b}) == f({a, c}));
    CHECK(rem({}) == f({a, b, c}));
    CHECK(rem({a, b, c}) == f({}));
    const NodeId outsider = nodes[7];
    CHECK_THROWS_AS((void)rem({outsider}), ValidationError);
}
