#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "wwsp/concentration.hpp"
#include "wwsp/errors.hpp"
#include "wwsp/scenario.hpp"

using namespace wwsp;
using testing::random_network;
using testing::two_building_graph;

TEST_CASE("a hot building dilutes into its junction") {
    const WastewaterGraph g = two_building_graph();
    HydraulicDraw d;
    d.flows = {1000.0, 1000.0};
    d.copies = {1e9, 0.0};
    d.infected = {25, 0};

    const PropagationResult r = propagate(g, d);
    CHECK(r.concentration_at(1) == 1e6);
    CHECK(r.concentration_at(2) == 0.0);
    // 1e9 copies into 2000 L/day
    CHECK(r.concentration_at(3) == doctest::Approx(5e5).epsilon(1e-12));
    CHECK(r.concentration_at(4) == doctest::Approx(5e5).epsilon(1e-12));
    CHECK(r.flow_at(3) == 2000.0);
    CHECK(r.copies_at(3) == 1e9);

    SUBCASE("more clean flow lowers the reading") {
        HydraulicDraw wetter = d;
        wetter.flows[1] = 2000.0;
        const PropagationResult r2 = propagate(g, wetter);
        CHECK(r2.concentration_at(3) == doctest::Approx(1e9 / 3000.0).epsilon(1e-12));
        CHECK(r2.concentration_at(3) < r.concentration_at(3));
    }
}

TEST_CASE("no outbreak means zero everywhere") {
    const WastewaterGraph g = two_building_graph();
    HydraulicDraw d;
    d.flows = {1200.0, 800.0};
    d.copies = {0.0, 0.0};
    d.infected = {0, 0};
    const PropagationResult r = propagate(g, d);
    for (NodeId id : g.node_ids()) {
        CHECK(r.concentration_at(id) == 0.0);
        CHECK(r.copies_at(id) == 0.0);
    }
    CHECK(r.flow_at(4) == 2000.0);
}

TEST_CASE("mass survives the trip to the plant") {
    for (std::uint64_t seed = 200; seed < 240; ++seed) {
        const Network net = random_network(seed, 15 + seed % 30);
        const WastewaterGraph& g = net.graph;
        const ScenarioBatch batch = sample_scenarios(net, 3, seed, ScenarioSource::Poisson);
        for (std::size_t i = 0; i < batch.scenarios.size(); ++i) {
            const HydraulicDraw d = sample_hydraulics(net, batch.scenarios[i], seed, i);
            const PropagationResult r = propagate(g, d);

            double flow_sum = 0.0, copy_sum = 0.0;
            for (std::size_t l = 0; l < d.flows.size(); ++l) {
                flow_sum += d.flows[l];
                copy_sum += d.copies[l];
            }
            CHECK(r.flow_at(g.root()) == doctest::Approx(flow_sum).epsilon(1e-12));
            if (copy_sum > 0.0)
                CHECK(r.copies_at(g.root()) == doctest::Approx(copy_sum).epsilon(1e-12));
            else
                CHECK(r.copies_at(g.root()) == 0.0);

            // every junction mixes to a value between its parents' extremes
            for (NodeId id : g.node_ids()) {
                const auto parents = g.parents(id);
                if (parents.empty()) continue;
                double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
                double pflow = 0.0, pcopies = 0.0;
                for (NodeId p : parents) {
                    lo = std::min(lo, r.concentration_at(p));
                    hi = std::max(hi, r.concentration_at(p));
                    pflow += r.flow_at(p);
                    pcopies += r.copies_at(p);
                }
                CHECK(r.flow_at(id) == doctest::Approx(pflow).epsilon(1e-12));
                CHECK(r.copies_at(id) == doctest::Approx(pcopies).epsilon(1e-12));
                CHECK(r.concentration_at(id) >= lo - 1e-9 * (1.0 + hi));
                CHECK(r.concentration_at(id) <= hi + 1e-9 * (1.0 + hi));
            }
        }
    }
}

TEST_CASE("concentration is linear in shed copies") {
    const Network net = random_network(300, 20);
    const WastewaterGraph& g = net.graph;
    HydraulicDraw d;
    d.flows.assign(g.leaf_count(), 1500.0);
    d.infected.assign(g.leaf_count(), 1);
    d.copies.assign(g.leaf_count(), 0.0);
    for (std::size_t l = 0; l < g.leaf_count(); ++l) d.copies[l] = 1e7 * double(l + 1);

    HydraulicDraw doubled = d;
    for (double& c : doubled.copies) c *= 2.0;

    const PropagationResult r1 = propagate(g, d);
    const PropagationResult r2 = propagate(g, doubled);
    for (NodeId id : g.node_ids())
        CHECK(r2.concentration_at(id) == doctest::Approx(2.0 * r1.concentration_at(id)).epsilon(1e-15));
}

TEST_CASE("a single outbreak only dilutes downstream") {
    const Network net = random_network(301, 30);
    const WastewaterGraph& g = net.graph;
    HydraulicDraw d;
    d.flows.assign(g.leaf_count(), 1000.0);
    d.infected.assign(g.leaf_count(), 0);
    d.copies.assign(g.leaf_count(), 0.0);
    const NodeId hot = g.leaf_ids().front();
    d.copies[g.leaf_index(hot)] = 5e9;
    d.infected[g.leaf_index(hot)] = 3;

    const PropagationResult r = propagate(g, d);
    double last = r.concentration_at(hot);
    for (auto node = g.child(hot); node; node = g.child(*node)) {
        const double here = r.concentration_at(*node);
        CHECK(here <= last + 1e-12);
        CHECK(here > 0.0);
        last = here;
    }
}

TEST_CASE("threshold comparison is inclusive") {
    const WastewaterGraph g = two_building_graph();
    HydraulicDraw d;
    d.flows = {1000.0, 1000.0};
    d.copies = {1e9, 0.0};
    d.infected = {10, 0};
    const PropagationResult r = propagate(g, d);

    CHECK(meets_threshold(r, 3, 5e5));  // exactly at the threshold
    CHECK(meets_threshold(r, 3, 4.8e5));
    CHECK_FALSE(meets_threshold(r, 3, 5e5 + 1.0));
    CHECK(meets_threshold(r, 2, 0.0));  // zero threshold always trips
    CHECK_FALSE(meets_threshold(r, 2, 1.0));

    CHECK_THROWS_AS((void)meets_threshold(r, 99, 1.0), ValidationError);
    CHECK_THROWS_AS((void)meets_threshold(r, 3, -1.0), ValidationError);
    CHECK_THROWS_AS((void)meets_threshold(r, 3, std::numeric_limits<double>::infinity()),
                    ValidationError);
}

TEST_CASE("draw validation catches shape and sign errors") {
    const WastewaterGraph g = two_building_graph();
    HydraulicDraw short_draw;
    short_draw.flows = {1000.0};
    short_draw.copies = {0.0};
    short_draw.infected = {0};
    CHECK_THROWS_AS((void)propagate(g, short_draw), ValidationError);

    HydraulicDraw zero_flow;
    zero_flow.flows = {0.0, 1000.0};
    zero_flow.copies = {0.0, 0.0};
    zero_flow.infected = {0, 0};
    CHECK_THROWS_AS((void)propagate(g, zero_flow), ValidationError);

    HydraulicDraw negative;
    negative.flows = {1000.0, 1000.0};
    negative.copies = {-5.0, 0.0};
    negative.infected = {0, 0};
    CHECK_THROWS_AS((void)propagate(g, negative), ValidationError);
}

TEST_CASE("csv export lists every node once") {
    const WastewaterGraph g = two_building_graph();
    HydraulicDraw d;
    d.flows = {1000.0, 1000.0};
    d.copies = {1e9, 0.0};
    d.infected = {10, 0};
    const std::string csv = propagation_to_csv(propagate(g, d));

    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "node,cum_flow,cum_copies,concentration");
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == g.node_count());
    CHECK(csv.find("3,2000") != std::string::npos);
}
