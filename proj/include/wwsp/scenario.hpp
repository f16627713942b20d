#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "wwsp/network.hpp"

namespace wwsp {

enum class ScenarioSource { Bernoulli, Poisson };

// One hypothetical outbreak: which buildings are infected. Bit i corresponds
// to leaf_ids()[i] of the owning graph.
struct Scenario {
    LeafMask outbreak;

    std::map<NodeId, bool> to_map(const WastewaterGraph& graph) const;
    static Scenario from_map(const WastewaterGraph& graph, const std::map<NodeId, bool>& bits);
};

// Regenerable bit-exactly from (model, seed, count, source): every leaf of
// every scenario draws from its own RNG stream keyed by (seed, scenario
// index, leaf id), so generation order never matters.
struct ScenarioBatch {
    std::vector<Scenario> scenarios;
    std::uint64_t seed = 0;
    ScenarioSource source = ScenarioSource::Bernoulli;
};

// Hydraulic quantities behind one scenario, by leaf index. Flows cover every
// leaf; copies are nonzero only at outbreak leaves.
struct HydraulicDraw {
    std::vector<double> flows;            // liters/day, > 0
    std::vector<std::uint64_t> infected;  // individuals
    std::vector<double> copies;           // virus copies/day
};

// Daily virus copies shed per infected individual (Foladori et al. bounds).
struct SheddingRange {
    double lo = 2.4e6;
    double hi = 4e10;
};

// Bernoulli outbreak probability of a leaf: outbreak_prior when present,
// else 1 - e^-rate. Declared here (not with the graph) because the bridge is
// a sampling-model concern.
double effective_prior(const LeafAttributes& attrs);
// Poisson infection rate: poisson_rate when present, else -ln(1 - prior).
double effective_rate(const LeafAttributes& attrs);

ScenarioBatch sample_scenarios(const Network& network, std::size_t count, std::uint64_t seed,
                               ScenarioSource source);

// Flows from the truncated Gaussian for every leaf; for outbreak leaves the
// infected count is redrawn from the zero-truncated Poisson (consistent with
// the binary scenario) and copies are the sum of per-individual uniforms.
HydraulicDraw sample_hydraulics(const Network& network, const Scenario& scenario,
                                std::uint64_t seed, std::size_t scenario_index = 0,
                                SheddingRange shedding = {});

std::vector<HydraulicDraw> sample_hydraulics_batch(const Network& network,
                                                   const ScenarioBatch& batch,
                                                   std::uint64_t seed,
                                                   SheddingRange shedding = {});

// File schema: {"seed":int,"source":"poisson"|"bernoulli","scenarios":[[0,1,...],...]},
// columns in ascending leaf id order.
nlohmann::json scenario_batch_to_json(const ScenarioBatch& batch);
ScenarioBatch scenario_batch_from_json(const nlohmann::json& doc, std::size_t leaf_count);
void save_scenario_batch_file(const ScenarioBatch& batch, const std::string& path);
ScenarioBatch load_scenario_batch_file(const std::string& path, std::size_t leaf_count);

}  // namespace wwsp
