#include "wwsp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "wwsp/errors.hpp"
#include "wwsp/rng.hpp"

namespace wwsp {

namespace {

// Stream purpose tags; combined with (seed, scenario index, leaf id) they
// make every random quantity independent and order-free.
constexpr std::uint64_t kPurposeOutbreak = 0;
constexpr std::uint64_t kPurposeFlow = 1;
constexpr std::uint64_t kPurposeInfected = 2;
constexpr std::uint64_t kPurposeCopies = 3;

std::uint64_t leaf_stream(std::uint64_t seed, std::size_t scenario_index, NodeId leaf,
                          std::uint64_t purpose) {
    return rng::derive_stream(seed, scenario_index, leaf, purpose);
}

const LeafAttributes& leaf_attrs(const Network& network, NodeId leaf) {
    auto it = network.attributes.find(leaf);
    if (it == network.attributes.end()) {
        throw ValidationError("leaf " + std::to_string(leaf) + " has no attributes");
    }
    return it->second;
}

void check_shedding(const SheddingRange& shedding) {
    if (!(std::isfinite(shedding.lo) && std::isfinite(shedding.hi)) || shedding.lo <= 0.0 ||
        shedding.hi < shedding.lo) {
        throw ValidationError("shedding range must satisfy 0 < lo <= hi");
    }
}

}  // namespace

double effective_prior(const LeafAttributes& attrs) {
    if (attrs.outbreak_prior) return *attrs.outbreak_prior;
    if (attrs.poisson_rate) return -std::expm1(-*attrs.poisson_rate);
    throw ValidationError("leaf attributes carry neither outbreak_prior nor poisson_rate");
}

double effective_rate(const LeafAttributes& attrs) {
    if (attrs.poisson_rate) return *attrs.poisson_rate;
    if (attrs.outbreak_prior) {
        if (*attrs.outbreak_prior >= 1.0) {
            throw ValidationError("outbreak prior 1 has no finite infection rate");
        }
        return -std::log1p(-*attrs.outbreak_prior);
    }
    throw ValidationError("leaf attributes carry neither outbreak_prior nor poisson_rate");
}

std::map<NodeId, bool> Scenario::to_map(const WastewaterGraph& graph) const {
    if (outbreak.size() != graph.leaf_count()) {
        throw ValidationError("scenario size does not match graph leaf count");
    }
    std::map<NodeId, bool> out;
    for (std::size_t i = 0; i < graph.leaf_count(); ++i) {
        out[graph.leaf_ids()[i]] = outbreak.test(i);
    }
    return out;
}

Scenario Scenario::from_map(const WastewaterGraph& graph, const std::map<NodeId, bool>& bits) {
    Scenario s;
    s.outbreak.resize(graph.leaf_count());
    for (const auto& [id, value] : bits) {
        if (!graph.contains(id) || !graph.is_leaf(id)) {
            throw ValidationError("scenario names non-leaf node " + std::to_string(id));
        }
        if (value) s.outbreak.set(graph.leaf_index(id));
    }
    return s;
}

ScenarioBatch sample_scenarios(const Network& network, std::size_t count, std::uint64_t seed,
                               ScenarioSource source) {
    const WastewaterGraph& g = network.graph;
    ScenarioBatch batch;
    batch.seed = seed;
    batch.source = source;
    batch.scenarios.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
        LeafMask& outbreak = batch.scenarios[s].outbreak;
        outbreak.resize(g.leaf_count());
        for (std::size_t i = 0; i < g.leaf_count(); ++i) {
            const NodeId leaf = g.leaf_ids()[i];
            const LeafAttributes& attrs = leaf_attrs(network, leaf);
            rng::Stream stream(leaf_stream(seed, s, leaf, kPurposeOutbreak));
            bool hit;
            if (source == ScenarioSource::Bernoulli) {
                hit = stream.bernoulli(effective_prior(attrs));
            } else {
                hit = stream.poisson(effective_rate(attrs)) >= 1;
            }
            if (hit) outbreak.set(i);
        }
    }
    return batch;
}

HydraulicDraw sample_hydraulics(const Network& network, const Scenario& scenario,
                                std::uint64_t seed, std::size_t scenario_index,
                                SheddingRange shedding) {
    const WastewaterGraph& g = network.graph;
    if (scenario.outbreak.size() != g.leaf_count()) {
        throw ValidationError("scenario size does not match graph leaf count");
    }
    check_shedding(shedding);

    HydraulicDraw draw;
    draw.flows.resize(g.leaf_count());
    draw.infected.assign(g.leaf_count(), 0);
    draw.copies.assign(g.leaf_count(), 0.0);

    for (std::size_t i = 0; i < g.leaf_count(); ++i) {
        const NodeId leaf = g.leaf_ids()[i];
        const LeafAttributes& attrs = leaf_attrs(network, leaf);
        if (!attrs.flow_mean) {
            throw ValidationError("leaf " + std::to_string(leaf) +
                                  " has no flow_mean; cannot sample hydraulics");
        }
        const double mean = *attrs.flow_mean;
        const double stddev = attrs.flow_std ? *attrs.flow_std : 0.1 * mean;
        rng::Stream flow_stream(leaf_stream(seed, scenario_index, leaf, kPurposeFlow));
        draw.flows[i] = flow_stream.truncated_gaussian_positive(mean, stddev);

        if (!scenario.outbreak.test(i)) continue;
        rng::Stream count_stream(leaf_stream(seed, scenario_index, leaf, kPurposeInfected));
        const std::uint64_t infected =
            count_stream.zero_truncated_poisson(effective_rate(attrs));
        draw.infected[i] = infected;
        rng::Stream copies_stream(leaf_stream(seed, scenario_index, leaf, kPurposeCopies));
        double copies = 0.0;
        for (std::uint64_t p = 0; p < infected; ++p) {
            copies += copies_stream.uniform(shedding.lo, shedding.hi);
        }
        draw.copies[i] = copies;
    }
    return draw;
}

std::vector<HydraulicDraw> sample_hydraulics_batch(const Network& network,
                                                   const ScenarioBatch& batch,
                                                   std::uint64_t seed, SheddingRange shedding) {
    std::vector<HydraulicDraw> out;
    out.reserve(batch.scenarios.size());
    for (std::size_t s = 0; s < batch.scenarios.size(); ++s) {
        out.push_back(sample_hydraulics(network, batch.scenarios[s], seed, s, shedding));
    }
    return out;
}

nlohmann::json scenario_batch_to_json(const ScenarioBatch& batch) {
    nlohmann::json doc;
    doc["seed"] = batch.seed;
    doc["source"] = batch.source == ScenarioSource::Poisson ? "poisson" : "bernoulli";
    nlohmann::json rows = nlohmann::json::array();
    for (const Scenario& s : batch.scenarios) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t i = 0; i < s.outbreak.size(); ++i) {
            row.push_back(s.outbreak.test(i) ? 1 : 0);
        }
        rows.push_back(std::move(row));
    }
    doc["scenarios"] = std::move(rows);
    return doc;
}

ScenarioBatch scenario_batch_from_json(const nlohmann::json& doc, std::size_t leaf_count) {
    if (!doc.is_object()) throw ValidationError("scenario document must be a JSON object");
    ScenarioBatch batch;
    if (!doc.contains("seed") || !doc["seed"].is_number_integer()) {
        throw ValidationError("scenario document needs an integer \"seed\"");
    }
    batch.seed = doc["seed"].get<std::uint64_t>();
    if (!doc.contains("source") || !doc["source"].is_string()) {
        throw ValidationError("scenario document needs a \"source\" of \"poisson\" or \"bernoulli\"");
    }
    const std::string source = doc["source"].get<std::string>();
    if (source == "poisson") {
        batch.source = ScenarioSource::Poisson;
    } else if (source == "bernoulli") {
        batch.source = ScenarioSource::Bernoulli;
    } else {
        throw ValidationError("unknown scenario source \"" + source + "\"");
    }
    if (!doc.contains("scenarios") || !doc["scenarios"].is_array()) {
        throw ValidationError("scenario document needs a \"scenarios\" array");
    }
    for (const auto& row : doc["scenarios"]) {
        if (!row.is_array() || row.size() != leaf_count) {
            throw ValidationError("every scenario row must list exactly " +
                                  std::to_string(leaf_count) + " leaf bits");
        }
        Scenario s;
        s.outbreak.resize(leaf_count);
        for (std::size_t i = 0; i < leaf_count; ++i) {
            const auto& cell = row[i];
            std::uint64_t bit;
            if (cell.is_boolean()) {
                bit = cell.get<bool>() ? 1 : 0;
            } else if (cell.is_number_integer()) {
                bit = cell.get<std::uint64_t>();
            } else {
                throw ValidationError("scenario bits must be 0 or 1");
            }
            if (bit > 1) throw ValidationError("scenario bits must be 0 or 1");
            if (bit) s.outbreak.set(i);
        }
        batch.scenarios.push_back(std::move(s));
    }
    return batch;
}

void save_scenario_batch_file(const ScenarioBatch& batch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << scenario_batch_to_json(batch).dump(2) << '\n';
    if (!out) throw Error("failed writing " + path);
}

ScenarioBatch load_scenario_batch_file(const std::string& path, std::size_t leaf_count) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("failed to parse " + path + ": " + e.what());
    }
    return scenario_batch_from_json(doc, leaf_count);
}

}  // namespace wwsp
