#include "wwsp/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>

#include "wwsp/errors.hpp"

namespace wwsp {

namespace {

std::string join_ids(const std::vector<NodeId>& ids) {
    std::ostringstream out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out << ", ";
        out << ids[i];
    }
    return out.str();
}

}  // namespace

std::size_t WastewaterGraph::index_of(NodeId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id)
        throw ValidationError("graph: unknown node id " + std::to_string(id));
    return static_cast<std::size_t>(it - ids_.begin());
}

bool WastewaterGraph::contains(NodeId id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
}

NodeKind WastewaterGraph::kind(NodeId id) const { return kinds_[index_of(id)]; }

std::span<const NodeId> WastewaterGraph::parents(NodeId id) const {
    return parents_[index_of(id)];
}

std::optional<NodeId> WastewaterGraph::child(NodeId id) const { return child_[index_of(id)]; }

std::size_t WastewaterGraph::leaf_index(NodeId leaf) const {
    auto it = std::lower_bound(leaf_ids_.begin(), leaf_ids_.end(), leaf);
    if (it == leaf_ids_.end() || *it != leaf)
        throw ValidationError("graph: node " + std::to_string(leaf) + " is not a leaf");
    return static_cast<std::size_t>(it - leaf_ids_.begin());
}

const LeafMask& WastewaterGraph::upstream_mask(NodeId id) const {
    return upstream_masks_[index_of(id)];
}

std::vector<NodeId> WastewaterGraph::upstream_leaves(NodeId id) const {
    const LeafMask& mask = upstream_mask(id);
    std::vector<NodeId> out;
    out.reserve(mask.count());
    for (std::size_t i = mask.find_first(); i != LeafMask::npos; i = mask.find_next(i))
        out.push_back(leaf_ids_[i]);
    return out;
}

LeafMask WastewaterGraph::leaves_to_mask(std::span<const NodeId> leaves) const {
    LeafMask mask(leaf_count());
    for (NodeId l : leaves) mask.set(leaf_index(l));
    return mask;
}

WastewaterGraph WastewaterGraph::build(std::vector<NodeSpec> nodes, std::vector<Edge> edges) {
    if (nodes.empty()) throw ValidationError("graph: node set is empty");

    WastewaterGraph g;
    std::sort(nodes.begin(), nodes.end(),
              [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].id == nodes[i - 1].id)
            throw ValidationError("graph: duplicate node id " + std::to_string(nodes[i].id));

    const std::size_t n = nodes.size();
    g.ids_.reserve(n);
    g.kinds_.reserve(n);
    for (const NodeSpec& spec : nodes) {
        g.ids_.push_back(spec.id);
        g.kinds_.push_back(spec.kind);
    }
    g.parents_.assign(n, {});
    g.child_.assign(n, std::nullopt);

    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::pair(a.from, a.to) < std::pair(b.from, b.to);
    });
    for (const Edge& e : edges) {
        if (e.from == e.to)
            throw ValidationError("graph: self-loop at node " + std::to_string(e.from));
        if (!g.contains(e.from) || !g.contains(e.to))
            throw ValidationError("graph: edge " + std::to_string(e.from) + " -> " +
                                  std::to_string(e.to) + " references an unknown node");
    }
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] == edges[i - 1])
            throw ValidationError("graph: parallel edge " + std::to_string(edges[i].from) +
                                  " -> " + std::to_string(edges[i].to));

    std::vector<std::size_t> out_degree(n, 0);
    for (const Edge& e : edges) {
        const std::size_t from = g.index_of(e.from);
        const std::size_t to = g.index_of(e.to);
        out_degree[from]++;
        if (out_degree[from] > 1)
            throw ValidationError("graph: node " + std::to_string(e.from) +
                                  " has out-degree > 1 (flow must merge toward a single root)");
        g.child_[from] = e.to;
        g.parents_[to].push_back(e.from);
    }
    g.edges_ = std::move(edges);

    std::vector<NodeId> roots;
    for (std::size_t i = 0; i < n; ++i)
        if (out_degree[i] == 0) roots.push_back(g.ids_[i]);
    if (roots.empty())
        throw ValidationError("graph: no root (every node has an outgoing edge; cycle present)");
    if (roots.size() > 1)
        throw ValidationError("graph: multiple roots (out-degree 0 nodes): " + join_ids(roots));
    g.root_ = roots.front();

    // Every node must reach the root; anything unreached sits on or behind a cycle.
    std::vector<char> reached(n, 0);
    std::deque<std::size_t> frontier{g.index_of(g.root_)};
    reached[frontier.front()] = 1;
    while (!frontier.empty()) {
        const std::size_t v = frontier.front();
        frontier.pop_front();
        for (NodeId p : g.parents_[v]) {
            const std::size_t pi = g.index_of(p);
            if (!reached[pi]) {
                reached[pi] = 1;
                frontier.push_back(pi);
            }
        }
    }
    std::vector<NodeId> unreached;
    for (std::size_t i = 0; i < n; ++i)
        if (!reached[i]) unreached.push_back(g.ids_[i]);
    if (!unreached.empty())
        throw ValidationError("graph: cycle detected; nodes without a path to the root: " +
                              join_ids(unreached));

    // Declared kinds must agree with the structure: leaves are exactly the
    // in-degree-0 nodes.
    std::vector<NodeId> bad_leaves, bad_junctions;
    for (std::size_t i = 0; i < n; ++i) {
        const bool structural_leaf = g.parents_[i].empty();
        if (structural_leaf && g.kinds_[i] != NodeKind::Leaf) bad_junctions.push_back(g.ids_[i]);
        if (!structural_leaf && g.kinds_[i] == NodeKind::Leaf) bad_leaves.push_back(g.ids_[i]);
    }
    if (!bad_junctions.empty())
        throw ValidationError("graph: nodes declared junction but with no inflow (junctions "
                              "need in-degree >= 1): " + join_ids(bad_junctions));
    if (!bad_leaves.empty())
        throw ValidationError("graph: nodes declared leaf but receiving inflow: " +
                              join_ids(bad_leaves));

    for (std::size_t i = 0; i < n; ++i)
        if (g.kinds_[i] == NodeKind::Leaf) g.leaf_ids_.push_back(g.ids_[i]);

    // Topological order by remaining-parent counts (Kahn), leaves first.
    std::vector<std::size_t> pending(n);
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
        pending[i] = g.parents_[i].size();
        if (pending[i] == 0) ready.push_back(i);
    }
    g.topo_order_.reserve(n);
    while (!ready.empty()) {
        const std::size_t v = ready.front();
        ready.pop_front();
        g.topo_order_.push_back(g.ids_[v]);
        if (g.child_[v]) {
            const std::size_t c = g.index_of(*g.child_[v]);
            if (--pending[c] == 0) ready.push_back(c);
        }
    }

    g.upstream_masks_.assign(n, LeafMask(g.leaf_ids_.size()));
    for (NodeId id : g.topo_order_) {
        const std::size_t v = g.index_of(id);
        if (g.kinds_[v] == NodeKind::Leaf) {
            g.upstream_masks_[v].set(g.leaf_index(id));
        } else {
            for (NodeId p : g.parents_[v]) g.upstream_masks_[v] |= g.upstream_masks_[g.index_of(p)];
        }
    }
    return g;
}

std::pair<WastewaterGraph, ReductionMap> reduce(const WastewaterGraph& graph) {
    // Mutable adjacency keyed by node id. Splicing a node out never changes
    // any other node's degree, so a single sweep over the original candidates
    // reaches the fixed point; candidacy is still re-checked at pop time.
    std::map<NodeId, std::set<NodeId>> in_edges;
    std::map<NodeId, std::optional<NodeId>> out_edge;
    for (NodeId id : graph.node_ids()) {
        auto ps = graph.parents(id);
        in_edges[id] = std::set<NodeId>(ps.begin(), ps.end());
        out_edge[id] = graph.child(id);
    }

    std::map<NodeId, NodeId> removed;  // node -> parent at removal time
    std::deque<NodeId> worklist(graph.node_ids().begin(), graph.node_ids().end());
    while (!worklist.empty()) {
        const NodeId v = worklist.front();
        worklist.pop_front();
        if (removed.count(v)) continue;
        if (in_edges[v].size() != 1 || !out_edge[v]) continue;
        const NodeId parent = *in_edges[v].begin();
        const NodeId child = *out_edge[v];
        out_edge[parent] = child;
        in_edges[child].erase(v);
        in_edges[child].insert(parent);
        removed[v] = parent;
        in_edges.erase(v);
        out_edge.erase(v);
    }

    ReductionMap map;
    for (NodeId id : graph.node_ids())
        if (!removed.count(id)) map.kept.push_back(id);
    for (auto [v, rep] : removed) {
        while (removed.count(rep)) rep = removed.at(rep);
        map.removed_to_representative[v] = rep;
    }

    std::vector<WastewaterGraph::NodeSpec> nodes;
    std::vector<WastewaterGraph::Edge> edges;
    for (NodeId id : map.kept) {
        nodes.push_back({id, graph.kind(id)});
        if (out_edge.at(id)) edges.push_back({id, *out_edge.at(id)});
    }
    return {WastewaterGraph::build(std::move(nodes), std::move(edges)), std::move(map)};
}

std::pair<Network, ReductionMap> reduce(const Network& network) {
    auto [graph, map] = reduce(network.graph);
    return {Network{std::move(graph), network.attributes}, std::move(map)};
}

namespace {

double require_finite(const nlohmann::json& value, const char* field, NodeId id) {
    if (!value.is_number())
        throw ValidationError("network document: node " + std::to_string(id) + " field '" +
                              field + "' must be a number");
    const double x = value.get<double>();
    if (!std::isfinite(x))
        throw ValidationError("network document: node " + std::to_string(id) + " field '" +
                              field + "' must be finite");
    return x;
}

}  // namespace

Network load_network(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
        throw ValidationError("network document: expected an object with 'nodes' and 'edges'");

    std::vector<WastewaterGraph::NodeSpec> nodes;
    std::map<NodeId, LeafAttributes> attrs;
    std::set<NodeId> has_attrs;

    for (const auto& node : doc.at("nodes")) {
        if (!node.is_object() || !node.contains("id") || !node.contains("kind"))
            throw ValidationError("network document: every node needs 'id' and 'kind'");
        const auto raw_id = node.at("id");
        if (!raw_id.is_number_integer() || raw_id.get<std::int64_t>() < 0 ||
            raw_id.get<std::int64_t>() > std::int64_t(std::numeric_limits<NodeId>::max()))
            throw ValidationError("network document: node ids must be non-negative integers");
        const NodeId id = raw_id.get<NodeId>();

        const std::string kind = node.at("kind").get<std::string>();
        NodeKind k;
        if (kind == "leaf")
            k = NodeKind::Leaf;
        else if (kind == "junction")
            k = NodeKind::Junction;
        else
            throw ValidationError("network document: node " + std::to_string(id) +
                                  " has unknown kind '" + kind + "'");
        nodes.push_back({id, k});

        LeafAttributes a;
        bool any = false;
        if (node.contains("population")) {
            a.population = require_finite(node.at("population"), "population", id);
            if (a.population < 0)
                throw ValidationError("network document: node " + std::to_string(id) +
                                      " population must be >= 0");
            any = true;
        }
        if (node.contains("flow_mean")) {
            a.flow_mean = require_finite(node.at("flow_mean"), "flow_mean", id);
            any = true;
        }
        if (node.contains("flow_std")) {
            a.flow_std = require_finite(node.at("flow_std"), "flow_std", id);
            if (*a.flow_std < 0)
                throw ValidationError("network document: node " + std::to_string(id) +
                                      " flow_std must be >= 0");
            any = true;
        }
        if (node.contains("outbreak_prior")) {
            a.outbreak_prior = require_finite(node.at("outbreak_prior"), "outbreak_prior", id);
            if (*a.outbreak_prior < 0 || *a.outbreak_prior > 1)
                throw ValidationError("network document: node " + std::to_string(id) +
                                      " outbreak_prior must lie in [0, 1]");
            any = true;
        }
        if (node.contains("poisson_rate")) {
            a.poisson_rate = require_finite(node.at("poisson_rate"), "poisson_rate", id);
            if (*a.poisson_rate < 0)
                throw ValidationError("network document: node " + std::to_string(id) +
                                      " poisson_rate must be >= 0");
            any = true;
        }
        if (any) has_attrs.insert(id);
        if (k == NodeKind::Leaf) attrs[id] = std::move(a);
    }

    std::vector<WastewaterGraph::Edge> edges;
    for (const auto& edge : doc.at("edges")) {
        if (!edge.is_object() || !edge.contains("from") || !edge.contains("to"))
            throw ValidationError("network document: every edge needs 'from' and 'to'");
        edges.push_back({edge.at("from").get<NodeId>(), edge.at("to").get<NodeId>()});
    }

    WastewaterGraph graph = WastewaterGraph::build(std::move(nodes), std::move(edges));

    std::vector<NodeId> junctions_with_attrs;
    for (NodeId id : graph.node_ids())
        if (!graph.is_leaf(id) && has_attrs.count(id)) junctions_with_attrs.push_back(id);
    if (!junctions_with_attrs.empty())
        throw ValidationError("network document: attributes on junction nodes: " +
                              join_ids(junctions_with_attrs));

    std::vector<NodeId> missing;
    for (NodeId leaf : graph.leaf_ids()) {
        const auto& a = attrs[leaf];
        if (!a.outbreak_prior && !a.poisson_rate) missing.push_back(leaf);
    }
    if (!missing.empty())
        throw ValidationError(
            "network document: leaves missing both outbreak_prior and poisson_rate: " +
            join_ids(missing));

    return Network{std::move(graph), std::move(attrs)};
}

Network load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open network file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("network document parse failure (" + path + "): " + e.what());
    }
    return load_network(doc);
}

nlohmann::json network_to_json(const Network& network) {
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId id : network.graph.node_ids()) {
        nlohmann::json node{{"id", id},
                            {"kind", network.graph.is_leaf(id) ? "leaf" : "junction"}};
        auto it = network.attributes.find(id);
        if (it != network.attributes.end()) {
            const LeafAttributes& a = it->second;
            node["population"] = a.population;
            if (a.flow_mean) node["flow_mean"] = *a.flow_mean;
            if (a.flow_std) node["flow_std"] = *a.flow_std;
            if (a.outbreak_prior) node["outbreak_prior"] = *a.outbreak_prior;
            if (a.poisson_rate) node["poisson_rate"] = *a.poisson_rate;
        }
        nodes.push_back(std::move(node));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : network.graph.edges())
        edges.push_back({{"from", e.from}, {"to", e.to}});
    return nlohmann::json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

void save_network_file(const Network& network, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write network file: " + path);
    out << network_to_json(network).dump(2) << "\n";
}

std::string export_dot(const Network& network, const DotAnnotations& annotations) {
    const WastewaterGraph& g = network.graph;
    double total_population = 0.0;
    for (const auto& [id, a] : network.attributes) total_population += a.population;

    const std::set<NodeId> highlighted(annotations.highlights.begin(),
                                       annotations.highlights.end());
    std::ostringstream out;
    out << "digraph wastewater {\n";
    out << "  node [style=filled];\n";
    for (NodeId id : g.node_ids()) {
        out << "  " << id << " [";
        if (g.is_leaf(id))
            out << "shape=ellipse, fillcolor=\"#aecbfa\"";
        else
            out << "shape=box, fillcolor=\"#b7e1cd\"";
        auto label = annotations.labels.find(id);
        if (label != annotations.labels.end()) {
            out << ", label=\"" << label->second << "\"";
        } else if (annotations.population_percent && g.is_leaf(id) && total_population > 0.0) {
            char pct[32];
            std::snprintf(pct, sizeof pct, "%.2f",
                          network.attributes.at(id).population / total_population * 100.0);
            out << ", label=\"" << id << "\\n" << pct << "%\"";
        }
        if (highlighted.count(id)) out << ", penwidth=3, color=\"#d93025\"";
        out << "];\n";
    }
    for (const auto& e : g.edges()) out << "  " << e.from << " -> " << e.to << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace wwsp
