// SPDX-License-Identifier: Apache-2.0
#include "grag/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace grag {

KnowledgeGraph KnowledgeGraph::build(const std::vector<std::pair<NodeId, FeatureVector>>& node_specs,
                                     std::vector<Edge> edge_specs, bool directed) {
    if (node_specs.empty()) raise(ErrorCode::EmptyGraph, "graph must contain at least one node");

    KnowledgeGraph g;
    g.directed_ = directed;
    g.feature_dim_ = node_specs.front().second.size();
    if (g.feature_dim_ == 0)
        raise(ErrorCode::DimMismatch, "feature vectors must be non-empty");

    g.features_.reserve(node_specs.size());
    g.node_ids_.reserve(node_specs.size());
    for (const auto& [id, features] : node_specs) {
        if (id < 0)
            raise(ErrorCode::DuplicateNode, "node id " + std::to_string(id) + " is negative");
        if (features.size() != g.feature_dim_)
            raise(ErrorCode::DimMismatch,
                  "node " + std::to_string(id) + " has feature width " +
                      std::to_string(features.size()) + ", expected " +
                      std::to_string(g.feature_dim_));
        for (double v : features)
            if (!std::isfinite(v))
                raise(ErrorCode::NonFiniteInput,
                      "node " + std::to_string(id) + " has a non-finite feature entry");
        if (!g.features_.emplace(id, features).second)
            raise(ErrorCode::DuplicateNode, "node id " + std::to_string(id) + " appears twice");
        g.node_ids_.push_back(id);
    }
    std::sort(g.node_ids_.begin(), g.node_ids_.end());

    // Adjacency as sets during construction so neighbor lists come out unique
    // and sorted.
    std::unordered_map<NodeId, std::set<NodeId>> adj;
    for (NodeId id : g.node_ids_) adj[id];

    std::set<std::tuple<NodeId, NodeId, std::optional<std::string>>> seen;
    for (const Edge& e : edge_specs) {
        if (!g.has_node(e.src))
            raise(ErrorCode::DanglingEdge, "edge source " + std::to_string(e.src) + " does not exist");
        if (!g.has_node(e.dst))
            raise(ErrorCode::DanglingEdge, "edge target " + std::to_string(e.dst) + " does not exist");
        NodeId a = e.src, b = e.dst;
        if (!directed && a > b) std::swap(a, b); // undirected: (i,j) and (j,i) are the same edge
        if (!seen.emplace(a, b, e.label).second)
            raise(ErrorCode::DuplicateEdge,
                  "duplicate edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ")");
        if (e.src == e.dst) ++g.self_edges_;
        if (directed) {
            adj[e.dst].insert(e.src); // in-neighbors
        } else {
            adj[e.src].insert(e.dst);
            adj[e.dst].insert(e.src);
        }
    }
    g.edges_ = std::move(edge_specs);

    g.adjacency_.reserve(adj.size());
    for (auto& [id, nbrs] : adj)
        g.adjacency_.emplace(id, std::vector<NodeId>(nbrs.begin(), nbrs.end()));

    return g;
}

const FeatureVector& KnowledgeGraph::features(NodeId id) const {
    auto it = features_.find(id);
    if (it == features_.end())
        raise(ErrorCode::UnknownNode, "node " + std::to_string(id) + " does not exist");
    return it->second;
}

const std::vector<NodeId>& KnowledgeGraph::neighbors(NodeId id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end())
        raise(ErrorCode::UnknownNode, "node " + std::to_string(id) + " does not exist");
    return it->second;
}

nlohmann::json graph_to_json(const KnowledgeGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId id : g.node_ids())
        nodes.push_back({{"id", id}, {"features", g.features(id)}});

    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) {
        nlohmann::json je = {{"src", e.src}, {"dst", e.dst}};
        if (e.label) je["label"] = *e.label;
        edges.push_back(std::move(je));
    }

    return {{"feature_dim", g.feature_dim()},
            {"directed", g.directed()},
            {"nodes", std::move(nodes)},
            {"edges", std::move(edges)}};
}

KnowledgeGraph graph_from_json(const nlohmann::json& j) {
    try {
        const std::size_t feature_dim = j.at("feature_dim").get<std::size_t>();
        const bool directed = j.at("directed").get<bool>();

        std::vector<std::pair<NodeId, FeatureVector>> nodes;
        for (const auto& jn : j.at("nodes")) {
            nodes.emplace_back(jn.at("id").get<NodeId>(),
                               jn.at("features").get<FeatureVector>());
        }
        std::vector<Edge> edges;
        for (const auto& je : j.at("edges")) {
            Edge e;
            e.src = je.at("src").get<NodeId>();
            e.dst = je.at("dst").get<NodeId>();
            if (je.contains("label")) e.label = je.at("label").get<std::string>();
            edges.push_back(std::move(e));
        }

        KnowledgeGraph g = KnowledgeGraph::build(nodes, std::move(edges), directed);
        if (g.feature_dim() != feature_dim)
            raise(ErrorCode::DimMismatch,
                  "declared feature_dim " + std::to_string(feature_dim) +
                      " does not match node features (" + std::to_string(g.feature_dim()) + ")");
        return g;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad graph JSON: ") + e.what());
    }
}

} // namespace grag
