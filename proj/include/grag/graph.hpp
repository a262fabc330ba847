// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "grag/error.hpp"

namespace grag {

// Node ids are non-negative and unique within a graph; they do not have to
// be dense.
using NodeId = std::int64_t;

using FeatureVector = std::vector<double>;

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    std::optional<std::string> label;

    bool operator==(const Edge&) const = default;
};

/// Immutable knowledge graph: nodes with fixed-width feature vectors plus
/// directed or undirected edges. Validation happens once in build(); after
/// that the structure is read-only and safe to share across threads.
class KnowledgeGraph {
public:
    /// Validates and constructs a graph.
    ///
    /// Errors: EmptyGraph (no nodes), DuplicateNode, DimMismatch (feature
    /// widths disagree or are empty), NonFiniteInput (NaN/inf feature),
    /// DanglingEdge (edge endpoint missing), DuplicateEdge (repeated
    /// (src,dst,label) triple; in undirected mode the reversed triple counts
    /// as the same edge).
    static KnowledgeGraph build(const std::vector<std::pair<NodeId, FeatureVector>>& node_specs,
                                std::vector<Edge> edge_specs, bool directed = false);

    std::size_t feature_dim() const noexcept { return feature_dim_; }
    bool directed() const noexcept { return directed_; }
    std::size_t num_nodes() const noexcept { return node_ids_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }

    // Self-edges are legal but worth surfacing; a node with a self-edge is
    // its own neighbor.
    std::size_t self_edge_count() const noexcept { return self_edges_; }

    bool has_node(NodeId id) const { return features_.count(id) != 0; }

    /// Node ids in ascending order; the canonical iteration order everywhere.
    const std::vector<NodeId>& node_ids() const noexcept { return node_ids_; }

    /// Initial feature vector of a node. Errors: UnknownNode.
    const FeatureVector& features(NodeId id) const;

    /// Neighbor ids, sorted ascending. Undirected graphs are symmetric;
    /// directed graphs return in-neighbors (messages flow along edges into
    /// the node). Errors: UnknownNode.
    const std::vector<NodeId>& neighbors(NodeId id) const;

    const std::vector<Edge>& edges() const noexcept { return edges_; }

private:
    KnowledgeGraph() = default;

    std::size_t feature_dim_ = 0;
    bool directed_ = false;
    std::size_t self_edges_ = 0;
    std::vector<NodeId> node_ids_;
    std::unordered_map<NodeId, FeatureVector> features_;
    std::unordered_map<NodeId, std::vector<NodeId>> adjacency_;
    std::vector<Edge> edges_;
};

// Graph JSON contract: {"feature_dim": int, "directed": bool,
// "nodes": [{"id": int, "features": [...]}, ...],
// "edges": [{"src": int, "dst": int, "label"?: str}, ...]}
nlohmann::json graph_to_json(const KnowledgeGraph& g);
KnowledgeGraph graph_from_json(const nlohmann::json& j);

} // namespace grag
