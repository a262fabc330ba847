// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "grag/graph.hpp"
#include "grag/linalg.hpp"

namespace grag {

// Permutation-invariant reductions over a neighborhood multiset.
enum class Aggregator { mean, sum, max };

enum class Activation { relu, tanh };

std::string_view to_string(Aggregator agg) noexcept;
std::string_view to_string(Activation act) noexcept;
Aggregator aggregator_from_string(std::string_view s);
Activation activation_from_string(std::string_view s);

/// Structural hyperparameters of the encoder. hidden_dim is both the width
/// of every layer output and the width of the final graph embedding.
struct GnnConfig {
    std::size_t num_layers = 1;
    std::size_t input_dim = 1;
    std::size_t hidden_dim = 1;
    Aggregator aggregator = Aggregator::mean;
    Activation activation = Activation::relu;
    // Layer updates aggregate neighbor states only. With include_self the
    // node's own state joins the multiset; without it, isolated nodes see an
    // empty neighborhood and carry nothing of their own features forward.
    bool include_self = false;

    void validate() const; // ConfigError
    bool operator==(const GnnConfig&) const = default;
};

/// One layer: weight is hidden_dim x in_dim where in_dim is input_dim for
/// layer 0 and hidden_dim afterwards; bias is hidden_dim wide.
struct GnnLayer {
    Matrix weight;
    std::vector<double> bias;

    bool operator==(const GnnLayer&) const = default;
};

struct GnnParams {
    std::vector<GnnLayer> layers;

    bool operator==(const GnnParams&) const = default;
};

using Embedding = std::vector<double>;

// Node states keyed by id; std::map so iteration (and therefore every
// accumulation) runs in ascending-id order.
using NodeStates = std::map<NodeId, FeatureVector>;

/// Deterministic parameter initialization: weights uniform in
/// +-sqrt(6 / (fan_in + fan_out)), biases zero. Entries are drawn row by
/// row, layer by layer, from one mt19937_64 stream, so identical
/// (config, seed) pairs yield bit-identical parameters on any platform.
GnnParams init_params(const GnnConfig& config, std::uint64_t seed);

/// Elementwise mean / sum / max over a multiset of equal-width vectors.
/// The empty multiset yields the zero vector (the isolated-node convention).
/// Errors: DimMismatch.
FeatureVector aggregate(std::span<const FeatureVector> vectors, Aggregator agg, std::size_t dim);

/// One message-passing step: for every node i,
///   out_i = act(W * AGG({states_j : j in N(i)} [+ states_i]) + b).
/// Neighbor states are gathered in ascending id order; with include_self the
/// node's own state is appended after its neighbors.
/// Errors: DimMismatch (state width vs weight columns).
NodeStates propagate_layer(const KnowledgeGraph& g, const NodeStates& states,
                           const GnnLayer& layer, const GnnConfig& config);

/// Runs all num_layers propagation steps starting from the node features.
/// Errors: DimMismatch (graph feature width vs config.input_dim).
NodeStates encode_nodes(const KnowledgeGraph& g, const GnnParams& params, const GnnConfig& config);

/// Graph-level readout: elementwise mean over all final node states, taken
/// in ascending id order. Errors: EmptyGraph.
Embedding readout(const NodeStates& node_states);

/// readout(encode_nodes(...)): one fixed-width embedding per graph, used
/// identically for knowledge fragments and queries. Pure; repeated calls
/// agree bitwise.
Embedding encode_graph(const KnowledgeGraph& g, const GnnParams& params, const GnnConfig& config);

// Parameter file contract: {"config": {...}, "layers": [{"W": [[...]], "b": [...]}]}.
// Doubles survive the JSON round trip bit-exactly.
nlohmann::json gnn_config_to_json(const GnnConfig& config);
GnnConfig gnn_config_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const GnnConfig& config, const GnnParams& params);
std::pair<GnnConfig, GnnParams> params_from_json(const nlohmann::json& j);
void save_params(const std::filesystem::path& path, const GnnConfig& config, const GnnParams& params);
std::pair<GnnConfig, GnnParams> load_params(const std::filesystem::path& path);

} // namespace grag
