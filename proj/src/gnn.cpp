// SPDX-License-Identifier: Apache-2.0
#include "grag/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "grag/random.hpp"

namespace grag {

std::string_view to_string(Aggregator agg) noexcept {
    switch (agg) {
        case Aggregator::mean: return "mean";
        case Aggregator::sum: return "sum";
        case Aggregator::max: return "max";
    }
    return "mean";
}

std::string_view to_string(Activation act) noexcept {
    return act == Activation::relu ? "relu" : "tanh";
}

Aggregator aggregator_from_string(std::string_view s) {
    if (s == "mean") return Aggregator::mean;
    if (s == "sum") return Aggregator::sum;
    if (s == "max") return Aggregator::max;
    raise(ErrorCode::ConfigError, "unknown aggregator '" + std::string(s) + "'");
}

Activation activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    raise(ErrorCode::ConfigError, "unknown activation '" + std::string(s) + "'");
}

void GnnConfig::validate() const {
    if (num_layers < 1) raise(ErrorCode::ConfigError, "num_layers must be >= 1");
    if (input_dim < 1) raise(ErrorCode::ConfigError, "input_dim must be >= 1");
    if (hidden_dim < 1) raise(ErrorCode::ConfigError, "hidden_dim must be >= 1");
}

GnnParams init_params(const GnnConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    GnnParams params;
    params.layers.reserve(config.num_layers);
    for (std::size_t k = 0; k < config.num_layers; ++k) {
        const std::size_t in_dim = (k == 0) ? config.input_dim : config.hidden_dim;
        const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + config.hidden_dim));
        GnnLayer layer;
        layer.weight = Matrix(config.hidden_dim, in_dim);
        for (double& w : layer.weight.data) w = uniform_in(rng, -limit, limit);
        layer.bias.assign(config.hidden_dim, 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

FeatureVector aggregate(std::span<const FeatureVector> vectors, Aggregator agg, std::size_t dim) {
    for (const FeatureVector& v : vectors)
        if (v.size() != dim)
            raise(ErrorCode::DimMismatch,
                  "aggregate: vector width " + std::to_string(v.size()) + ", expected " +
                      std::to_string(dim));

    FeatureVector out(dim, 0.0);
    if (vectors.empty()) return out; // isolated-node convention

    if (agg == Aggregator::max) {
        out.assign(dim, -std::numeric_limits<double>::infinity());
        for (const FeatureVector& v : vectors)
            for (std::size_t i = 0; i < dim; ++i) out[i] = std::max(out[i], v[i]);
        return out;
    }

    for (const FeatureVector& v : vectors)
        for (std::size_t i = 0; i < dim; ++i) out[i] += v[i];
    if (agg == Aggregator::mean) {
        const double inv = 1.0 / static_cast<double>(vectors.size());
        for (double& x : out) x *= inv;
    }
    return out;
}

namespace {

void apply_activation(std::vector<double>& v, Activation act) {
    if (act == Activation::relu) {
        for (double& x : v) x = std::max(0.0, x);
    } else {
        for (double& x : v) x = std::tanh(x);
    }
}

void check_layer_shapes(const GnnLayer& layer, const GnnConfig& config) {
    if (layer.weight.rows != config.hidden_dim || layer.bias.size() != config.hidden_dim)
        raise(ErrorCode::DimMismatch, "layer output width does not match hidden_dim");
}

} // namespace

NodeStates propagate_layer(const KnowledgeGraph& g, const NodeStates& states,
                           const GnnLayer& layer, const GnnConfig& config) {
    check_layer_shapes(layer, config);
    const std::size_t in_dim = layer.weight.cols;

    NodeStates out;
    std::vector<FeatureVector> gathered;
    for (NodeId id : g.node_ids()) {
        auto it = states.find(id);
        if (it == states.end())
            raise(ErrorCode::UnknownNode, "no state for node " + std::to_string(id));
        if (it->second.size() != in_dim)
            raise(ErrorCode::DimMismatch,
                  "state width " + std::to_string(it->second.size()) +
                      " does not match layer input width " + std::to_string(in_dim));

        gathered.clear();
        for (NodeId nbr : g.neighbors(id)) gathered.push_back(states.at(nbr));
        if (config.include_self) gathered.push_back(it->second);

        FeatureVector h = aggregate(gathered, config.aggregator, in_dim);
        std::vector<double> next = affine(layer.weight, h, layer.bias);
        apply_activation(next, config.activation);
        out.emplace(id, std::move(next));
    }
    return out;
}

NodeStates encode_nodes(const KnowledgeGraph& g, const GnnParams& params, const GnnConfig& config) {
    config.validate();
    if (g.feature_dim() != config.input_dim)
        raise(ErrorCode::DimMismatch,
              "graph feature width " + std::to_string(g.feature_dim()) +
                  " does not match encoder input width " + std::to_string(config.input_dim));
    if (params.layers.size() != config.num_layers)
        raise(ErrorCode::DimMismatch, "parameter layer count does not match config");

    NodeStates states;
    for (NodeId id : g.node_ids()) states.emplace(id, g.features(id));
    for (const GnnLayer& layer : params.layers)
        states = propagate_layer(g, states, layer, config);
    return states;
}

Embedding readout(const NodeStates& node_states) {
    if (node_states.empty()) raise(ErrorCode::EmptyGraph, "readout over empty state map");
    const std::size_t dim = node_states.begin()->second.size();
    Embedding out(dim, 0.0);
    for (const auto& [id, state] : node_states) {
        if (state.size() != dim)
            raise(ErrorCode::DimMismatch, "readout: node state widths disagree");
        for (std::size_t i = 0; i < dim; ++i) out[i] += state[i];
    }
    const double inv = 1.0 / static_cast<double>(node_states.size());
    for (double& x : out) x *= inv;
    return out;
}

Embedding encode_graph(const KnowledgeGraph& g, const GnnParams& params, const GnnConfig& config) {
    return readout(encode_nodes(g, params, config));
}

nlohmann::json gnn_config_to_json(const GnnConfig& config) {
    return {{"num_layers", config.num_layers},
            {"input_dim", config.input_dim},
            {"hidden_dim", config.hidden_dim},
            {"aggregator", std::string(to_string(config.aggregator))},
            {"activation", std::string(to_string(config.activation))},
            {"include_self", config.include_self}};
}

GnnConfig gnn_config_from_json(const nlohmann::json& j) {
    try {
        GnnConfig config;
        config.num_layers = j.at("num_layers").get<std::size_t>();
        config.input_dim = j.at("input_dim").get<std::size_t>();
        config.hidden_dim = j.at("hidden_dim").get<std::size_t>();
        config.aggregator = aggregator_from_string(j.at("aggregator").get<std::string>());
        config.activation = activation_from_string(j.at("activation").get<std::string>());
        config.include_self = j.at("include_self").get<bool>();
        config.validate();
        return config;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad encoder config: ") + e.what());
    }
}

nlohmann::json params_to_json(const GnnConfig& config, const GnnParams& params) {
    nlohmann::json layers = nlohmann::json::array();
    for (const GnnLayer& layer : params.layers) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < layer.weight.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < layer.weight.cols; ++c) row.push_back(layer.weight(r, c));
            rows.push_back(std::move(row));
        }
        layers.push_back({{"W", std::move(rows)}, {"b", layer.bias}});
    }
    return {{"config", gnn_config_to_json(config)}, {"layers", std::move(layers)}};
}

std::pair<GnnConfig, GnnParams> params_from_json(const nlohmann::json& j) {
    GnnConfig config;
    GnnParams params;
    try {
        config = gnn_config_from_json(j.at("config"));
        for (const auto& jl : j.at("layers")) {
            GnnLayer layer;
            const auto& rows = jl.at("W");
            layer.weight = Matrix(rows.size(), rows.empty() ? 0 : rows.at(0).size());
            for (std::size_t r = 0; r < layer.weight.rows; ++r) {
                const auto& row = rows.at(r);
                if (row.size() != layer.weight.cols)
                    raise(ErrorCode::DimMismatch, "ragged weight matrix in parameter file");
                for (std::size_t c = 0; c < layer.weight.cols; ++c)
                    layer.weight(r, c) = row.at(c).get<double>();
            }
            layer.bias = jl.at("b").get<std::vector<double>>();
            params.layers.push_back(std::move(layer));
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad parameter file: ") + e.what());
    }

    if (params.layers.size() != config.num_layers)
        raise(ErrorCode::DimMismatch, "parameter file layer count does not match config");
    for (std::size_t k = 0; k < params.layers.size(); ++k) {
        const GnnLayer& layer = params.layers[k];
        const std::size_t in_dim = (k == 0) ? config.input_dim : config.hidden_dim;
        if (layer.weight.rows != config.hidden_dim || layer.weight.cols != in_dim ||
            layer.bias.size() != config.hidden_dim)
            raise(ErrorCode::DimMismatch,
                  "layer " + std::to_string(k) + " shape does not match config");
        if (!all_finite(layer.weight.data) || !all_finite(layer.bias))
            raise(ErrorCode::NonFiniteInput, "non-finite entry in parameter file");
    }
    return {config, std::move(params)};
}

void save_params(const std::filesystem::path& path, const GnnConfig& config, const GnnParams& params) {
    std::ofstream out(path);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
    out << params_to_json(config, params).dump(2) << '\n';
}

std::pair<GnnConfig, GnnParams> load_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, "bad parameter file " + path.string() + ": " + e.what());
    }
    return params_from_json(j);
}

} // namespace grag
