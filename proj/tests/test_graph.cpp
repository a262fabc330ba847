// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <set>

#include "grag/graph.hpp"
#include "grag/random.hpp"

using namespace grag;

namespace {

KnowledgeGraph path3() {
    return KnowledgeGraph::build({{0, {1.0}}, {1, {2.0}}, {2, {3.0}}},
                                 {{0, 1, std::nullopt}, {1, 2, std::nullopt}});
}

bool raises(ErrorCode code, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == code;
    }
    return false;
}

} // namespace

TEST_CASE("single node graph is valid") {
    const KnowledgeGraph g = KnowledgeGraph::build({{0, {1.0, 2.0}}}, {});
    CHECK(g.num_nodes() == 1);
    CHECK(g.num_edges() == 0);
    CHECK(g.feature_dim() == 2);
    CHECK(g.neighbors(0).empty());
}

TEST_CASE("build rejects bad input") {
    CHECK(raises(ErrorCode::EmptyGraph, [] { KnowledgeGraph::build({}, {}); }));
    CHECK(raises(ErrorCode::DanglingEdge, [] {
        KnowledgeGraph::build({{0, {1.0}}, {1, {1.0}}}, {{0, 2, std::nullopt}});
    }));
    CHECK(raises(ErrorCode::DimMismatch, [] {
        KnowledgeGraph::build({{0, {1.0, 0.0}}, {1, {0.0, 1.0, 0.0}}}, {});
    }));
    CHECK(raises(ErrorCode::DimMismatch, [] { KnowledgeGraph::build({{0, {}}}, {}); }));
    CHECK(raises(ErrorCode::DuplicateNode, [] {
        KnowledgeGraph::build({{0, {1.0}}, {0, {2.0}}}, {});
    }));
    CHECK(raises(ErrorCode::DuplicateNode, [] { KnowledgeGraph::build({{-1, {1.0}}}, {}); }));
    CHECK(raises(ErrorCode::NonFiniteInput, [] {
        KnowledgeGraph::build({{0, {std::numeric_limits<double>::quiet_NaN()}}}, {});
    }));
}

TEST_CASE("duplicate edges are rejected") {
    CHECK(raises(ErrorCode::DuplicateEdge, [] {
        KnowledgeGraph::build({{0, {1.0}}, {1, {1.0}}},
                              {{0, 1, std::nullopt}, {0, 1, std::nullopt}});
    }));
    // Undirected: the reversed triple is the same edge.
    CHECK(raises(ErrorCode::DuplicateEdge, [] {
        KnowledgeGraph::build({{0, {1.0}}, {1, {1.0}}},
                              {{0, 1, std::nullopt}, {1, 0, std::nullopt}});
    }));
    // Directed: reversed is a distinct edge.
    const KnowledgeGraph g = KnowledgeGraph::build(
        {{0, {1.0}}, {1, {1.0}}}, {{0, 1, std::nullopt}, {1, 0, std::nullopt}}, true);
    CHECK(g.num_edges() == 2);
    // Different labels make distinct edges.
    const KnowledgeGraph h = KnowledgeGraph::build(
        {{0, {1.0}}, {1, {1.0}}}, {{0, 1, std::string("a")}, {0, 1, std::string("b")}});
    CHECK(h.num_edges() == 2);
}

TEST_CASE("self edges are permitted and counted") {
    const KnowledgeGraph g =
        KnowledgeGraph::build({{0, {1.0}}, {1, {1.0}}}, {{0, 0, std::nullopt}});
    CHECK(g.self_edge_count() == 1);
    CHECK(g.neighbors(0) == std::vector<NodeId>{0});
    CHECK(path3().self_edge_count() == 0);
}

TEST_CASE("neighbors on an undirected path") {
    const KnowledgeGraph g = path3();
    CHECK(g.neighbors(1) == std::vector<NodeId>{0, 2});
    CHECK(g.neighbors(0) == std::vector<NodeId>{1});
    CHECK(g.neighbors(2) == std::vector<NodeId>{1});
}

TEST_CASE("isolated node has no neighbors") {
    const KnowledgeGraph g =
        KnowledgeGraph::build({{0, {1.0}}, {1, {1.0}}, {7, {0.5}}}, {{0, 1, std::nullopt}});
    CHECK(g.neighbors(7).empty());
}

TEST_CASE("directed graphs expose in-neighbors") {
    const KnowledgeGraph g =
        KnowledgeGraph::build({{0, {1.0}}, {1, {1.0}}}, {{0, 1, std::nullopt}}, true);
    CHECK(g.neighbors(1) == std::vector<NodeId>{0});
    CHECK(g.neighbors(0).empty());
}

TEST_CASE("unknown node lookups fail") {
    const KnowledgeGraph g = path3();
    CHECK(raises(ErrorCode::UnknownNode, [&] { g.neighbors(99); }));
    CHECK(raises(ErrorCode::UnknownNode, [&] { g.features(99); }));
}

TEST_CASE("node ids need not be dense") {
    const KnowledgeGraph g =
        KnowledgeGraph::build({{5, {1.0}}, {100, {2.0}}}, {{100, 5, std::nullopt}});
    CHECK(g.node_ids() == std::vector<NodeId>{5, 100});
    CHECK(g.neighbors(5) == std::vector<NodeId>{100});
    CHECK(g.features(100) == FeatureVector{2.0});
}

TEST_CASE("random graphs: symmetry, sortedness, validity") {
    std::mt19937_64 rng(20240817);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        const std::size_t dim = 1 + rng() % 6;
        std::vector<std::pair<NodeId, FeatureVector>> nodes;
        for (std::size_t i = 0; i < n; ++i) {
            FeatureVector f(dim);
            for (double& x : f) x = uniform_in(rng, -1.0, 1.0);
            nodes.emplace_back(static_cast<NodeId>(i * 3), std::move(f)); // sparse ids
        }
        std::set<std::pair<NodeId, NodeId>> chosen;
        for (std::size_t e = 0; e < n; ++e) {
            NodeId a = static_cast<NodeId>((rng() % n) * 3);
            NodeId b = static_cast<NodeId>((rng() % n) * 3);
            if (a > b) std::swap(a, b);
            chosen.emplace(a, b);
        }
        std::vector<Edge> edges;
        for (const auto& [a, b] : chosen) edges.push_back({a, b, std::nullopt});

        const KnowledgeGraph g = KnowledgeGraph::build(nodes, edges);
        CHECK(g.num_nodes() == n);
        CHECK(g.feature_dim() == dim);
        for (NodeId i : g.node_ids()) {
            const auto& ns = g.neighbors(i);
            CHECK(std::is_sorted(ns.begin(), ns.end()));
            CHECK(g.features(i).size() == dim);
            for (NodeId j : ns) {
                const auto& back = g.neighbors(j);
                CHECK(std::binary_search(back.begin(), back.end(), i));
            }
        }
    }
}

TEST_CASE("graph JSON round trip preserves everything") {
    const KnowledgeGraph g = KnowledgeGraph::build(
        {{0, {1.5, -2.25}}, {3, {0.125, 0.0}}, {9, {1e-17, 3.0}}},
        {{0, 3, std::string("rel")}, {3, 9, std::nullopt}});
    const nlohmann::json j = graph_to_json(g);

    CHECK(j.at("feature_dim") == 2);
    CHECK(j.at("directed") == false);
    CHECK(j.at("nodes").size() == 3);
    CHECK(j.at("nodes").at(0).at("id") == 0);
    CHECK(j.at("edges").at(0).at("src") == 0);
    CHECK(j.at("edges").at(0).at("dst") == 3);
    CHECK(j.at("edges").at(0).at("label") == "rel");
    CHECK_FALSE(j.at("edges").at(1).contains("label"));

    const KnowledgeGraph back = graph_from_json(j);
    CHECK(back.num_nodes() == g.num_nodes());
    CHECK(back.num_edges() == g.num_edges());
    CHECK(back.directed() == g.directed());
    for (NodeId id : g.node_ids()) {
        CHECK(back.features(id) == g.features(id)); // bitwise, via JSON round trip
        CHECK(back.neighbors(id) == g.neighbors(id));
    }
    CHECK(graph_to_json(back) == j);
}

TEST_CASE("graph JSON rejects malformed input") {
    CHECK(raises(ErrorCode::ParseError, [] { graph_from_json(nlohmann::json::array()); }));
    CHECK(raises(ErrorCode::ParseError, [] {
        graph_from_json({{"feature_dim", 2}, {"directed", false}, {"nodes", "zap"}, {"edges", nlohmann::json::array()}});
    }));
    // Declared feature_dim must match the vectors.
    CHECK(raises(ErrorCode::DimMismatch, [] {
        graph_from_json({{"feature_dim", 3},
                         {"directed", false},
                         {"nodes", nlohmann::json::array({{{"id", 0}, {"features", {1.0}}}})},
                         {"edges", nlohmann::json::array()}});
    }));
}
