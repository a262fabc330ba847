// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grag/graph.hpp"

namespace grag {

struct FragmentText {
    std::string id;
    std::string text;

    bool operator==(const FragmentText&) const = default;
};

/// One line of the corpus: a query, candidate knowledge fragments, and the
/// reference answer.
struct CorpusRecord {
    std::string query;
    std::vector<FragmentText> fragments;
    std::string reference_answer;

    bool operator==(const CorpusRecord&) const = default;
};

/// Settings for turning text into a co-occurrence graph.
struct GraphBuilderConfig {
    std::size_t window = 2;       // co-occurrence span, in token positions
    std::size_t feature_dim = 64; // hashed feature width
    bool lowercase = true;
    std::size_t min_token_len = 1;

    void validate() const; // ConfigError
    bool operator==(const GraphBuilderConfig&) const = default;
};

nlohmann::json builder_to_json(const GraphBuilderConfig& config);
GraphBuilderConfig builder_from_json(const nlohmann::json& j);

/// Normalizer shared by graph construction and the evaluation metrics:
/// ASCII-lowercases, strips punctuation (any non-alphanumeric byte below
/// 0x80 separates tokens), drops tokens shorter than min_token_len.
std::vector<std::string> tokenize(std::string_view text, bool lowercase = true,
                                  std::size_t min_token_len = 1);

// Corpus contract: UTF-8 line-delimited JSON, one record per line:
// {"query": str, "fragments": [{"id": str, "text": str}], "answer": str}.
// Blank lines are skipped. Malformed lines raise ParseError naming the
// 1-based line number.

/// Streams validated records in file order.
void parse_corpus(std::istream& in, const std::function<void(CorpusRecord)>& sink);

std::vector<CorpusRecord> parse_corpus(std::istream& in);

/// Errors: IoError when the path cannot be opened.
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

/// Inverse of the line format; parse_corpus(record_to_json_line(r)) == r.
std::string record_to_json_line(const CorpusRecord& record);

/// Deterministic token featurization: the token's hash seeds a PRNG that
/// fills a vector of width dim, then the vector is scaled to unit norm.
/// The same token maps to the same vector on every run and platform.
FeatureVector hash_features(std::string_view token, std::size_t dim);

/// Co-occurrence graph over the normalized token sequence: one node per
/// distinct token (ids assigned in first-occurrence order, features hashed),
/// an undirected edge for every token pair within `window` positions.
/// Pairs of the same token are skipped, so the graph has no self-edges.
/// Errors: EmptyText.
KnowledgeGraph text_to_graph(std::string_view text, const GraphBuilderConfig& config = {});

} // namespace grag
