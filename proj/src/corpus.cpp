// SPDX-License-Identifier: Apache-2.0
#include "grag/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "grag/random.hpp"

namespace grag {

void GraphBuilderConfig::validate() const {
    if (window < 1) raise(ErrorCode::ConfigError, "window must be >= 1");
    if (feature_dim < 1) raise(ErrorCode::ConfigError, "feature_dim must be >= 1");
}

nlohmann::json builder_to_json(const GraphBuilderConfig& config) {
    return {{"window", config.window},
            {"feature_dim", config.feature_dim},
            {"lowercase", config.lowercase},
            {"min_token_len", config.min_token_len}};
}

GraphBuilderConfig builder_from_json(const nlohmann::json& j) {
    try {
        GraphBuilderConfig config;
        config.window = j.at("window").get<std::size_t>();
        config.feature_dim = j.at("feature_dim").get<std::size_t>();
        config.lowercase = j.at("lowercase").get<bool>();
        config.min_token_len = j.at("min_token_len").get<std::size_t>();
        config.validate();
        return config;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad graph-builder config: ") + e.what());
    }
}

std::vector<std::string> tokenize(std::string_view text, bool lowercase,
                                  std::size_t min_token_len) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.size() >= min_token_len && !current.empty()) tokens.push_back(current);
        current.clear();
    };
    for (unsigned char c : text) {
        // Bytes >= 0x80 (UTF-8 continuations and leads) stay inside tokens.
        if (c >= 0x80 || std::isalnum(c)) {
            current.push_back(lowercase && c < 0x80
                                  ? static_cast<char>(std::tolower(c))
                                  : static_cast<char>(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

namespace {

CorpusRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
    auto fail = [line_no](const std::string& what) -> CorpusRecord {
        raise(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what);
    };

    if (!j.is_object()) return fail("record is not a JSON object");
    try {
        CorpusRecord record;
        record.query = j.at("query").get<std::string>();
        record.reference_answer = j.at("answer").get<std::string>();
        std::unordered_set<std::string> ids;
        for (const auto& jf : j.at("fragments")) {
            FragmentText fragment{jf.at("id").get<std::string>(), jf.at("text").get<std::string>()};
            if (fragment.id.empty()) return fail("fragment id is empty");
            if (!ids.insert(fragment.id).second)
                return fail("duplicate fragment id '" + fragment.id + "'");
            record.fragments.push_back(std::move(fragment));
        }
        if (record.query.empty()) return fail("query is empty");
        return record;
    } catch (const nlohmann::json::exception& e) {
        return fail(e.what());
    }
}

} // namespace

void parse_corpus(std::istream& in, const std::function<void(CorpusRecord)>& sink) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        sink(record_from_json(j, line_no));
    }
}

std::vector<CorpusRecord> parse_corpus(std::istream& in) {
    std::vector<CorpusRecord> records;
    parse_corpus(in, [&](CorpusRecord r) { records.push_back(std::move(r)); });
    return records;
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot read corpus " + path.string());
    return parse_corpus(in);
}

std::string record_to_json_line(const CorpusRecord& record) {
    nlohmann::json fragments = nlohmann::json::array();
    for (const FragmentText& f : record.fragments)
        fragments.push_back({{"id", f.id}, {"text", f.text}});
    nlohmann::json j = {{"query", record.query},
                        {"fragments", std::move(fragments)},
                        {"answer", record.reference_answer}};
    return j.dump();
}

FeatureVector hash_features(std::string_view token, std::size_t dim) {
    // Fixed salt keeps the feature space stable across releases.
    constexpr std::uint64_t kSalt = 0x67726167ULL; // "grag"
    std::mt19937_64 rng(fnv1a64(token) ^ kSalt);
    FeatureVector v(dim);
    for (double& x : v) x = uniform_in(rng, -1.0, 1.0);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) { // unreachable in practice; keeps the unit-norm contract total
        v[0] = 1.0;
        return v;
    }
    for (double& x : v) x /= norm;
    return v;
}

KnowledgeGraph text_to_graph(std::string_view text, const GraphBuilderConfig& config) {
    config.validate();
    const std::vector<std::string> tokens =
        tokenize(text, config.lowercase, config.min_token_len);
    if (tokens.empty()) raise(ErrorCode::EmptyText, "no tokens after normalization");

    std::unordered_map<std::string, NodeId> ids;
    std::vector<std::pair<NodeId, FeatureVector>> nodes;
    std::vector<NodeId> sequence;
    sequence.reserve(tokens.size());
    for (const std::string& token : tokens) {
        auto [it, inserted] = ids.emplace(token, static_cast<NodeId>(nodes.size()));
        if (inserted) nodes.emplace_back(it->second, hash_features(token, config.feature_dim));
        sequence.push_back(it->second);
    }

    std::set<std::pair<NodeId, NodeId>> pairs;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        for (std::size_t j = i + 1; j < sequence.size() && j - i <= config.window; ++j) {
            NodeId a = sequence[i], b = sequence[j];
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            pairs.emplace(a, b);
        }
    }
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto& [a, b] : pairs) edges.push_back({a, b, std::nullopt});

    return KnowledgeGraph::build(nodes, std::move(edges), /*directed=*/false);
}

} // namespace grag
