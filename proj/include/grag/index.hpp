// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "grag/gnn.hpp"
#include "grag/graph.hpp"

namespace grag {

struct IndexEntry {
    std::string fragment_id;
    Embedding embedding;
    std::string payload; // fragment source text, carried through to generation
};

struct Hit {
    std::string fragment_id;
    double score = 0.0;

    bool operator==(const Hit&) const = default;
};

/// Retrieval results, scores non-increasing, ties broken by fragment_id
/// ascending.
struct RankedHits {
    std::vector<Hit> hits;
    std::size_t query_dim = 0;
};

/// Cosine similarity (a.b)/(|a||b|). Zero-norm inputs score 0 by convention
/// so degenerate fragments sink in rankings instead of aborting queries.
/// Errors: DimMismatch.
double cosine_similarity(const Embedding& a, const Embedding& b);

/// {"query_dim": n, "hits": [{"rank": 1, "fragment_id": ..., "score": ...}]}.
/// Shared by the CLI --json output and the HTTP service so the two can
/// never disagree.
nlohmann::json hits_to_json(const RankedHits& hits);

/// Flat store of encoded fragments. Scoring is an exact full scan; that is
/// the contract, and any accelerated structure must be checked against it.
///
/// Concurrency: many readers or one writer. query_top_k takes a shared lock,
/// add_fragment the exclusive side, so no query observes a half-inserted
/// entry.
class FragmentIndex {
public:
    /// Index that encodes fragments itself via the bundled encoder.
    FragmentIndex(GnnConfig config, GnnParams params);

    /// Encoder-less index over precomputed embeddings (add_entry only).
    explicit FragmentIndex(std::size_t embedding_dim);

    FragmentIndex(FragmentIndex&&) noexcept = default;
    FragmentIndex& operator=(FragmentIndex&&) noexcept = default;

    std::size_t size() const;
    std::size_t embedding_dim() const noexcept { return embedding_dim_; }
    bool has_encoder() const noexcept { return encoder_.has_value(); }
    const GnnConfig& config() const;
    const GnnParams& params() const;

    // Opaque sidecar (e.g. the text-to-graph settings an ingest pipeline
    // used); serialized with the index, never interpreted here.
    nlohmann::json& metadata() noexcept { return metadata_; }
    const nlohmann::json& metadata() const noexcept { return metadata_; }

    /// Encodes the graph and stores it under fragment_id.
    /// Errors: DuplicateFragment, ConfigError (no encoder), encoder errors.
    void add_fragment(const std::string& fragment_id, const KnowledgeGraph& graph,
                      std::string payload);

    /// Stores a precomputed embedding. Errors: DuplicateFragment,
    /// DimMismatch, NonFiniteInput.
    void add_entry(IndexEntry entry);

    /// The k entries with the highest cosine similarity to the query, exact.
    /// k larger than the index returns everything. Errors: EmptyIndex,
    /// DimMismatch, ConfigError (k == 0).
    RankedHits query_top_k(const Embedding& query, std::size_t k) const;

    /// Entry lookup by id; nullptr when absent.
    const IndexEntry* find(const std::string& fragment_id) const;

    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }

    // File container: JSON with {magic, format_version, embedding_dim,
    // entry_count, checksum, encoder?, metadata, entries}. The checksum is
    // FNV-1a 64 over the serialized entries array; load rejects bad magic,
    // version, counts, or checksum with CorruptIndex.
    nlohmann::json to_json() const;
    static FragmentIndex from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static FragmentIndex load(const std::filesystem::path& path);

    static constexpr std::string_view kMagic = "GRAG-INDEX";
    static constexpr int kFormatVersion = 1;

private:
    std::size_t embedding_dim_ = 0;
    std::optional<std::pair<GnnConfig, GnnParams>> encoder_;
    std::vector<IndexEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_id_;
    nlohmann::json metadata_ = nlohmann::json::object();
    std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
};

} // namespace grag
