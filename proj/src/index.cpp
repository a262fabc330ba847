// SPDX-License-Identifier: Apache-2.0
#include "grag/index.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

#include "grag/linalg.hpp"
#include "grag/random.hpp"

namespace grag {

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size())
        raise(ErrorCode::DimMismatch,
              "cosine: widths " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

nlohmann::json hits_to_json(const RankedHits& hits) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < hits.hits.size(); ++i)
        arr.push_back({{"rank", i + 1},
                       {"fragment_id", hits.hits[i].fragment_id},
                       {"score", hits.hits[i].score}});
    return {{"query_dim", hits.query_dim}, {"hits", std::move(arr)}};
}

FragmentIndex::FragmentIndex(GnnConfig config, GnnParams params) {
    config.validate();
    embedding_dim_ = config.hidden_dim;
    encoder_.emplace(std::move(config), std::move(params));
}

FragmentIndex::FragmentIndex(std::size_t embedding_dim) : embedding_dim_(embedding_dim) {
    if (embedding_dim == 0) raise(ErrorCode::ConfigError, "embedding_dim must be >= 1");
}

std::size_t FragmentIndex::size() const {
    std::shared_lock lock(*mutex_);
    return entries_.size();
}

const GnnConfig& FragmentIndex::config() const {
    if (!encoder_) raise(ErrorCode::ConfigError, "index has no bundled encoder");
    return encoder_->first;
}

const GnnParams& FragmentIndex::params() const {
    if (!encoder_) raise(ErrorCode::ConfigError, "index has no bundled encoder");
    return encoder_->second;
}

void FragmentIndex::add_fragment(const std::string& fragment_id, const KnowledgeGraph& graph,
                                 std::string payload) {
    if (!encoder_)
        raise(ErrorCode::ConfigError, "index has no bundled encoder; use add_entry");
    // Encode outside the lock; insertion re-checks for duplicates.
    Embedding embedding = encode_graph(graph, encoder_->second, encoder_->first);
    add_entry({fragment_id, std::move(embedding), std::move(payload)});
}

void FragmentIndex::add_entry(IndexEntry entry) {
    if (entry.fragment_id.empty()) raise(ErrorCode::ConfigError, "fragment id must be non-empty");
    if (entry.embedding.size() != embedding_dim_)
        raise(ErrorCode::DimMismatch,
              "fragment '" + entry.fragment_id + "' embedding width " +
                  std::to_string(entry.embedding.size()) + ", index width " +
                  std::to_string(embedding_dim_));
    if (!all_finite(entry.embedding))
        raise(ErrorCode::NonFiniteInput, "fragment '" + entry.fragment_id + "' embedding is non-finite");

    std::unique_lock lock(*mutex_);
    if (by_id_.count(entry.fragment_id))
        raise(ErrorCode::DuplicateFragment, "fragment '" + entry.fragment_id + "' already indexed");
    by_id_.emplace(entry.fragment_id, entries_.size());
    entries_.push_back(std::move(entry));
}

RankedHits FragmentIndex::query_top_k(const Embedding& query, std::size_t k) const {
    if (k == 0) raise(ErrorCode::ConfigError, "k must be >= 1");
    if (query.size() != embedding_dim_)
        raise(ErrorCode::DimMismatch,
              "query width " + std::to_string(query.size()) + ", index width " +
                  std::to_string(embedding_dim_));

    std::shared_lock lock(*mutex_);
    if (entries_.empty()) raise(ErrorCode::EmptyIndex, "index contains no fragments");

    RankedHits result;
    result.query_dim = embedding_dim_;
    result.hits.reserve(entries_.size());
    for (const IndexEntry& e : entries_)
        result.hits.push_back({e.fragment_id, cosine_similarity(query, e.embedding)});

    std::sort(result.hits.begin(), result.hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fragment_id < b.fragment_id;
    });
    if (result.hits.size() > k) result.hits.resize(k);
    return result;
}

const IndexEntry* FragmentIndex::find(const std::string& fragment_id) const {
    std::shared_lock lock(*mutex_);
    auto it = by_id_.find(fragment_id);
    return it == by_id_.end() ? nullptr : &entries_[it->second];
}

namespace {

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

nlohmann::json entries_to_json(const std::vector<IndexEntry>& entries) {
    nlohmann::json out = nlohmann::json::array();
    for (const IndexEntry& e : entries)
        out.push_back({{"id", e.fragment_id}, {"embedding", e.embedding}, {"payload", e.payload}});
    return out;
}

} // namespace

nlohmann::json FragmentIndex::to_json() const {
    std::shared_lock lock(*mutex_);
    nlohmann::json entries = entries_to_json(entries_);
    nlohmann::json j = {{"magic", std::string(kMagic)},
                        {"format_version", kFormatVersion},
                        {"embedding_dim", embedding_dim_},
                        {"entry_count", entries_.size()},
                        {"checksum", hex64(fnv1a64(entries.dump()))},
                        {"metadata", metadata_},
                        {"entries", std::move(entries)}};
    if (encoder_) j["encoder"] = params_to_json(encoder_->first, encoder_->second);
    return j;
}

FragmentIndex FragmentIndex::from_json(const nlohmann::json& j) {
    try {
        if (!j.is_object() || j.value("magic", std::string{}) != kMagic)
            raise(ErrorCode::CorruptIndex, "bad magic");
        if (j.at("format_version").get<int>() != kFormatVersion)
            raise(ErrorCode::CorruptIndex, "unsupported format version");

        const auto dim = j.at("embedding_dim").get<std::size_t>();
        const auto count = j.at("entry_count").get<std::size_t>();
        const auto& entries = j.at("entries");
        if (entries.size() != count)
            raise(ErrorCode::CorruptIndex, "entry count mismatch");
        if (hex64(fnv1a64(entries.dump())) != j.at("checksum").get<std::string>())
            raise(ErrorCode::CorruptIndex, "checksum mismatch");

        FragmentIndex index = [&]() -> FragmentIndex {
            if (j.contains("encoder")) {
                auto [config, params] = params_from_json(j.at("encoder"));
                if (config.hidden_dim != dim)
                    raise(ErrorCode::CorruptIndex, "encoder width disagrees with index width");
                return FragmentIndex(std::move(config), std::move(params));
            }
            return FragmentIndex(dim);
        }();

        index.metadata_ = j.value("metadata", nlohmann::json::object());
        for (const auto& je : entries)
            index.add_entry({je.at("id").get<std::string>(),
                             je.at("embedding").get<Embedding>(),
                             je.at("payload").get<std::string>()});
        return index;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::CorruptIndex, std::string("malformed index container: ") + e.what());
    }
}

void FragmentIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
    out << to_json().dump() << '\n';
    if (!out) raise(ErrorCode::IoError, "short write to " + path.string());
}

FragmentIndex FragmentIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::CorruptIndex, path.string() + ": " + e.what());
    }
    return from_json(j);
}

} // namespace grag
