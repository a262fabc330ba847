// SPDX-License-Identifier: Apache-2.0
#include "grag/pipeline.hpp"

namespace grag {

IngestSummary ingest_records(FragmentIndex& index, const std::vector<CorpusRecord>& records,
                             const GraphBuilderConfig& builder) {
    builder.validate();
    index.metadata()["builder"] = builder_to_json(builder);

    IngestSummary summary;
    summary.record_count = records.size();
    summary.embedding_dim = index.embedding_dim();
    for (std::size_t r = 0; r < records.size(); ++r) {
        for (const FragmentText& fragment : records[r].fragments) {
            try {
                index.add_fragment(fragment.id, text_to_graph(fragment.text, builder),
                                   fragment.text);
            } catch (const Error& e) {
                raise(e.code(), "record " + std::to_string(r + 1) + ", fragment '" +
                                    fragment.id + "': " + e.what());
            }
            ++summary.fragment_count;
        }
    }
    return summary;
}

FragmentIndex build_index(const std::vector<CorpusRecord>& records, const GnnConfig& config,
                          const GnnParams& params, const GraphBuilderConfig& builder) {
    FragmentIndex index(config, params);
    ingest_records(index, records, builder);
    return index;
}

GraphBuilderConfig builder_from_index(const FragmentIndex& index) {
    const nlohmann::json& metadata = index.metadata();
    if (metadata.contains("builder")) return builder_from_json(metadata.at("builder"));
    return {};
}

Embedding encode_query_text(const FragmentIndex& index, const std::string& query) {
    if (!index.has_encoder())
        raise(ErrorCode::ConfigError, "index has no encoder; cannot embed query text");
    const KnowledgeGraph graph = text_to_graph(query, builder_from_index(index));
    return encode_graph(graph, index.params(), index.config());
}

RankedHits query_text(const FragmentIndex& index, const std::string& query, std::size_t k) {
    // Emptiness first: an empty index has no stored builder config, and a
    // query must not fail with an encoding mismatch before reporting that.
    if (index.size() == 0) raise(ErrorCode::EmptyIndex, "index has no entries");
    return index.query_top_k(encode_query_text(index, query), k);
}

std::vector<RetrievedFragment> collect_fragments(const FragmentIndex& index,
                                                 const RankedHits& hits) {
    std::vector<RetrievedFragment> fragments;
    fragments.reserve(hits.hits.size());
    for (const Hit& hit : hits.hits) {
        const IndexEntry* entry = index.find(hit.fragment_id);
        if (entry == nullptr)
            raise(ErrorCode::UnknownNode, "hit references missing fragment '" + hit.fragment_id + "'");
        fragments.push_back({entry->fragment_id, entry->payload, entry->embedding, hit.score});
    }
    return fragments;
}

} // namespace grag
