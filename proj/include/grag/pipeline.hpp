// SPDX-License-Identifier: Apache-2.0
//
// Glue between corpus records, the graph encoder and the fragment index:
// ingest every fragment of every record, and answer free-text queries
// against the result. The text-to-graph settings used at ingest time travel
// inside the index metadata so the query side can never drift from them.
#pragma once

#include <string>
#include <vector>

#include "grag/corpus.hpp"
#include "grag/generation.hpp"
#include "grag/gnn.hpp"
#include "grag/index.hpp"

namespace grag {

struct IngestSummary {
    std::size_t record_count = 0;
    std::size_t fragment_count = 0;
    std::size_t embedding_dim = 0;
};

// New index over all fragments. Fragment ids must be unique corpus-wide.
// Component errors are rethrown with "record N, fragment 'id'" context.
FragmentIndex build_index(const std::vector<CorpusRecord>& records, const GnnConfig& config,
                          const GnnParams& params, const GraphBuilderConfig& builder);

// Adds every fragment of `records` to an existing index using `builder`,
// and stamps `builder` into the index metadata.
IngestSummary ingest_records(FragmentIndex& index, const std::vector<CorpusRecord>& records,
                             const GraphBuilderConfig& builder);

// The builder config stored at ingest time, or defaults when absent.
GraphBuilderConfig builder_from_index(const FragmentIndex& index);

// Query text -> graph -> embedding, using the index's encoder and stored
// builder config. Errors: ConfigError (no encoder), EmptyText.
Embedding encode_query_text(const FragmentIndex& index, const std::string& query);

RankedHits query_text(const FragmentIndex& index, const std::string& query, std::size_t k);

// Hits joined back to their payloads, rank order preserved.
std::vector<RetrievedFragment> collect_fragments(const FragmentIndex& index,
                                                 const RankedHits& hits);

} // namespace grag
