// SPDX-License-Identifier: Apache-2.0
//
// Document-count ablation: rerun retrieval and generation with k documents
// for each k in the sweep list and report the metric means per k.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "grag/generation.hpp"
#include "grag/index.hpp"
#include "grag/metrics.hpp"
#include "grag/pipeline.hpp"

namespace grag {

struct AblationRow {
    std::size_t k = 0;
    MetricReport report;

    bool operator==(const AblationRow&) const = default;
};

nlohmann::json row_to_json(const AblationRow& row);
AblationRow row_from_json(const nlohmann::json& j);

struct BenchOptions {
    std::vector<std::size_t> k_list = {1, 3, 5, 10};
    std::size_t max_tokens = 16;
    std::string end_token = "</s>";
};

// For each k (ascending): retrieve k fragments per record, generate, and
// evaluate. Deterministic for a deterministic generator. Errors: ConfigError
// (empty or non-distinct k_list, k == 0), EmptyInput (no records), plus
// anything the components raise.
std::vector<AblationRow> run_doc_count_ablation(const std::vector<CorpusRecord>& records,
                                                const FragmentIndex& index, Generator& generator,
                                                const BenchOptions& options = {});

// Aligned table with a "Number of documents / Quality / KC / RC" header.
std::string format_ablation_table(const std::vector<AblationRow>& rows);

// Writes <out_dir>/ablation.jsonl (one row per line) and
// <out_dir>/ablation.txt (the aligned table). Creates out_dir if needed.
void write_ablation_reports(const std::filesystem::path& out_dir,
                            const std::vector<AblationRow>& rows);

} // namespace grag
