// SPDX-License-Identifier: Apache-2.0
#include "grag/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

namespace grag {

nlohmann::json row_to_json(const AblationRow& row) {
    return {{"k", row.k},
            {"quality", row.report.quality},
            {"kc", row.report.kc},
            {"rc", row.report.rc},
            {"n_records", row.report.n_records}};
}

AblationRow row_from_json(const nlohmann::json& j) {
    try {
        AblationRow row;
        row.k = j.at("k").get<std::size_t>();
        row.report.quality = j.at("quality").get<double>();
        row.report.kc = j.at("kc").get<double>();
        row.report.rc = j.at("rc").get<double>();
        row.report.n_records = j.at("n_records").get<std::size_t>();
        return row;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad ablation row: ") + e.what());
    }
}

std::vector<AblationRow> run_doc_count_ablation(const std::vector<CorpusRecord>& records,
                                                const FragmentIndex& index, Generator& generator,
                                                const BenchOptions& options) {
    if (records.empty()) raise(ErrorCode::EmptyInput, "no records to benchmark");
    if (options.k_list.empty()) raise(ErrorCode::ConfigError, "k_list is empty");
    std::vector<std::size_t> ks = options.k_list;
    std::sort(ks.begin(), ks.end());
    if (std::adjacent_find(ks.begin(), ks.end()) != ks.end())
        raise(ErrorCode::ConfigError, "k_list values must be distinct");
    if (ks.front() < 1) raise(ErrorCode::ConfigError, "k values must be >= 1");

    std::vector<AblationRow> rows;
    rows.reserve(ks.size());
    for (std::size_t k : ks) {
        std::vector<EvalItem> items;
        items.reserve(records.size());
        for (const CorpusRecord& record : records) {
            const RankedHits hits = query_text(index, record.query, k);

            GenerationCondition condition;
            condition.query = record.query;
            condition.fragments = collect_fragments(index, hits);
            condition.max_tokens = options.max_tokens;
            condition.end_token = options.end_token;

            const GenerationResult result = generator.generate(condition);

            EvalItem item;
            item.record = record;
            item.generated = result.text;
            for (const RetrievedFragment& f : condition.fragments)
                item.fragments_used.push_back(f.text);
            items.push_back(std::move(item));
        }
        rows.push_back({k, evaluate(items)});
    }
    return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
    std::string out = "Number of documents      Quality           KC           RC\n";
    char line[128];
    for (const AblationRow& row : rows) {
        std::snprintf(line, sizeof(line), "%19zu  %11.6f  %11.6f  %11.6f\n", row.k,
                      row.report.quality, row.report.kc, row.report.rc);
        out += line;
    }
    return out;
}

void write_ablation_reports(const std::filesystem::path& out_dir,
                            const std::vector<AblationRow>& rows) {
    std::filesystem::create_directories(out_dir);

    std::ofstream jsonl(out_dir / "ablation.jsonl", std::ios::binary);
    if (!jsonl) raise(ErrorCode::IoError, "cannot write " + (out_dir / "ablation.jsonl").string());
    for (const AblationRow& row : rows) jsonl << row_to_json(row).dump() << '\n';

    std::ofstream table(out_dir / "ablation.txt", std::ios::binary);
    if (!table) raise(ErrorCode::IoError, "cannot write " + (out_dir / "ablation.txt").string());
    table << format_ablation_table(rows);
}

} // namespace grag
