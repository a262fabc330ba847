// SPDX-License-Identifier: Apache-2.0
#include "grag/metrics.hpp"

#include <algorithm>
#include <unordered_map>

namespace grag {

namespace {

std::unordered_map<std::string, std::size_t> token_counts(const std::string& text) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const std::string& token : tokenize(text)) ++counts[token];
    return counts;
}

std::set<std::string> token_set(const std::string& text) {
    std::set<std::string> out;
    for (std::string& token : tokenize(text)) out.insert(std::move(token));
    return out;
}

} // namespace

double quality_f1(const std::string& generated, const std::string& reference) {
    const auto gen = token_counts(generated);
    const auto ref = token_counts(reference);
    if (gen.empty() || ref.empty()) return 0.0;

    std::size_t overlap = 0, gen_total = 0, ref_total = 0;
    for (const auto& [token, count] : gen) {
        gen_total += count;
        auto it = ref.find(token);
        if (it != ref.end()) overlap += std::min(count, it->second);
    }
    for (const auto& [token, count] : ref) ref_total += count;
    if (overlap == 0) return 0.0;

    const double p = static_cast<double>(overlap) / static_cast<double>(gen_total);
    const double r = static_cast<double>(overlap) / static_cast<double>(ref_total);
    return 2.0 * p * r / (p + r);
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> kStopwords = {
        "about", "after", "again", "all",   "and",   "any",   "are",   "because", "been",
        "before", "being", "both",  "but",   "can",   "did",   "does",  "down",    "each",
        "few",    "for",   "from",  "further", "had", "has",   "have",  "her",     "here",
        "hers",   "him",   "his",   "how",   "into",  "its",   "just",  "more",    "most",
        "not",    "now",   "off",   "once",  "only",  "other", "our",   "ours",    "out",
        "over",   "own",   "same",  "she",   "some",  "such",  "than",  "that",    "the",
        "their",  "theirs", "them", "then",  "there", "these", "they",  "this",    "those",
        "through", "too",  "under", "until", "very",  "was",   "were",  "what",    "when",
        "where",  "which", "while", "who",   "whom",  "why",   "will",  "with",    "you",
        "your",   "yours",
    };
    return kStopwords;
}

std::set<std::string> content_tokens(const std::string& text) {
    std::set<std::string> out;
    for (std::string& token : tokenize(text)) {
        if (token.size() < 3) continue;
        if (stopwords().count(token)) continue;
        out.insert(std::move(token));
    }
    return out;
}

double kc_support(const std::string& generated, const std::vector<std::string>& fragments) {
    const std::set<std::string> content = content_tokens(generated);
    if (content.empty()) return 1.0;

    std::set<std::string> pool;
    for (const std::string& fragment : fragments)
        for (std::string& token : tokenize(fragment)) pool.insert(std::move(token));

    std::size_t supported = 0;
    for (const std::string& token : content)
        if (pool.count(token)) ++supported;
    return static_cast<double>(supported) / static_cast<double>(content.size());
}

double rc_chain(const std::string& generated, const CorpusRecord& record) {
    if (record.fragments.empty()) raise(ErrorCode::EmptyInput, "record has no fragments");

    const double f1 = quality_f1(generated, record.reference_answer);

    const std::set<std::string> gen_tokens = token_set(generated);
    std::size_t grounded = 0;
    for (const FragmentText& fragment : record.fragments) {
        for (const std::string& token : content_tokens(fragment.text)) {
            if (gen_tokens.count(token)) {
                ++grounded;
                break;
            }
        }
    }
    const double grounding =
        static_cast<double>(grounded) / static_cast<double>(record.fragments.size());

    if (f1 == 0.0 || grounding == 0.0) return 0.0;
    return 2.0 * f1 * grounding / (f1 + grounding);
}

nlohmann::json report_to_json(const MetricReport& report) {
    return {{"quality", report.quality},
            {"kc", report.kc},
            {"rc", report.rc},
            {"n_records", report.n_records}};
}

MetricReport report_from_json(const nlohmann::json& j) {
    try {
        MetricReport report;
        report.quality = j.at("quality").get<double>();
        report.kc = j.at("kc").get<double>();
        report.rc = j.at("rc").get<double>();
        report.n_records = j.at("n_records").get<std::size_t>();
        return report;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad metric report: ") + e.what());
    }
}

std::vector<NamedMetric> default_metrics() {
    return {
        {"quality",
         [](const EvalItem& item) { return quality_f1(item.generated, item.record.reference_answer); }},
        {"kc", [](const EvalItem& item) { return kc_support(item.generated, item.fragments_used); }},
        {"rc", [](const EvalItem& item) { return rc_chain(item.generated, item.record); }},
    };
}

std::map<std::string, double> evaluate_metrics(const std::vector<NamedMetric>& metrics,
                                               const std::vector<EvalItem>& items) {
    if (items.empty()) raise(ErrorCode::EmptyInput, "no records to evaluate");
    std::map<std::string, double> means;
    for (const NamedMetric& metric : metrics) {
        double total = 0.0;
        for (const EvalItem& item : items) total += metric.fn(item);
        means[metric.name] = total / static_cast<double>(items.size());
    }
    return means;
}

MetricReport evaluate(const std::vector<EvalItem>& items) {
    const std::map<std::string, double> means = evaluate_metrics(default_metrics(), items);
    MetricReport report;
    report.quality = means.at("quality");
    report.kc = means.at("kc");
    report.rc = means.at("rc");
    report.n_records = items.size();
    return report;
}

} // namespace grag
