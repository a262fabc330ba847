// SPDX-License-Identifier: Apache-2.0
//
// Proxy metrics over generation output. Quality, knowledge consistency and
// reasoning capability are declared proxies computed from token overlap;
// their definitions live here and nowhere else. All three map into [0,1].
#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "grag/corpus.hpp"

#include "json.hpp"

namespace grag {

// Unigram multiset F1 between the two texts under the corpus normalizer.
// 0 when either side is empty or nothing overlaps.
double quality_f1(const std::string& generated, const std::string& reference);

// Fraction of the generated text's distinct content tokens (stopword-free,
// length >= 3) found in the union of the fragments' token sets. Vacuously
// 1.0 when the generated text has no content tokens.
double kc_support(const std::string& generated, const std::vector<std::string>& fragments);

// Harmonic mean of quality_f1 against the reference answer and the fraction
// of the record's fragments whose content tokens intersect the generated
// text. 0 when either factor is 0. EmptyInput when the record has no
// fragments.
double rc_chain(const std::string& generated, const CorpusRecord& record);

const std::set<std::string>& stopwords();

// Distinct stopword-free tokens of length >= 3.
std::set<std::string> content_tokens(const std::string& text);

struct MetricReport {
    double quality = 0.0;
    double kc = 0.0;
    double rc = 0.0;
    std::size_t n_records = 0;

    bool operator==(const MetricReport&) const = default;
};

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

// One evaluated generation: the source record, the generated text, and the
// payload texts of the fragments the generator actually saw.
struct EvalItem {
    CorpusRecord record;
    std::string generated;
    std::vector<std::string> fragments_used;
};

// Metric registry, so alternative definitions can replace the defaults
// without touching the runner.
using MetricFn = std::function<double(const EvalItem&)>;

struct NamedMetric {
    std::string name;
    MetricFn fn;
};

std::vector<NamedMetric> default_metrics(); // quality, kc, rc

// Arithmetic mean of each metric over the items. EmptyInput on no items.
std::map<std::string, double> evaluate_metrics(const std::vector<NamedMetric>& metrics,
                                               const std::vector<EvalItem>& items);

// The default three metrics as a MetricReport.
MetricReport evaluate(const std::vector<EvalItem>& items);

} // namespace grag
