// SPDX-License-Identifier: Apache-2.0
#include "grag/generation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include "grag/corpus.hpp"
#include "grag/random.hpp"

namespace grag {

const char kDefaultPromptTemplate[] =
    "Answer the question using the knowledge fragments.\n"
    "\n"
    "Fragments:\n"
    "{fragments}\n"
    "\n"
    "Question: {query}\n"
    "Answer:";

void GenerationCondition::validate() const {
    if (max_tokens < 1) raise(ErrorCode::ConfigError, "max_tokens must be >= 1");
    if (end_token.empty()) raise(ErrorCode::ConfigError, "end_token must be non-empty");
}

void ToyDecoderParams::validate() const {
    if (vocab.empty()) raise(ErrorCode::ConfigError, "vocab is empty");
    std::set<std::string> seen;
    for (const std::string& token : vocab)
        if (!seen.insert(token).second)
            raise(ErrorCode::ConfigError, "duplicate vocab token '" + token + "'");
    if (seen.count(end_token) == 0)
        raise(ErrorCode::ConfigError, "vocab does not contain end token '" + end_token + "'");
    const std::size_t v = vocab.size();
    if (token_embeddings.rows != v || output_weight.rows != v || output_bias.size() != v ||
        token_embeddings.cols != output_weight.cols || output_weight.cols == 0)
        raise(ErrorCode::DimMismatch, "inconsistent decoder parameter shapes");
    if (!all_finite(token_embeddings.data) || !all_finite(output_weight.data) ||
        !all_finite(output_bias))
        raise(ErrorCode::NonFiniteInput, "decoder parameters contain NaN or inf");
}

std::string to_string(FinishReason reason) {
    return reason == FinishReason::end_token ? "end_token" : "max_tokens";
}

FinishReason finish_reason_from_string(const std::string& text) {
    if (text == "end_token") return FinishReason::end_token;
    if (text == "max_tokens") return FinishReason::max_tokens;
    raise(ErrorCode::ParseError, "unknown finish reason '" + text + "'");
}

nlohmann::json record_to_json(const GenerationRecord& record) {
    return {{"query", record.query},
            {"fragment_ids", record.fragment_ids},
            {"tokens", record.tokens},
            {"finished_by", to_string(record.finished_by)}};
}

GenerationRecord record_from_json(const nlohmann::json& j) {
    try {
        GenerationRecord record;
        record.query = j.at("query").get<std::string>();
        record.fragment_ids = j.at("fragment_ids").get<std::vector<std::string>>();
        record.tokens = j.at("tokens").get<std::vector<std::string>>();
        record.finished_by = finish_reason_from_string(j.at("finished_by").get<std::string>());
        return record;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("bad generation record: ") + e.what());
    }
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) raise(ErrorCode::NonFiniteInput, "softmax of empty vector");
    if (!all_finite(logits)) raise(ErrorCode::NonFiniteInput, "softmax input contains NaN or inf");
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

namespace {

// Truncates or zero-pads `v` to width `h`.
std::vector<double> adapt_width(const std::vector<double>& v, std::size_t h) {
    std::vector<double> out(h, 0.0);
    for (std::size_t i = 0; i < h && i < v.size(); ++i) out[i] = v[i];
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

} // namespace

std::vector<double> toy_step(const ToyDecoderParams& params,
                             const GenerationCondition& condition,
                             const std::vector<std::string>& emitted) {
    params.validate();
    condition.validate();
    if (emitted.size() >= condition.max_tokens)
        raise(ErrorCode::ConfigError, "emitted sequence already at max_tokens");

    const std::size_t h = params.hidden_dim();

    std::vector<double> frag_mean(h, 0.0);
    if (!condition.fragments.empty()) {
        for (const RetrievedFragment& f : condition.fragments) {
            const std::vector<double> e = adapt_width(f.embedding, h);
            for (std::size_t i = 0; i < h; ++i) frag_mean[i] += e[i];
        }
        for (double& x : frag_mean) x /= static_cast<double>(condition.fragments.size());
    }

    std::vector<double> token_mean(h, 0.0);
    if (!emitted.empty()) {
        for (const std::string& token : emitted) {
            auto it = std::find(params.vocab.begin(), params.vocab.end(), token);
            if (it == params.vocab.end())
                raise(ErrorCode::ConfigError, "emitted token '" + token + "' not in vocab");
            const std::size_t row = static_cast<std::size_t>(it - params.vocab.begin());
            for (std::size_t i = 0; i < h; ++i) token_mean[i] += params.token_embeddings(row, i);
        }
        for (double& x : token_mean) x /= static_cast<double>(emitted.size());
    }

    std::vector<double> hidden(h);
    for (std::size_t i = 0; i < h; ++i) hidden[i] = 0.5 * (frag_mean[i] + token_mean[i]);

    return softmax(affine(params.output_weight, hidden, params.output_bias));
}

GenerationRecord decode_greedy(const ToyDecoderParams& params,
                               const GenerationCondition& condition) {
    params.validate();
    condition.validate();

    GenerationRecord record;
    record.query = condition.query;
    for (const RetrievedFragment& f : condition.fragments)
        record.fragment_ids.push_back(f.fragment_id);

    record.finished_by = FinishReason::max_tokens;
    while (record.tokens.size() < condition.max_tokens) {
        const std::vector<double> dist = toy_step(params, condition, record.tokens);
        std::size_t best = 0;
        for (std::size_t i = 1; i < dist.size(); ++i)
            if (dist[i] > dist[best]) best = i; // ties keep the lowest index
        const std::string& token = params.vocab[best];
        if (token == condition.end_token) {
            record.finished_by = FinishReason::end_token;
            break;
        }
        record.tokens.push_back(token);
    }
    return record;
}

std::string assemble_prompt(const GenerationCondition& condition,
                            const std::string& prompt_template) {
    if (prompt_template.find("{query}") == std::string::npos)
        raise(ErrorCode::BadTemplate, "template is missing {query}");
    if (prompt_template.find("{fragments}") == std::string::npos)
        raise(ErrorCode::BadTemplate, "template is missing {fragments}");

    std::string block;
    for (std::size_t i = 0; i < condition.fragments.size(); ++i) {
        if (i) block.push_back('\n');
        block += "[" + condition.fragments[i].fragment_id + "] " + condition.fragments[i].text;
    }

    auto replace_all = [](std::string text, const std::string& key, const std::string& value) {
        std::size_t pos = 0;
        while ((pos = text.find(key, pos)) != std::string::npos) {
            text.replace(pos, key.size(), value);
            pos += value.size();
        }
        return text;
    };
    return replace_all(replace_all(prompt_template, "{fragments}", block), "{query}",
                       condition.query);
}

ToyGenerator::ToyGenerator(ToyDecoderParams params) : params_(std::move(params)) {
    params_.validate();
}

GenerationResult ToyGenerator::generate(const GenerationCondition& condition) {
    GenerationResult result;
    result.record = decode_greedy(params_, condition);
    result.text = join_tokens(result.record.tokens);
    return result;
}

std::vector<std::string> vocab_from_texts(const std::vector<std::string>& texts) {
    std::set<std::string> tokens;
    for (const std::string& text : texts)
        for (std::string& token : tokenize(text)) tokens.insert(std::move(token));
    return {tokens.begin(), tokens.end()};
}

ToyDecoderParams make_toy_params(const std::vector<std::string>& tokens,
                                 std::size_t hidden_dim, std::uint64_t seed,
                                 const std::string& end_token) {
    if (hidden_dim < 1) raise(ErrorCode::ConfigError, "hidden_dim must be >= 1");

    ToyDecoderParams params;
    params.end_token = end_token;
    std::set<std::string> seen;
    for (const std::string& token : tokens)
        if (seen.insert(token).second) params.vocab.push_back(token);
    if (seen.insert(end_token).second) params.vocab.push_back(end_token);

    const std::size_t v = params.vocab.size();
    const double limit = std::sqrt(6.0 / static_cast<double>(v + hidden_dim));
    std::mt19937_64 rng(seed);
    auto fill = [&](Matrix& m) {
        m = Matrix(v, hidden_dim);
        for (double& x : m.data) x = uniform_in(rng, -limit, limit);
    };
    fill(params.token_embeddings);
    fill(params.output_weight);
    params.output_bias.assign(v, 0.0);
    params.validate();
    return params;
}

} // namespace grag
