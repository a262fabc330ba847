// SPDX-License-Identifier: Apache-2.0
//
// Text generation conditioned on retrieved fragments.
//
// Two generators sit behind one interface: a deterministic toy decoder
// (softmax output layer, greedy argmax loop) that needs no network, and an
// external chat-completion client declared in llm_client.hpp. The toy
// decoder's hidden state is the mean of two means: the fragment-embedding
// mean (width-adapted to the hidden size) and the emitted-token embedding
// mean. That recipe is a test vehicle, not a modeling claim.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grag/error.hpp"
#include "grag/linalg.hpp"

#include "json.hpp"

namespace grag {

// One retrieved fragment, in retrieval rank order.
struct RetrievedFragment {
    std::string fragment_id;
    std::string text;
    std::vector<double> embedding;
    double score = 0.0;

    bool operator==(const RetrievedFragment&) const = default;
};

// Everything the generator is conditioned on.
struct GenerationCondition {
    std::string query;
    std::vector<RetrievedFragment> fragments; // rank order preserved
    std::size_t max_tokens = 16;
    std::string end_token = "</s>";

    void validate() const; // ConfigError on max_tokens == 0 or empty end token
};

// Parameters of the toy softmax decoder.
struct ToyDecoderParams {
    std::vector<std::string> vocab; // distinct tokens; contains end_token once
    Matrix token_embeddings;        // |vocab| x hidden
    Matrix output_weight;           // |vocab| x hidden
    std::vector<double> output_bias;
    std::string end_token = "</s>";

    std::size_t hidden_dim() const { return output_weight.cols; }
    void validate() const; // ConfigError / DimMismatch on inconsistent shapes
};

enum class FinishReason { end_token, max_tokens };

std::string to_string(FinishReason reason);
FinishReason finish_reason_from_string(const std::string& text);

// What happened during one generation call.
struct GenerationRecord {
    std::string query;
    std::vector<std::string> fragment_ids;
    std::vector<std::string> tokens; // emitted tokens, end token excluded
    FinishReason finished_by = FinishReason::end_token;

    bool operator==(const GenerationRecord&) const = default;
};

nlohmann::json record_to_json(const GenerationRecord& record);
GenerationRecord record_from_json(const nlohmann::json& j);

// Numerically stable softmax (max subtraction). NonFiniteInput on NaN/inf
// or an empty vector.
std::vector<double> softmax(const std::vector<double>& logits);

// One decoder step: distribution over the vocabulary given the condition
// and the tokens emitted so far.
std::vector<double> toy_step(const ToyDecoderParams& params,
                             const GenerationCondition& condition,
                             const std::vector<std::string>& emitted);

// Greedy argmax loop; ties resolve to the lowest vocab index. Stops on the
// end token (excluded from the output) or after max_tokens steps.
GenerationRecord decode_greedy(const ToyDecoderParams& params,
                               const GenerationCondition& condition);

// Renders {query} and {fragments} placeholders. Fragments appear in rank
// order, one "[id] text" line each. BadTemplate if a placeholder is missing.
std::string assemble_prompt(const GenerationCondition& condition,
                            const std::string& prompt_template);

extern const char kDefaultPromptTemplate[];

struct GenerationResult {
    std::string text;
    GenerationRecord record;
};

class Generator {
  public:
    virtual ~Generator() = default;
    virtual GenerationResult generate(const GenerationCondition& condition) = 0;
    virtual std::string name() const = 0;
};

class ToyGenerator final : public Generator {
  public:
    explicit ToyGenerator(ToyDecoderParams params);
    GenerationResult generate(const GenerationCondition& condition) override;
    std::string name() const override { return "toy"; }
    const ToyDecoderParams& params() const { return params_; }

  private:
    ToyDecoderParams params_;
};

// Sorted distinct tokens of the given texts, via the corpus normalizer.
std::vector<std::string> vocab_from_texts(const std::vector<std::string>& texts);

// Deterministic toy parameters over `tokens` plus the end token (appended
// last if absent). Weights are uniform in +-sqrt(6/(fan_in+fan_out)) from a
// single mt19937_64(seed) stream; biases are zero.
ToyDecoderParams make_toy_params(const std::vector<std::string>& tokens,
                                 std::size_t hidden_dim, std::uint64_t seed,
                                 const std::string& end_token = "</s>");

} // namespace grag
