// SPDX-License-Identifier: Apache-2.0
//
// Client for a chat-completion style HTTP endpoint. Request/response shape:
//   POST {"model": ..., "messages": [{"role": "user", "content": prompt}]}
//   ->   {"choices": [{"message": {"content": answer}}]}
// 429 and 5xx responses and transport failures are retried with exponential
// backoff up to max_retries; 401/403 fail immediately as AuthError.
#pragma once

#include <cstdint>
#include <string>

#include "grag/generation.hpp"

namespace grag {

struct LlmClientConfig {
    std::string endpoint; // full URL, e.g. http://localhost:8080/v1/chat/completions
    std::string model;
    std::string api_key;          // sent as "Authorization: Bearer ..." when non-empty
    std::size_t max_retries = 3;  // retries after the first attempt
    std::uint64_t timeout_ms = 30000;
    std::uint64_t backoff_ms = 200; // first retry delay; doubles per retry

    // Reads GRAG_LLM_ENDPOINT, GRAG_LLM_MODEL and GRAG_LLM_API_KEY.
    // ConfigError names the first missing variable.
    static LlmClientConfig from_env();

    void validate() const; // ConfigError on empty endpoint or model
};

// One blocking request plus retries. Returns the first choice's message
// content. Errors: AuthError, RateLimited, TimeoutError, MalformedResponse.
std::string generate_external(const LlmClientConfig& config, const std::string& prompt);

class ExternalGenerator final : public Generator {
  public:
    explicit ExternalGenerator(LlmClientConfig config,
                               std::string prompt_template = kDefaultPromptTemplate);
    GenerationResult generate(const GenerationCondition& condition) override;
    std::string name() const override { return "external"; }

  private:
    LlmClientConfig config_;
    std::string prompt_template_;
};

} // namespace grag
