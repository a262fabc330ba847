// SPDX-License-Identifier: Apache-2.0
#include "grag/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace grag {

LlmClientConfig LlmClientConfig::from_env() {
    auto require = [](const char* name) {
        const char* value = std::getenv(name);
        if (value == nullptr || *value == '\0')
            raise(ErrorCode::ConfigError, std::string("environment variable ") + name + " is not set");
        return std::string(value);
    };
    LlmClientConfig config;
    config.endpoint = require("GRAG_LLM_ENDPOINT");
    config.model = require("GRAG_LLM_MODEL");
    config.api_key = require("GRAG_LLM_API_KEY");
    return config;
}

void LlmClientConfig::validate() const {
    if (endpoint.empty()) raise(ErrorCode::ConfigError, "endpoint is empty");
    if (model.empty()) raise(ErrorCode::ConfigError, "model is empty");
}

namespace {

struct SplitUrl {
    std::string base; // scheme://host:port
    std::string path; // leading slash
};

SplitUrl split_url(const std::string& url) {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        raise(ErrorCode::ConfigError, "endpoint URL lacks a scheme: " + url);
    const std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string extract_content(const std::string& body) {
    try {
        nlohmann::json j = nlohmann::json::parse(body);
        const nlohmann::json& choices = j.at("choices");
        if (!choices.is_array() || choices.empty())
            raise(ErrorCode::MalformedResponse, "response has no choices");
        return choices.at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::MalformedResponse, std::string("cannot parse response: ") + e.what());
    }
}

} // namespace

std::string generate_external(const LlmClientConfig& config, const std::string& prompt) {
    config.validate();
    const SplitUrl url = split_url(config.endpoint);

    httplib::Client client(url.base);
    const auto timeout = std::chrono::milliseconds(config.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

    const std::string body = nlohmann::json{
        {"model", config.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    }.dump();

    bool saw_transient_status = false;
    for (std::size_t attempt = 0;; ++attempt) {
        httplib::Result res = client.Post(url.path, headers, body, "application/json");
        if (res) {
            const int status = res->status;
            if (status == 200) return extract_content(res->body);
            if (status == 401 || status == 403)
                raise(ErrorCode::AuthError, "endpoint returned HTTP " + std::to_string(status));
            if (status != 429 && status < 500)
                raise(ErrorCode::MalformedResponse,
                      "unexpected HTTP " + std::to_string(status));
            saw_transient_status = true; // 429 or 5xx: retryable
        }
        if (attempt >= config.max_retries) {
            if (saw_transient_status)
                raise(ErrorCode::RateLimited,
                      "retries exhausted after " + std::to_string(attempt + 1) + " attempts");
            raise(ErrorCode::TimeoutError, "no response from " + config.endpoint);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(config.backoff_ms << attempt));
    }
}

ExternalGenerator::ExternalGenerator(LlmClientConfig config, std::string prompt_template)
    : config_(std::move(config)), prompt_template_(std::move(prompt_template)) {
    config_.validate();
}

GenerationResult ExternalGenerator::generate(const GenerationCondition& condition) {
    condition.validate();
    GenerationResult result;
    result.text = generate_external(config_, assemble_prompt(condition, prompt_template_));

    result.record.query = condition.query;
    for (const RetrievedFragment& f : condition.fragments)
        result.record.fragment_ids.push_back(f.fragment_id);
    std::istringstream words(result.text);
    std::string word;
    while (words >> word) result.record.tokens.push_back(word);
    result.record.finished_by = FinishReason::end_token;
    return result;
}

} // namespace grag
