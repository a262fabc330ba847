// SPDX-License-Identifier: Apache-2.0
#include "grag/service.hpp"

#include <cinttypes>
#include <cstdio>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "grag/pipeline.hpp"

namespace grag {

namespace {

struct QueryRequest {
    std::string query;
    std::size_t k = 0;
};

QueryRequest parse_query_request(const std::string& body, std::size_t default_k) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, std::string("malformed JSON body: ") + e.what());
    }
    if (!j.is_object() || !j.contains("query") || !j.at("query").is_string())
        raise(ErrorCode::ParseError, "body must be an object with a string \"query\"");

    QueryRequest req;
    req.query = j.at("query").get<std::string>();
    if (req.query.empty()) raise(ErrorCode::ParseError, "\"query\" is empty");
    if (j.contains("k")) {
        if (!j.at("k").is_number_integer() || j.at("k").get<std::int64_t>() < 1)
            raise(ErrorCode::ParseError, "\"k\" must be a positive integer");
        req.k = j.at("k").get<std::size_t>();
    } else {
        req.k = default_k;
    }
    return req;
}

std::uint64_t fresh_incident_id() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Maps component errors onto HTTP statuses: caller mistakes become 400, an
// unusable backend 503, everything else an opaque 500.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::ConfigError:
        case ErrorCode::EmptyText:
        case ErrorCode::BadTemplate:
            send_json(res, 400, {{"error", to_string(e.code())}, {"message", e.what()}});
            return;
        case ErrorCode::EmptyIndex:
            send_json(res, 503, {{"error", to_string(e.code())}, {"message", e.what()}});
            return;
        default:
            break;
        }
        const std::uint64_t id = fresh_incident_id();
        std::fprintf(stderr, "[service] incident %016" PRIx64 ": %s\n", id, e.what());
        send_json(res, 500, {{"error", "internal"}, {"incident_id", id}});
    } catch (const std::exception& e) {
        const std::uint64_t id = fresh_incident_id();
        std::fprintf(stderr, "[service] incident %016" PRIx64 ": %s\n", id, e.what());
        send_json(res, 500, {{"error", "internal"}, {"incident_id", id}});
    }
}

} // namespace

struct RagService::Impl {
    FragmentIndex index;
    std::shared_ptr<Generator> generator;
    ServiceConfig config;
    httplib::Server server;
    std::thread thread;

    Impl(FragmentIndex idx, std::shared_ptr<Generator> gen, ServiceConfig cfg)
        : index(std::move(idx)), generator(std::move(gen)), config(cfg) {}
};

RagService::RagService(FragmentIndex index, std::shared_ptr<Generator> generator,
                       ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(index), std::move(generator), config)) {
    Impl* impl = impl_.get();

    impl->server.Get("/healthz", [impl](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200,
                  {{"status", "ok"},
                   {"index_size", impl->index.size()},
                   {"embedding_dim", impl->index.embedding_dim()}});
    });

    impl->server.Post("/query", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const QueryRequest q = parse_query_request(req.body, impl->config.default_k);
            send_json(res, 200, hits_to_json(query_text(impl->index, q.query, q.k)));
        });
    });

    impl->server.Post("/generate", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!impl->generator) {
                send_json(res, 503, {{"error", "GeneratorUnavailable"},
                                     {"message", "service started without a generator"}});
                return;
            }
            const QueryRequest q = parse_query_request(req.body, impl->config.default_k);

            GenerationCondition condition;
            condition.query = q.query;
            condition.fragments =
                collect_fragments(impl->index, query_text(impl->index, q.query, q.k));
            condition.max_tokens = impl->config.max_tokens;
            condition.end_token = impl->config.end_token;

            const GenerationResult result = impl->generator->generate(condition);

            nlohmann::json fragment_ids = nlohmann::json::array();
            nlohmann::json scores = nlohmann::json::array();
            for (const RetrievedFragment& f : condition.fragments) {
                fragment_ids.push_back(f.fragment_id);
                scores.push_back(f.score);
            }
            send_json(res, 200, {{"answer", result.text},
                                 {"fragment_ids", std::move(fragment_ids)},
                                 {"scores", std::move(scores)}});
        });
    });
}

RagService::~RagService() {
    if (impl_) stop();
}

RagService::RagService(RagService&&) noexcept = default;
RagService& RagService::operator=(RagService&&) noexcept = default;

bool RagService::bind(const std::string& host, int port) {
    return impl_->server.bind_to_port(host, port);
}

int RagService::bind_any(const std::string& host) {
    return impl_->server.bind_to_any_port(host);
}

bool RagService::serve() { return impl_->server.listen_after_bind(); }

void RagService::start() {
    impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void RagService::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

const FragmentIndex& RagService::index() const { return impl_->index; }

} // namespace grag
