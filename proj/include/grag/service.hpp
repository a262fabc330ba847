// SPDX-License-Identifier: Apache-2.0
//
// Minimal read-only HTTP front end over a loaded index.
//
//   POST /query    {"query": str, "k": int}  -> RankedHits JSON
//   POST /generate {"query": str, "k": int}  -> {answer, fragment_ids, scores}
//   GET  /healthz                            -> {status, index_size, embedding_dim}
//
// Malformed bodies get 400, an unusable index or generator gets 503, and
// internal faults get 500 with an opaque incident id (details go to the log,
// not the response). The index is never mutated while serving.
#pragma once

#include <memory>
#include <string>

#include "grag/generation.hpp"
#include "grag/index.hpp"

namespace grag {

struct ServiceConfig {
    std::size_t default_k = 5; // used when a request omits "k"
    std::size_t max_tokens = 16;
    std::string end_token = "</s>";
};

class RagService {
  public:
    RagService(FragmentIndex index, std::shared_ptr<Generator> generator,
               ServiceConfig config = {});
    ~RagService();

    RagService(RagService&&) noexcept;
    RagService& operator=(RagService&&) noexcept;

    // Binds host:port; false when the port is taken.
    bool bind(const std::string& host, int port);
    // Binds an OS-chosen free port; returns it (-1 on failure).
    int bind_any(const std::string& host);

    // Serves until stop(); call after a successful bind.
    bool serve();
    // serve() on a background thread, for tests and embedding.
    void start();
    void stop();

    const FragmentIndex& index() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace grag
