// SPDX-License-Identifier: Apache-2.0
//
// grag: command-line front end over the retrieval pipeline.
//
//   grag ingest   --corpus corpus.jsonl --index out.idx [--seed N] ...
//   grag query    --index out.idx "free text" [--k N] [--json]
//   grag generate --index out.idx "free text" [--generator toy|external] [--trace]
//   grag bench    --corpus corpus.jsonl [--index out.idx] --out dir [--k-list 1,3,5,10]
//   grag serve    --index out.idx --bind 127.0.0.1:8080
//
// Option precedence: command-line flags beat the --config JSON file, which
// beats built-in defaults. Errors exit nonzero with an "error[Class]:"
// prefix on stderr.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "grag/bench.hpp"
#include "grag/corpus.hpp"
#include "grag/error.hpp"
#include "grag/generation.hpp"
#include "grag/gnn.hpp"
#include "grag/index.hpp"
#include "grag/llm_client.hpp"
#include "grag/metrics.hpp"
#include "grag/pipeline.hpp"
#include "grag/service.hpp"

namespace {

struct RunConfig {
    std::string corpus;
    std::string index;
    std::string params_file; // pre-trained parameter file; skips init_params
    std::string config_file;
    std::string generator = "toy";
    std::string out = "bench_out";
    std::string bind = "127.0.0.1:8080";
    std::string query_text;
    std::size_t k = 5;
    std::uint64_t seed = 42;
    std::size_t max_tokens = 16;
    std::vector<std::size_t> k_list = {1, 3, 5, 10};
    std::size_t num_layers = 2;
    std::size_t hidden_dim = 32;
    std::string aggregator = "mean";
    std::string activation = "relu";
    bool include_self = true;
    std::size_t window = 2;
    std::size_t feature_dim = 64;
    bool json = false;
    bool trace = false;
    bool verbose = false;
};

nlohmann::json config_to_json(const RunConfig& c) {
    return {{"corpus", c.corpus},
            {"index", c.index},
            {"params_file", c.params_file},
            {"generator", c.generator},
            {"out", c.out},
            {"bind", c.bind},
            {"k", c.k},
            {"seed", c.seed},
            {"max_tokens", c.max_tokens},
            {"k_list", c.k_list},
            {"gnn",
             {{"num_layers", c.num_layers},
              {"hidden_dim", c.hidden_dim},
              {"aggregator", c.aggregator},
              {"activation", c.activation},
              {"include_self", c.include_self}}},
            {"builder", {{"window", c.window}, {"feature_dim", c.feature_dim}}}};
}

// Applies config-file values to every field whose flag the user did not
// pass, enforcing flags > config file > defaults.
void apply_config_file(RunConfig& c, const CLI::App& cmd) {
    std::ifstream in(c.config_file);
    if (!in) grag::raise(grag::ErrorCode::IoError, "cannot read config file " + c.config_file);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        grag::raise(grag::ErrorCode::ParseError,
                    "config file " + c.config_file + ": " + e.what());
    }
    if (!j.is_object())
        grag::raise(grag::ErrorCode::ConfigError, "config file must hold a JSON object");

    auto unset = [&cmd](const std::string& flag) {
        return cmd.get_option_no_throw(flag) == nullptr || cmd.count(flag) == 0;
    };
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "corpus" && unset("--corpus")) c.corpus = value.get<std::string>();
            else if (key == "index" && unset("--index")) c.index = value.get<std::string>();
            else if (key == "params_file" && unset("--params")) c.params_file = value.get<std::string>();
            else if (key == "generator" && unset("--generator")) c.generator = value.get<std::string>();
            else if (key == "out" && unset("--out")) c.out = value.get<std::string>();
            else if (key == "bind" && unset("--bind")) c.bind = value.get<std::string>();
            else if (key == "k" && unset("--k")) c.k = value.get<std::size_t>();
            else if (key == "seed" && unset("--seed")) c.seed = value.get<std::uint64_t>();
            else if (key == "max_tokens" && unset("--max-tokens")) c.max_tokens = value.get<std::size_t>();
            else if (key == "k_list" && unset("--k-list")) c.k_list = value.get<std::vector<std::size_t>>();
            else if (key == "json" && unset("--json")) c.json = value.get<bool>();
            else if (key == "trace" && unset("--trace")) c.trace = value.get<bool>();
            else if (key == "gnn") {
                if (value.contains("num_layers") && unset("--layers")) c.num_layers = value.at("num_layers").get<std::size_t>();
                if (value.contains("hidden_dim") && unset("--hidden-dim")) c.hidden_dim = value.at("hidden_dim").get<std::size_t>();
                if (value.contains("aggregator") && unset("--aggregator")) c.aggregator = value.at("aggregator").get<std::string>();
                if (value.contains("activation") && unset("--activation")) c.activation = value.at("activation").get<std::string>();
                if (value.contains("include_self")) c.include_self = value.at("include_self").get<bool>();
            } else if (key == "builder") {
                if (value.contains("window") && unset("--window")) c.window = value.at("window").get<std::size_t>();
                if (value.contains("feature_dim") && unset("--feature-dim")) c.feature_dim = value.at("feature_dim").get<std::size_t>();
                if (value.contains("lowercase")) {} // reserved; normalizer is fixed for now
            } else if (key == "corpus" || key == "index" || key == "params_file" ||
                       key == "generator" || key == "out" || key == "bind" || key == "k" ||
                       key == "seed" || key == "max_tokens" || key == "k_list" ||
                       key == "json" || key == "trace") {
                // flag took precedence
            } else {
                grag::raise(grag::ErrorCode::ConfigError, "unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        grag::raise(grag::ErrorCode::ConfigError,
                    "config file " + c.config_file + ": " + e.what());
    }
}

grag::GnnConfig gnn_config_of(const RunConfig& c) {
    grag::GnnConfig gnn;
    gnn.num_layers = c.num_layers;
    gnn.input_dim = c.feature_dim;
    gnn.hidden_dim = c.hidden_dim;
    gnn.aggregator = grag::aggregator_from_string(c.aggregator);
    gnn.activation = grag::activation_from_string(c.activation);
    gnn.include_self = c.include_self;
    gnn.validate();
    return gnn;
}

grag::GraphBuilderConfig builder_of(const RunConfig& c) {
    grag::GraphBuilderConfig builder;
    builder.window = c.window;
    builder.feature_dim = c.feature_dim;
    builder.validate();
    return builder;
}

std::string require(const std::string& value, const std::string& what) {
    if (value.empty())
        grag::raise(grag::ErrorCode::ConfigError, "missing required option " + what);
    return value;
}

grag::FragmentIndex load_index(const RunConfig& c) {
    return grag::FragmentIndex::load(require(c.index, "--index"));
}

// The toy generator's vocabulary is every token of every indexed payload,
// so a given (index, seed) pair always yields the same decoder.
std::unique_ptr<grag::Generator> make_generator(const RunConfig& c,
                                                const grag::FragmentIndex& index) {
    if (c.generator == "toy") {
        std::vector<std::string> payloads;
        payloads.reserve(index.entries().size());
        for (const grag::IndexEntry& entry : index.entries()) payloads.push_back(entry.payload);
        const std::size_t hidden = index.embedding_dim() > 0 ? index.embedding_dim() : 16;
        return std::make_unique<grag::ToyGenerator>(
            grag::make_toy_params(grag::vocab_from_texts(payloads), hidden, c.seed));
    }
    if (c.generator == "external")
        return std::make_unique<grag::ExternalGenerator>(grag::LlmClientConfig::from_env());
    grag::raise(grag::ErrorCode::ConfigError,
                "unknown generator '" + c.generator + "' (expected toy or external)");
}

void echo_config(const RunConfig& c) {
    if (c.verbose) std::cerr << "config: " << config_to_json(c).dump() << "\n";
}

int cmd_ingest(const RunConfig& c) {
    echo_config(c);
    const auto records = grag::load_corpus(require(c.corpus, "--corpus"));

    grag::GnnConfig gnn;
    grag::GnnParams params;
    if (!c.params_file.empty()) {
        std::tie(gnn, params) = grag::load_params(c.params_file);
    } else {
        gnn = gnn_config_of(c);
        params = grag::init_params(gnn, c.seed);
    }

    grag::FragmentIndex index = grag::build_index(records, gnn, params, builder_of(c));
    index.save(require(c.index, "--index"));
    std::printf("ingested %zu fragments from %zu records, embedding width %zu\n",
                index.size(), records.size(), index.embedding_dim());
    std::printf("index written to %s\n", c.index.c_str());
    return 0;
}

int cmd_query(const RunConfig& c) {
    echo_config(c);
    const grag::FragmentIndex index = load_index(c);
    const grag::RankedHits hits = grag::query_text(index, c.query_text, c.k);
    if (c.json) {
        std::printf("%s\n", grag::hits_to_json(hits).dump().c_str());
    } else {
        for (std::size_t i = 0; i < hits.hits.size(); ++i)
            std::printf("%4zu  %9.6f  %s\n", i + 1, hits.hits[i].score,
                        hits.hits[i].fragment_id.c_str());
    }
    return 0;
}

int cmd_generate(const RunConfig& c) {
    echo_config(c);
    const grag::FragmentIndex index = load_index(c);
    const std::unique_ptr<grag::Generator> generator = make_generator(c, index);

    grag::GenerationCondition condition;
    condition.query = c.query_text;
    condition.fragments =
        grag::collect_fragments(index, grag::query_text(index, c.query_text, c.k));
    condition.max_tokens = c.max_tokens;

    if (c.trace)
        for (std::size_t i = 0; i < condition.fragments.size(); ++i)
            std::printf("trace: rank=%zu id=%s score=%.6f\n", i + 1,
                        condition.fragments[i].fragment_id.c_str(),
                        condition.fragments[i].score);

    const grag::GenerationResult result = generator->generate(condition);
    std::printf("%s\n", result.text.c_str());
    std::printf("%s\n", grag::record_to_json(result.record).dump().c_str());
    return 0;
}

int cmd_bench(const RunConfig& c) {
    echo_config(c);
    const auto records = grag::load_corpus(require(c.corpus, "--corpus"));

    grag::FragmentIndex index = [&] {
        if (!c.index.empty() && std::filesystem::exists(c.index))
            return grag::FragmentIndex::load(c.index);
        const grag::GnnConfig gnn = gnn_config_of(c);
        grag::FragmentIndex built =
            grag::build_index(records, gnn, grag::init_params(gnn, c.seed), builder_of(c));
        if (!c.index.empty()) built.save(c.index);
        return built;
    }();

    const std::unique_ptr<grag::Generator> generator = make_generator(c, index);

    grag::BenchOptions options;
    options.k_list = c.k_list;
    options.max_tokens = c.max_tokens;
    const std::vector<grag::AblationRow> rows =
        grag::run_doc_count_ablation(records, index, *generator, options);

    grag::write_ablation_reports(c.out, rows);
    std::printf("%s", grag::format_ablation_table(rows).c_str());
    std::printf("reports written to %s\n", c.out.c_str());
    return 0;
}

int cmd_serve(const RunConfig& c) {
    echo_config(c);
    grag::FragmentIndex index = load_index(c);
    std::shared_ptr<grag::Generator> generator = make_generator(c, index);

    const std::size_t colon = c.bind.rfind(':');
    if (colon == std::string::npos)
        grag::raise(grag::ErrorCode::ConfigError, "--bind expects host:port, got " + c.bind);
    const std::string host = c.bind.substr(0, colon);
    const int port = std::stoi(c.bind.substr(colon + 1));

    grag::ServiceConfig service_config;
    service_config.default_k = c.k;
    service_config.max_tokens = c.max_tokens;
    grag::RagService service(std::move(index), std::move(generator), service_config);
    if (!service.bind(host, port))
        grag::raise(grag::ErrorCode::IoError, "cannot bind " + c.bind);
    std::printf("listening on http://%s:%d\n", host.c_str(), port);
    std::fflush(stdout);
    service.serve();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graph-based retrieval-augmented generation engine"};
    app.require_subcommand(1);

    const CLI::Validator positive_int(
        [](std::string& s) {
            try {
                if (std::stoll(s) >= 1) return std::string();
            } catch (...) {
            }
            return "expected a positive integer, got '" + s + "'";
        },
        "POSITIVE");

    RunConfig c;

    auto add_common = [&c](CLI::App* cmd) {
        cmd->add_option("--config", c.config_file, "JSON config file (flags win)");
        cmd->add_option("--seed", c.seed, "PRNG seed");
        cmd->add_flag("--verbose", c.verbose, "echo the effective config to stderr");
    };
    auto add_gnn = [&](CLI::App* cmd) {
        cmd->add_option("--layers", c.num_layers, "message-passing layers")->check(positive_int);
        cmd->add_option("--hidden-dim", c.hidden_dim, "embedding width")->check(positive_int);
        cmd->add_option("--aggregator", c.aggregator, "mean|sum|max");
        cmd->add_option("--activation", c.activation, "relu|tanh");
        cmd->add_option("--window", c.window, "co-occurrence window")->check(positive_int);
        cmd->add_option("--feature-dim", c.feature_dim, "hashed feature width")->check(positive_int);
        cmd->add_option("--params", c.params_file, "encoder parameter file (skips random init)");
    };
    auto add_generator = [&](CLI::App* cmd) {
        cmd->add_option("--generator", c.generator, "toy|external");
        cmd->add_option("--max-tokens", c.max_tokens, "generation length cap")->check(positive_int);
    };

    CLI::App* ingest = app.add_subcommand("ingest", "encode a corpus into an index file");
    ingest->add_option("--corpus", c.corpus, "corpus JSONL path");
    ingest->add_option("--index", c.index, "output index path");
    add_gnn(ingest);
    add_common(ingest);

    CLI::App* query = app.add_subcommand("query", "rank fragments for a query");
    query->add_option("query_text", c.query_text, "query text")->required();
    query->add_option("--index", c.index, "index path");
    query->add_option("--k", c.k, "results to return")->check(positive_int);
    query->add_flag("--json", c.json, "print machine-readable JSON");
    add_common(query);

    CLI::App* generate = app.add_subcommand("generate", "answer a query with retrieval");
    generate->add_option("query_text", c.query_text, "query text")->required();
    generate->add_option("--index", c.index, "index path");
    generate->add_option("--k", c.k, "fragments to retrieve")->check(positive_int);
    generate->add_flag("--trace", c.trace, "print retrieved ids and scores first");
    add_generator(generate);
    add_common(generate);

    CLI::App* bench = app.add_subcommand("bench", "document-count ablation");
    bench->add_option("--corpus", c.corpus, "corpus JSONL path");
    bench->add_option("--index", c.index, "index path (loaded if present, else built)");
    bench->add_option("--out", c.out, "report directory");
    bench->add_option("--k-list", c.k_list, "document counts to sweep")->delimiter(',');
    add_gnn(bench);
    add_generator(bench);
    add_common(bench);

    CLI::App* serve = app.add_subcommand("serve", "HTTP service over an index");
    serve->add_option("--index", c.index, "index path");
    serve->add_option("--bind", c.bind, "host:port");
    serve->add_option("--k", c.k, "default k for requests")->check(positive_int);
    add_generator(serve);
    add_common(serve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error[Usage]: " << e.what() << "\n";
        return 2;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        if (!c.config_file.empty()) apply_config_file(c, *cmd);

        if (cmd == ingest) return cmd_ingest(c);
        if (cmd == query) return cmd_query(c);
        if (cmd == generate) return cmd_generate(c);
        if (cmd == bench) return cmd_bench(c);
        if (cmd == serve) return cmd_serve(c);
        return 2;
    } catch (const grag::Error& e) {
        std::cerr << "error[" << grag::to_string(e.code()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[Internal]: " << e.what() << "\n";
        return 1;
    }
}
