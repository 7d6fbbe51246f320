#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "groundchat/chunker.hpp"
#include "groundchat/config.hpp"
#include "groundchat/engine.hpp"
#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"
#include "groundchat/service.hpp"
#include "groundchat/survey.hpp"

using namespace groundchat;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string basename_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

ServiceConfig config_or_default(const std::string& path) {
    if (!path.empty()) return load_config(path);
    ServiceConfig cfg;
    cfg.backend_kind = BackendKind::mock;
    return cfg;
}

int serve(const std::string& config_path, const std::string& bind) {
    auto cfg = load_config(config_path);
    if (!bind.empty()) cfg.server = parse_bind(bind, cfg.server);
    auto backend = service::make_backend(cfg.backend_kind);
    ingest::HttpFetcher fetcher(cfg.fetch);
    SystemClock clock;
    service::Service svc(cfg, *backend, fetcher, clock);

    httplib::Server server;
    svc.mount(server);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    int port = cfg.server.port;
    if (port == 0) {
        port = server.bind_to_any_port(cfg.server.host);
    } else if (!server.bind_to_port(cfg.server.host, port)) {
        port = -1;
    }
    if (port <= 0) {
        std::cerr << "cannot bind " << cfg.server.host << ":" << cfg.server.port << "\n";
        return 1;
    }
    std::cout << "listening on " << cfg.server.host << ":" << port << " (backend "
              << (cfg.backend_kind == BackendKind::mock ? "mock" : cfg.session.model.endpoint) << ", "
              << svc.sessions().size() << " restored sessions)" << std::endl;
    server.listen_after_bind();
    return 0;
}

int ingest_one(const std::string& url, const std::string& pdf, const std::string& config_path) {
    const auto cfg = config_or_default(config_path);
    SystemClock clock;
    ingest::Extractor extractor(cfg.session.kb.extract, clock);

    ingest::SourceRef ref;
    ingest::RawDocument raw;
    if (!url.empty()) {
        ingest::parse_url_list(url);
        ref = {"cli", ingest::SourceKind::url, url, clock.now()};
        raw = ingest::fetch_url(url, cfg.fetch);
    } else {
        ref = {"cli", ingest::SourceKind::pdf, basename_of(pdf), clock.now()};
        raw = {"cli", ingest::Media::pdf, read_file(pdf)};
        if (raw.bytes.empty()) throw Error(ErrorCode::empty_upload, pdf + " is empty");
    }
    raw.source_id = ref.id;
    const auto doc = extractor.extract(ref, raw);
    const auto chunks = chunker::split(doc.normalized_text, cfg.session.kb.policy, ref.id);

    std::size_t largest = 0, hard_cuts = 0;
    for (const auto& c : chunks) {
        largest = std::max(largest, c.token_estimate);
        hard_cuts += c.hard_cut ? 1 : 0;
    }
    std::cout << "source: " << ref.locator << "\n"
              << "media: " << ingest::to_string(raw.media) << "\n"
              << "bytes: " << raw.bytes.size() << "\n"
              << "chars: " << doc.char_count << "\n"
              << "token_estimate: " << doc.token_estimate << "\n"
              << "chunk_budget_tokens: " << cfg.session.kb.policy.chunk_budget_tokens << "\n"
              << "chunks: " << chunks.size() << "\n"
              << "largest_chunk_tokens: " << largest << "\n"
              << "hard_cuts: " << hard_cuts << "\n";
    return 0;
}

int ask_once(const std::string& config_path, const std::vector<std::string>& sources, const std::string& level,
             const std::string& strategy, const std::string& question) {
    const auto cfg = config_or_default(config_path);
    auto backend = service::make_backend(cfg.backend_kind);
    ingest::HttpFetcher fetcher(cfg.fetch);
    SystemClock clock;
    auto options = cfg.session;
    options.snapshot_dir.reset();
    engine::Session session("cli", options, *backend, fetcher, clock);

    for (const auto& src : sources) {
        if (ingest::is_http_url(src)) {
            const auto report = session.add_url_sources(src);
            for (const auto& f : report.failures) {
                std::cerr << "skipped " << f.locator << ": " << code_name(f.code) << ": " << f.message << "\n";
            }
        } else {
            session.add_pdf_source(basename_of(src), read_file(src));
        }
    }
    session.set_level(levels::parse_level(level));

    engine::AskOptions ask;
    ask.strategy = engine::parse_strategy(strategy);
    const auto answer = session.ask(question, ask);
    std::cout << answer.text << "\n";
    std::cerr << "strategy=" << engine::to_string(answer.strategy_used) << " chunks=" << answer.chunks_consulted
              << " backend_calls=" << answer.backend_calls << " latency_ms=" << answer.latency_ms << "\n";
    return 0;
}

int summarize(const std::string& csv_path, const std::string& config_path, const std::string& questionnaire_id) {
    survey::Questionnaire q = survey::default_questionnaire();
    if (!config_path.empty()) {
        bool found = questionnaire_id == "default";
        for (const auto& candidate : load_config(config_path).questionnaires) {
            if (candidate.id == questionnaire_id) {
                q = candidate;
                found = true;
            }
        }
        if (!found) throw Error(ErrorCode::unknown_questionnaire, "no questionnaire " + questionnaire_id);
    } else if (questionnaire_id != "default") {
        throw Error(ErrorCode::unknown_questionnaire, "no questionnaire " + questionnaire_id);
    }
    SystemClock clock;
    survey::SurveyStore store(q, {std::numeric_limits<std::size_t>::max()}, clock);
    for (auto& s : survey::parse_responses_csv(read_file(csv_path), q)) store.submit(std::move(s));
    std::cout << survey::to_csv(store.summarize());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Source-grounded tutoring chat service"};
    app.require_subcommand(1);

    std::string config_path, bind;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    serve_cmd->add_option("--bind", bind, "host:port, overrides server.bind");

    std::string url, pdf, ingest_config;
    auto* ingest_cmd = app.add_subcommand("ingest", "Extract and chunk one source, print statistics");
    auto* url_opt = ingest_cmd->add_option("--url", url, "http(s) URL");
    auto* pdf_opt = ingest_cmd->add_option("--pdf", pdf, "PDF file")->check(CLI::ExistingFile);
    url_opt->excludes(pdf_opt);
    ingest_cmd->add_option("--config", ingest_config, "JSON config file (chunker and ingest sections)");

    std::string ask_config, level = "beginner", strategy = "auto", question;
    std::vector<std::string> sources;
    auto* ask_cmd = app.add_subcommand("ask", "Answer one question from the given sources");
    ask_cmd->add_option("--config", ask_config, "JSON config file; without it the mock backend answers");
    ask_cmd->add_option("--source", sources, "URL or PDF file, repeatable")->required();
    ask_cmd->add_option("--level", level, "beginner, intermediate or advanced");
    ask_cmd->add_option("--strategy", strategy, "auto, stuff or refine");
    ask_cmd->add_option("--question", question, "the question")->required();

    std::string csv_path, survey_config, questionnaire_id = "default";
    auto* survey_cmd = app.add_subcommand("survey", "Questionnaire tools");
    survey_cmd->require_subcommand(1);
    auto* summarize_cmd = survey_cmd->add_subcommand("summarize", "Per-item n, mean and std of a response table");
    summarize_cmd->add_option("csv", csv_path, "wide CSV, one column per item id")->required()->check(CLI::ExistingFile);
    summarize_cmd->add_option("--config", survey_config, "config with extra questionnaires");
    summarize_cmd->add_option("--questionnaire", questionnaire_id, "questionnaire id");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd) return serve(config_path, bind);
        if (*ingest_cmd) {
            if (url.empty() && pdf.empty()) {
                std::cerr << "ingest needs --url or --pdf\n";
                return 2;
            }
            return ingest_one(url, pdf, ingest_config);
        }
        if (*ask_cmd) return ask_once(ask_config, sources, level, strategy, question);
        if (*summarize_cmd) return summarize(csv_path, survey_config, questionnaire_id);
    } catch (const Error& e) {
        std::cerr << "error: " << code_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
