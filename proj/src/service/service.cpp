#include "groundchat/service.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "groundchat/error.hpp"

namespace groundchat::service {

namespace {

using ojson = nlohmann::ordered_json;
using Req = httplib::Request;
using Res = httplib::Response;

constexpr const char* kJson = "application/json";
constexpr const char* kSession = R"(/v1/sessions/([^/]+))";

void send(Res& res, const ojson& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void send_error(Res& res, ErrorCode code, const std::string& message) {
    res.status = http_status(code);
    res.set_content(error_body(code, message), kJson);
}

// Message shown to clients; backend failures mention refine progress.
std::string client_message(const Error& e) {
    std::string msg = e.what();
    if (e.status() && (e.code() == ErrorCode::backend_status || e.code() == ErrorCode::fetch_status)) {
        if (msg.find(std::to_string(*e.status())) == std::string::npos) msg += " (HTTP " + std::to_string(*e.status()) + ")";
    }
    if (e.completed_chunks() && *e.completed_chunks() > 0) {
        msg += " after " + std::to_string(*e.completed_chunks()) + " completed step(s)";
    }
    return msg;
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn = std::move(fn)](const Req& req, Res& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_error(res, e.code(), client_message(e));
        } catch (const nlohmann::json::exception&) {
            send_error(res, ErrorCode::bad_request, "request body has the wrong shape");
        } catch (const std::exception&) {
            send_error(res, ErrorCode::internal, "internal error");
        }
    };
}

ojson parse_body(const Req& req) {
    if (req.body.empty()) return ojson::object();
    auto j = ojson::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::bad_request, "request body must be a JSON object");
    return j;
}

std::string need_string(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must be a string");
    }
    return it->get<std::string>();
}

std::optional<std::string> opt_string(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

Timestamp need_time(const ojson& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer()) {
        throw Error(ErrorCode::bad_request, std::string("field '") + key + "' must be a Unix time in seconds");
    }
    return it->get<Timestamp>();
}

ojson source_json(const ingest::SourceRef& s) {
    return {{"id", s.id}, {"kind", std::string(ingest::to_string(s.kind))}, {"locator", s.locator}, {"added_at", s.added_at}};
}

ojson answer_json(const engine::Answer& a, levels::ProficiencyLevel level) {
    ojson j;
    j["answer"] = a.text;
    j["strategy_used"] = std::string(engine::to_string(a.strategy_used));
    j["chunks_consulted"] = a.chunks_consulted;
    j["backend_calls"] = a.backend_calls;
    j["sources_used"] = a.sources_used;
    j["latency_ms"] = a.latency_ms;
    j["level"] = std::string(levels::to_string(level));
    return j;
}

ojson profile_json(const levels::LevelProfile& p) {
    return {{"level", std::string(levels::to_string(p.level))},
            {"system_message", p.system_message},
            {"max_answer_tokens", p.max_answer_tokens}};
}

ojson questionnaire_json(const survey::Questionnaire& q) {
    ojson items = ojson::array();
    for (const auto& i : q.items) {
        items.push_back({{"item_id", i.item_id}, {"prompt", i.prompt}, {"kind", std::string(survey::to_string(i.kind))}});
    }
    return {{"id", q.id}, {"items", items}};
}

ojson summary_json(const survey::SurveySummary& s) {
    ojson items = ojson::array();
    for (const auto& row : s.items) {
        ojson r;
        r["item_id"] = row.item.item_id;
        r["prompt"] = row.item.prompt;
        r["kind"] = std::string(survey::to_string(row.item.kind));
        if (row.item.kind == survey::ItemKind::likert5) {
            r["n"] = row.stats.n;
            r["mean"] = row.stats.mean ? ojson(*row.stats.mean) : ojson(nullptr);
            r["std"] = row.stats.std_dev ? ojson(*row.stats.std_dev) : ojson(nullptr);
            r["mean_display"] = row.stats.mean_display ? ojson(*row.stats.mean_display) : ojson(nullptr);
            r["std_display"] = row.stats.std_display ? ojson(*row.stats.std_display) : ojson(nullptr);
        } else {
            r["n"] = row.answers.size();
            r["answers"] = row.answers;
        }
        items.push_back(std::move(r));
    }
    return {{"questionnaire_id", s.questionnaire_id}, {"submissions", s.submissions}, {"items", items}};
}

void require_owner(const access::Grant& g) {
    if (g.role != access::Role::owner) {
        throw Error(ErrorCode::forbidden, "this action is reserved for the session owner");
    }
}

std::string sse_event(const std::string& event, const ojson& data) {
    return "event: " + event + "\ndata: " + data.dump() + "\n\n";
}

}  // namespace

std::string error_body(ErrorCode code, const std::string& message) {
    ojson j;
    j["error"]["code"] = std::string(code_name(code));
    j["error"]["message"] = message;
    return j.dump();
}

std::unique_ptr<backend::Backend> make_backend(BackendKind kind) {
    if (kind == BackendKind::mock) return std::make_unique<backend::MockBackend>();
    return std::make_unique<backend::HttpChatBackend>();
}

Service::Service(ServiceConfig config, backend::Backend& backend, ingest::Fetcher& fetcher, const Clock& clock)
    : config_(std::move(config)),
      backend_(&backend),
      clock_(&clock),
      sessions_((config_.validate(), config_.session), backend, fetcher, clock),
      shares_(clock),
      surveys_(config_.survey, clock) {
    for (const auto& q : config_.questionnaires) surveys_.add(q);
    sessions_.restore_all();
}

access::Grant Service::resolve(const std::string& id, const std::string& passphrase) const {
    if (sessions_.contains(id)) return {id, access::Role::owner, ""};
    if (shares_.is_token(id)) return shares_.authorize(id, passphrase);
    throw Error(ErrorCode::unknown_session, "unknown session or share link");
}

void Service::mount(httplib::Server& server) {
    server.set_payload_max_length(config_.server.max_upload_mib * 1024 * 1024);
    server.set_error_handler([](const Req&, Res& res) {
        if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
        switch (res.status) {
            case 404: send_error(res, ErrorCode::not_found, "no such endpoint"); break;
            case 413: send_error(res, ErrorCode::upload_too_large, "request body exceeds the upload limit"); break;
            case 400: send_error(res, ErrorCode::bad_request, "malformed request"); break;
            default:
                if (res.status >= 500) {
                    send_error(res, ErrorCode::internal, "internal error");
                } else {
                    const int status = res.status;
                    send_error(res, ErrorCode::bad_request, "request rejected");
                    res.status = status;
                }
        }
        return httplib::Server::HandlerResponse::Handled;
    });

    auto grant_of = [this](const Req& req) { return resolve(req.matches[1], req.get_header_value("X-Passphrase")); };
    auto path = [](const char* tail) { return std::string(kSession) + tail; };

    server.Post("/v1/sessions", guarded([this](const Req&, Res& res) {
        auto s = sessions_.create();
        send(res, {{"session_id", s->id()}, {"level", std::string(levels::to_string(s->level()))}}, 201);
    }));

    server.Get(path(""), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        auto s = sessions_.get(g.session_id);
        ojson j;
        if (g.role == access::Role::owner) j["session_id"] = s->id();
        j["role"] = std::string(access::to_string(g.role));
        j["level"] = std::string(levels::to_string(s->level()));
        j["has_sources"] = s->knowledge_base().has_sources();
        j["sources"] = ojson::array();
        for (const auto& src : s->knowledge_base().sources()) j["sources"].push_back(source_json(src));
        j["created_at"] = s->created_at();
        send(res, j);
    }));

    server.Put(path("/level"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        const auto body = parse_body(req);
        const auto level = levels::parse_level(need_string(body, "level"));
        sessions_.get(g.session_id)->set_level(level);
        send(res, {{"level", std::string(levels::to_string(level))}});
    }));

    server.Get(path("/profiles"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        auto s = sessions_.get(g.session_id);
        ojson j = ojson::object();
        for (auto level : levels::kAllLevels) j[std::string(levels::to_string(level))] = profile_json(s->profile(level));
        send(res, j);
    }));

    server.Put(path("/profiles/([^/]+)"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        require_owner(g);
        const auto level = levels::parse_level(req.matches[2].str());
        const auto body = parse_body(req);
        auto s = sessions_.get(g.session_id);
        auto profile = s->profile(level);
        profile.system_message = need_string(body, "system_message");
        if (auto it = body.find("max_answer_tokens"); it != body.end()) {
            if (!it->is_number_unsigned()) throw Error(ErrorCode::bad_request, "max_answer_tokens must be a positive integer");
            profile.max_answer_tokens = it->get<std::size_t>();
        }
        s->set_profile(level, profile);
        send(res, profile_json(s->profile(level)));
    }));

    server.Post(path("/sources/urls"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        require_owner(g);
        const auto body = parse_body(req);
        const auto report = sessions_.get(g.session_id)->add_url_sources(need_string(body, "urls"));
        ojson j;
        j["added"] = ojson::array();
        for (const auto& s : report.added) j["added"].push_back(source_json(s));
        j["failed"] = ojson::object();
        for (const auto& f : report.failures) {
            ojson e{{"code", std::string(code_name(f.code))}, {"message", f.message}};
            if (f.status) e["status"] = *f.status;
            j["failed"][f.locator] = e;
        }
        send(res, j);
    }));

    server.Post(path("/sources/pdf"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        require_owner(g);
        std::string filename;
        std::string bytes;
        if (req.is_multipart_form_data()) {
            if (!req.has_file("file")) throw Error(ErrorCode::bad_request, "multipart field 'file' is missing");
            const auto file = req.get_file_value("file");
            filename = file.filename.empty() ? "upload.pdf" : file.filename;
            bytes = file.content;
        } else {
            filename = req.has_param("filename") ? req.get_param_value("filename") : "upload.pdf";
            bytes = req.body;
        }
        const auto ref = sessions_.get(g.session_id)->add_pdf_source(filename, bytes);
        send(res, {{"added", source_json(ref)}});
    }));

    server.Get(path("/extracted"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        auto s = sessions_.get(g.session_id);
        std::optional<std::string> id;
        if (req.has_param("source_id")) id = req.get_param_value("source_id");
        ojson j;
        j["sources"] = ojson::array();
        for (const auto& v : s->knowledge_base().get_extracted_text(id)) {
            j["sources"].push_back({{"source", source_json(v.source)}, {"text", v.text}});
        }
        j["extraction_count"] = s->knowledge_base().extraction_count();
        send(res, j);
    }));

    server.Delete(path("/extracted/([^/]+)"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        require_owner(g);
        auto s = sessions_.get(g.session_id);
        const auto summary = s->delete_extracted(req.matches[2].str());
        send(res, {{"deleted", req.matches[2].str()},
                   {"source_count", summary.source_count},
                   {"chunk_count", summary.chunk_count},
                   {"has_sources", summary.source_count > 0}});
    }));

    server.Post(path("/ask"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        auto s = sessions_.get(g.session_id);
        const auto body = parse_body(req);
        const auto question = need_string(body, "question");
        engine::AskOptions opts;
        if (auto v = opt_string(body, "strategy")) opts.strategy = engine::parse_strategy(*v);
        if (auto v = opt_string(body, "level")) opts.level = levels::parse_level(*v);
        bool stream = false;
        if (auto it = body.find("stream"); it != body.end() && !it->is_null()) {
            if (!it->is_boolean()) throw Error(ErrorCode::bad_request, "field 'stream' must be true or false");
            stream = it->get<bool>();
        }
        const auto level = opts.level.value_or(s->level());

        if (!stream) {
            const auto answer = s->ask(question, opts);
            send(res, answer_json(answer, level));
            return;
        }

        // Checks that decide the HTTP status happen before the stream opens.
        if (!s->knowledge_base().has_sources()) {
            throw Error(ErrorCode::no_sources, "add at least one source before asking a question");
        }
        if (s->asking()) throw Error(ErrorCode::busy, "another question is still being answered in this session");
        engine::validate_question(question);

        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [s, question, opts, level](std::size_t, httplib::DataSink& sink) mutable {
                auto write = [&](const std::string& text) { sink.write(text.data(), text.size()); };
                opts.stream = true;
                opts.on_progress = [&](std::size_t done, std::size_t total) {
                    write(sse_event("progress", {{"done", done}, {"total", total}}));
                };
                opts.on_delta = [&](std::string_view d) { write(sse_event("delta", {{"text", std::string(d)}})); };
                try {
                    const auto answer = s->ask(question, opts);
                    write(sse_event("answer", answer_json(answer, level)));
                } catch (const Error& e) {
                    write(sse_event("error", ojson::parse(error_body(e.code(), client_message(e)))));
                } catch (const std::exception&) {
                    write(sse_event("error", ojson::parse(error_body(ErrorCode::internal, "internal error"))));
                }
                sink.done();
                return true;
            });
    }));

    server.Get(path("/history"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        ojson turns = ojson::array();
        for (const auto& t : sessions_.get(g.session_id)->history()) {
            turns.push_back({{"question", t.question},
                             {"answer", answer_json(t.answer, t.level)},
                             {"level", std::string(levels::to_string(t.level))},
                             {"asked_at", t.asked_at}});
        }
        send(res, {{"turns", turns}});
    }));

    server.Post(path("/share"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        require_owner(g);
        const auto body = parse_body(req);
        const auto info = shares_.share(g.session_id, need_string(body, "passphrase"), need_time(body, "not_before"),
                                        need_time(body, "not_after"));
        send(res, {{"token", info.token}, {"not_before", info.not_before}, {"not_after", info.not_after}}, 201);
    }));

    server.Post(path("/feedback"), guarded([this, grant_of](const Req& req, Res& res) {
        const auto g = grant_of(req);
        const auto body = parse_body(req);
        auto& store = surveys_.get(opt_string(body, "questionnaire_id").value_or("default"));
        survey::Submission sub;
        const auto who = opt_string(body, "respondent");
        sub.respondent = g.session_id + "|" + (who ? "r:" + *who : g.token.empty() ? "owner" : g.token);
        if (auto it = body.find("responses"); it != body.end()) {
            if (!it->is_array()) throw Error(ErrorCode::bad_request, "field 'responses' must be a list");
            for (const auto& r : *it) {
                if (!r.is_object() || !r.contains("value") || !r["value"].is_number_integer()) {
                    throw Error(ErrorCode::bad_request, "each response needs an item_id and an integer value");
                }
                sub.likert.push_back({need_string(r, "item_id"), r["value"].get<int>()});
            }
        }
        if (auto it = body.find("open"); it != body.end()) {
            if (!it->is_array()) throw Error(ErrorCode::bad_request, "field 'open' must be a list");
            for (const auto& a : *it) {
                if (!a.is_object()) throw Error(ErrorCode::bad_request, "each open answer needs an item_id and text");
                sub.open.push_back({need_string(a, "item_id"), need_string(a, "text")});
            }
        }
        store.submit(std::move(sub));
        send(res, {{"accepted", true}, {"questionnaire_id", store.questionnaire().id}}, 201);
    }));

    server.Get(R"(/v1/surveys/([^/]+))", guarded([this](const Req& req, Res& res) {
        send(res, questionnaire_json(surveys_.get(req.matches[1]).questionnaire()));
    }));

    server.Get(R"(/v1/surveys/([^/]+)/summary)", guarded([this](const Req& req, Res& res) {
        send(res, summary_json(surveys_.get(req.matches[1]).summarize()));
    }));

    server.Get(R"(/v1/surveys/([^/]+)/export\.csv)", guarded([this](const Req& req, Res& res) {
        res.set_content(survey::to_csv(surveys_.get(req.matches[1]).summarize()), "text/csv; charset=utf-8");
    }));

    server.Get("/v1/health", guarded([this](const Req&, Res& res) {
        const auto h = backend_->health_check(config_.session.model);
        send(res, {{"ok", h.ok},
                   {"model_present", h.model_present},
                   {"model", config_.session.model.model_name},
                   {"backend", config_.backend_kind == BackendKind::mock ? "mock" : "http"}});
    }));
}

}  // namespace groundchat::service
