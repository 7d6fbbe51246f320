#include "groundchat/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "groundchat/error.hpp"

namespace groundchat {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& why) {
    throw Error(ErrorCode::invalid_config, "config key " + key + ": " + why);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) fail(where.empty() ? "(root)" : where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) fail(where.empty() ? key : where + "." + key, "unknown key");
    }
}

template <class T>
std::optional<T> get(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    const auto name = where + "." + key;
    if constexpr (std::is_same_v<T, std::string>) {
        if (!it->is_string()) fail(name, "expected a string");
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) fail(name, "expected true or false");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) fail(name, "expected a number");
    } else {
        if (!it->is_number_integer() || (it->is_number_integer() && it->get<long long>() < 0)) {
            fail(name, "expected a non-negative integer");
        }
    }
    return it->get<T>();
}

levels::ProficiencyLevel level_key(const std::string& name) {
    try {
        return levels::parse_level(name);
    } catch (const Error&) {
        fail("levels." + name, "unknown level");
    }
}

}  // namespace

ServerConfig parse_bind(std::string_view bind, ServerConfig base) {
    const auto colon = bind.rfind(':');
    if (colon == std::string_view::npos || colon == 0) fail("server.bind", "expected host:port");
    base.host = std::string(bind.substr(0, colon));
    if (base.host.size() > 2 && base.host.front() == '[' && base.host.back() == ']') {
        base.host = base.host.substr(1, base.host.size() - 2);
    }
    const auto port = bind.substr(colon + 1);
    int value = 0;
    if (port.empty() || port.size() > 5) fail("server.bind", "bad port");
    for (char c : port) {
        if (c < '0' || c > '9') fail("server.bind", "bad port");
        value = value * 10 + (c - '0');
    }
    if (value > 65535) fail("server.bind", "port out of range");
    base.port = value;
    return base;
}

void ServiceConfig::validate() const {
    try {
        session.model.validate();
        session.kb.policy.validate();
        for (const auto& [level, profile] : session.profiles) profile.validate();
        for (const auto& q : questionnaires) q.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::invalid_config) throw;
        throw Error(ErrorCode::invalid_config, e.what());
    }
    if (server.max_upload_mib == 0) fail("server.max_upload_mib", "must be positive");
    if (fetch.max_bytes == 0) fail("ingest.max_bytes", "must be positive");
    if (survey.max_submissions_per_respondent == 0) fail("survey.max_submissions_per_respondent", "must be positive");
    std::set<std::string> ids{"default"};
    for (const auto& q : questionnaires) {
        if (!ids.insert(q.id).second) fail("survey.questionnaires", "duplicate id " + q.id);
    }
}

ServiceConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::invalid_config, std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(root, "", {"backend", "chunker", "ingest", "store", "levels", "server", "survey"});

    ServiceConfig cfg;
    auto& model = cfg.session.model;

    if (auto it = root.find("backend"); it != root.end()) {
        const auto& b = *it;
        only_keys(b, "backend",
                  {"kind", "endpoint", "model_name", "temperature", "context_window_tokens", "answer_reserve_tokens",
                   "timeout_ms", "retries", "chat_path", "tags_path"});
        if (auto kind = get<std::string>(b, "backend", "kind")) {
            if (*kind == "mock") cfg.backend_kind = BackendKind::mock;
            else if (*kind == "http") cfg.backend_kind = BackendKind::http;
            else fail("backend.kind", "expected mock or http");
        }
        if (auto v = get<std::string>(b, "backend", "endpoint")) model.endpoint = *v;
        if (auto v = get<std::string>(b, "backend", "model_name")) model.model_name = *v;
        if (auto v = get<double>(b, "backend", "temperature")) model.temperature = *v;
        if (auto v = get<std::size_t>(b, "backend", "context_window_tokens")) model.context_window_tokens = *v;
        if (auto v = get<std::size_t>(b, "backend", "answer_reserve_tokens")) model.answer_reserve_tokens = *v;
        if (auto v = get<std::size_t>(b, "backend", "timeout_ms")) model.timeout = std::chrono::milliseconds(*v);
        if (auto v = get<std::size_t>(b, "backend", "retries")) model.retries = static_cast<int>(*v);
        if (auto v = get<std::string>(b, "backend", "chat_path")) model.chat_path = *v;
        if (auto v = get<std::string>(b, "backend", "tags_path")) model.tags_path = *v;
    }

    if (auto it = root.find("chunker"); it != root.end()) {
        only_keys(*it, "chunker", {"budget_tokens", "hard_cut_allowed"});
        if (auto v = get<std::size_t>(*it, "chunker", "budget_tokens")) cfg.session.kb.policy.chunk_budget_tokens = *v;
        if (auto v = get<bool>(*it, "chunker", "hard_cut_allowed")) cfg.session.kb.policy.hard_cut_allowed = *v;
    }

    if (auto it = root.find("ingest"); it != root.end()) {
        const auto& in = *it;
        only_keys(in, "ingest", {"strip_elements", "max_bytes", "timeout_ms", "max_redirects", "fetch_parallelism"});
        if (auto s = in.find("strip_elements"); s != in.end()) {
            if (!s->is_array()) fail("ingest.strip_elements", "expected a list of element names");
            std::vector<std::string> names;
            for (const auto& n : *s) {
                if (!n.is_string() || n.get<std::string>().empty()) fail("ingest.strip_elements", "expected element names");
                names.push_back(n.get<std::string>());
            }
            cfg.session.kb.extract.strip_elements = std::move(names);
        }
        if (auto v = get<std::size_t>(in, "ingest", "max_bytes")) cfg.fetch.max_bytes = *v;
        if (auto v = get<std::size_t>(in, "ingest", "timeout_ms")) cfg.fetch.timeout = std::chrono::milliseconds(*v);
        if (auto v = get<std::size_t>(in, "ingest", "max_redirects")) cfg.fetch.max_redirects = static_cast<int>(*v);
        if (auto v = get<std::size_t>(in, "ingest", "fetch_parallelism")) cfg.session.kb.fetch_parallelism = *v;
    }

    if (auto it = root.find("store"); it != root.end()) {
        only_keys(*it, "store", {"snapshot_dir"});
        if (auto v = get<std::string>(*it, "store", "snapshot_dir")) {
            if (!v->empty()) cfg.session.snapshot_dir = std::filesystem::path(*v);
        }
    }

    if (auto it = root.find("levels"); it != root.end()) {
        only_keys(*it, "levels", {"beginner", "intermediate", "advanced"});
        for (const auto& [name, body] : it->items()) {
            const auto level = level_key(name);
            const auto where = "levels." + name;
            only_keys(body, where, {"system_message", "max_answer_tokens"});
            auto profile = cfg.session.profiles.at(level);
            if (auto v = get<std::string>(body, where, "system_message")) profile.system_message = *v;
            if (auto v = get<std::size_t>(body, where, "max_answer_tokens")) profile.max_answer_tokens = *v;
            try {
                profile.validate();
            } catch (const Error& e) {
                fail(where + ".system_message", e.what());
            }
            cfg.session.profiles[level] = profile;
        }
    }

    if (auto it = root.find("server"); it != root.end()) {
        only_keys(*it, "server", {"bind", "max_upload_mib"});
        if (auto v = get<std::string>(*it, "server", "bind")) cfg.server = parse_bind(*v, cfg.server);
        if (auto v = get<std::size_t>(*it, "server", "max_upload_mib")) cfg.server.max_upload_mib = *v;
    }

    if (auto it = root.find("survey"); it != root.end()) {
        only_keys(*it, "survey", {"max_submissions_per_respondent", "questionnaires"});
        if (auto v = get<std::size_t>(*it, "survey", "max_submissions_per_respondent")) {
            cfg.survey.max_submissions_per_respondent = *v;
        }
        if (auto qs = it->find("questionnaires"); qs != it->end()) {
            if (!qs->is_array()) fail("survey.questionnaires", "expected a list");
            for (const auto& qj : *qs) {
                only_keys(qj, "survey.questionnaires[]", {"id", "items"});
                survey::Questionnaire q;
                q.id = get<std::string>(qj, "survey.questionnaires[]", "id").value_or("");
                auto items = qj.find("items");
                if (items == qj.end() || !items->is_array()) fail("survey.questionnaires[].items", "expected a list");
                for (const auto& ij : *items) {
                    only_keys(ij, "survey.questionnaires[].items[]", {"item_id", "prompt", "kind"});
                    survey::Item item;
                    item.item_id = get<std::string>(ij, "survey.questionnaires[].items[]", "item_id").value_or("");
                    item.prompt = get<std::string>(ij, "survey.questionnaires[].items[]", "prompt").value_or("");
                    try {
                        item.kind = survey::parse_item_kind(
                            get<std::string>(ij, "survey.questionnaires[].items[]", "kind").value_or("likert5"));
                    } catch (const Error& e) {
                        fail("survey.questionnaires[].items[].kind", e.what());
                    }
                    q.items.push_back(std::move(item));
                }
                cfg.questionnaires.push_back(std::move(q));
            }
        }
    }

    cfg.validate();
    return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::invalid_config, "cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace groundchat
