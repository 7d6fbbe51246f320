#include <doctest.h>

#include <random>
#include <regex>
#include <set>

#include "groundchat/chunker.hpp"
#include "groundchat/error.hpp"
#include "groundchat/levels.hpp"
#include "groundchat/model_config.hpp"

using namespace groundchat;
using namespace groundchat::levels;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::internal;
}

}  // namespace

TEST_CASE("level names round trip") {
    for (auto level : kAllLevels) CHECK(parse_level(to_string(level)) == level);
    CHECK(code_of([] { parse_level("expert"); }) == ErrorCode::unknown_level);
    CHECK(code_of([] { parse_level("Beginner"); }) == ErrorCode::unknown_level);
}

TEST_CASE("default profiles") {
    const auto p = default_profiles();
    REQUIRE(p.size() == 3);
    CHECK(p.at(ProficiencyLevel::beginner).render().find("simple vocabulary") != std::string::npos);
    CHECK(p.at(ProficiencyLevel::beginner).render().find("short sentences") != std::string::npos);
    CHECK(p.at(ProficiencyLevel::intermediate).render().find("standard register") != std::string::npos);
    CHECK(p.at(ProficiencyLevel::advanced).render().find("precise technical register") != std::string::npos);

    std::set<std::string> distinct;
    const std::regex grounding(R"(Answer only from the provided context\..*not in the sources)");
    for (auto level : kAllLevels) {
        const auto& prof = p.at(level);
        CHECK(prof.level == level);
        CHECK_NOTHROW(prof.validate());
        CHECK(std::regex_search(prof.render(), grounding));
        CHECK(prof.render().find('{') == std::string::npos);
        distinct.insert(prof.render());
    }
    CHECK(distinct.size() == 3);

    CHECK(p.at(ProficiencyLevel::beginner).max_answer_tokens == 256);
    CHECK(p.at(ProficiencyLevel::intermediate).max_answer_tokens == 384);
    CHECK(p.at(ProficiencyLevel::advanced).max_answer_tokens == 512);
}

TEST_CASE("profile validation") {
    LevelProfile p{ProficiencyLevel::beginner, "   ", 10};
    CHECK(code_of([&] { p.validate(); }) == ErrorCode::empty_system_message);
    p.system_message = "";
    CHECK(code_of([&] { p.validate(); }) == ErrorCode::empty_system_message);
    p.system_message = "Hello {name}";
    CHECK(code_of([&] { p.validate(); }) == ErrorCode::unresolved_placeholder);
    p.system_message = "Speak to a {level} learner.";
    CHECK_NOTHROW(p.validate());
    CHECK(p.render() == "Speak to a beginner learner.");
    p.max_answer_tokens = 0;
    CHECK(code_of([&] { p.validate(); }) == ErrorCode::invalid_argument);
}

TEST_CASE("set_profile overrides one set only") {
    ProfileSet a, b;
    a.set_profile(ProficiencyLevel::beginner, {ProficiencyLevel::beginner, "Use only words from the A1 list.", 200});
    ModelConfig cfg;
    auto bundle = assemble(a.get(ProficiencyLevel::beginner), "What is a noun?", "Hi", std::nullopt, cfg);
    CHECK(bundle.system_message == "Use only words from the A1 list.");
    CHECK(bundle.max_answer_tokens == 200);
    CHECK(b.get(ProficiencyLevel::beginner).system_message == default_profiles().at(ProficiencyLevel::beginner).system_message);
    CHECK(a.get(ProficiencyLevel::advanced).system_message == b.get(ProficiencyLevel::advanced).system_message);

    CHECK(code_of([&] { a.set_profile(ProficiencyLevel::advanced, {ProficiencyLevel::advanced, "", 10}); }) ==
          ErrorCode::empty_system_message);
    CHECK(a.get(ProficiencyLevel::advanced).system_message == b.get(ProficiencyLevel::advanced).system_message);

    // The key decides the level, whatever the profile says.
    a.set_profile(ProficiencyLevel::intermediate, {ProficiencyLevel::advanced, "For {level}.", 5});
    CHECK(a.get(ProficiencyLevel::intermediate).render() == "For intermediate.");
}

TEST_CASE("assemble") {
    ModelConfig cfg;
    const auto profiles = default_profiles();
    const auto& beginner = profiles.at(ProficiencyLevel::beginner);

    auto b = assemble(beginner, "What is a noun?", "Hi", std::nullopt, cfg);
    CHECK(b.level == ProficiencyLevel::beginner);
    CHECK(b.system_message == beginner.render());
    CHECK(b.question == "What is a noun?");
    CHECK(b.context == "Hi");
    CHECK_FALSE(b.prior_draft.has_value());
    CHECK(b.total_token_estimate == chunker::estimate_tokens(beginner.render()) + 4 + 1);

    auto with_draft = assemble(beginner, "What is a noun?", "Hi", std::string("draft text"), cfg);
    CHECK(with_draft.prior_draft == std::optional<std::string>("draft text"));
    CHECK(with_draft.total_token_estimate == b.total_token_estimate + 3);

    CHECK(code_of([&] { assemble(beginner, std::string(100'000, 'a'), "Hi", std::nullopt, cfg); }) ==
          ErrorCode::bundle_too_large);
    CHECK(code_of([&] { assemble(beginner, "q", std::string(100'000, 'a'), std::nullopt, cfg); }) ==
          ErrorCode::bundle_too_large);
    CHECK(code_of([&] { assemble(beginner, "", "Hi", std::nullopt, cfg); }) == ErrorCode::empty_question);
    CHECK(code_of([&] { assemble(beginner, "  ", "Hi", std::nullopt, cfg); }) == ErrorCode::empty_question);
    CHECK(code_of([&] { assemble(beginner, "q", "", std::nullopt, cfg); }) == ErrorCode::invalid_argument);
}

TEST_CASE("assemble at the budget edge") {
    ModelConfig cfg;
    cfg.context_window_tokens = 200;
    cfg.answer_reserve_tokens = 100;
    LevelProfile p{ProficiencyLevel::advanced, "sys.", 50};  // 1 token
    // 1 (system) + 1 (question) + 98 (context) == 100
    CHECK(assemble(p, "q", std::string(392, 'c'), std::nullopt, cfg).total_token_estimate == 100);
    CHECK(code_of([&] { assemble(p, "q", std::string(393, 'c'), std::nullopt, cfg); }) ==
          ErrorCode::bundle_too_large);
}

TEST_CASE("assemble is pure and additive") {
    std::mt19937 rng(7);
    ModelConfig cfg;
    const auto profiles = default_profiles();
    std::uniform_int_distribution<int> len(1, 3000), pick(0, 2), coin(0, 1);
    for (int round = 0; round < 200; ++round) {
        const auto level = kAllLevels[pick(rng)];
        const std::string q(len(rng) % 200 + 1, 'q');
        const std::string c(len(rng), 'c');
        std::optional<std::string> draft;
        if (coin(rng)) draft = std::string(len(rng) % 500, 'd');
        auto x = assemble(profiles.at(level), q, c, draft, cfg);
        auto y = assemble(profiles.at(level), q, c, draft, cfg);
        CHECK(x.total_token_estimate == y.total_token_estimate);
        CHECK(x.system_message == y.system_message);
        CHECK(x.total_token_estimate == chunker::estimate_tokens(x.system_message) + chunker::estimate_tokens(q) +
                                            chunker::estimate_tokens(c) + (draft ? chunker::estimate_tokens(*draft) : 0));
    }
}

TEST_CASE("user content layout") {
    PromptBundle b;
    b.question = "What?";
    b.context = "Hi";
    CHECK(user_content(b) == "Question:\nWhat?\n\nContext:\nHi");
    b.prior_draft = "z";
    const auto s = user_content(b);
    CHECK(s.rfind("Question:\nWhat?\n\nContext:\nHi\n\n", 0) == 0);
    CHECK(s.substr(s.size() - 2) == "\nz");
}
