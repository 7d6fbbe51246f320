#include "groundchat/levels.hpp"

#include <regex>

#include "groundchat/chunker.hpp"
#include "groundchat/error.hpp"
#include "groundchat/model_config.hpp"

namespace groundchat::levels {

namespace {

constexpr std::string_view kGrounding =
    "Answer only from the provided context. If the context does not contain the answer, say that it is "
    "not in the sources. Do not use outside knowledge.";

}  // namespace

std::string_view to_string(ProficiencyLevel level) {
    switch (level) {
        case ProficiencyLevel::beginner: return "beginner";
        case ProficiencyLevel::intermediate: return "intermediate";
        case ProficiencyLevel::advanced: return "advanced";
    }
    return "beginner";
}

ProficiencyLevel parse_level(std::string_view name) {
    for (auto level : kAllLevels) {
        if (to_string(level) == name) return level;
    }
    throw Error(ErrorCode::unknown_level,
                "unknown level '" + std::string(name) + "' (expected beginner, intermediate or advanced)");
}

std::string LevelProfile::render() const {
    static const std::regex placeholder(R"(\{level\})");
    return std::regex_replace(system_message, placeholder, std::string(to_string(level)));
}

void LevelProfile::validate() const {
    if (system_message.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::empty_system_message, "system message must not be empty");
    }
    static const std::regex leftover(R"(\{[A-Za-z_][A-Za-z0-9_]*\})");
    if (std::regex_search(render(), leftover)) {
        throw Error(ErrorCode::unresolved_placeholder, "system message contains a placeholder other than {level}");
    }
    if (max_answer_tokens == 0) throw Error(ErrorCode::invalid_argument, "max_answer_tokens must be positive");
}

ProfileMap default_profiles() {
    const std::string grounding(kGrounding);
    return {
        {ProficiencyLevel::beginner,
         {ProficiencyLevel::beginner,
          "You are a patient tutor for a {level} learner. Use short sentences and simple vocabulary. "
          "Avoid technical terms; if one is unavoidable, explain it in everyday words. Give one small example "
          "when it helps. " + grounding,
          256}},
        {ProficiencyLevel::intermediate,
         {ProficiencyLevel::intermediate,
          "You are a tutor for an {level} learner. Use a standard register and complete sentences. "
          "When you use a technical term, add a brief explanation of it. " + grounding,
          384}},
        {ProficiencyLevel::advanced,
         {ProficiencyLevel::advanced,
          "You are a subject expert answering an {level} learner. Use a precise technical register and the "
          "correct terminology without simplification. Point out nuances and exceptions found in the "
          "material. " + grounding,
          512}},
    };
}

ProfileSet::ProfileSet(const ProfileMap& profiles) : profiles_(default_profiles()) {
    for (const auto& [level, profile] : profiles) set_profile(level, profile);
}

void ProfileSet::set_profile(ProficiencyLevel level, LevelProfile profile) {
    profile.level = level;
    profile.validate();
    profiles_[level] = std::move(profile);
}

std::size_t prompt_budget(const ModelConfig& config) {
    return config.context_window_tokens > config.answer_reserve_tokens
               ? config.context_window_tokens - config.answer_reserve_tokens
               : 0;
}

PromptBundle assemble(const LevelProfile& profile, std::string_view question, std::string_view context,
                      const std::optional<std::string>& prior_draft, const ModelConfig& config) {
    if (question.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw Error(ErrorCode::empty_question, "question must not be empty");
    }
    if (context.empty()) throw Error(ErrorCode::invalid_argument, "context must not be empty");

    PromptBundle bundle;
    bundle.level = profile.level;
    bundle.system_message = profile.render();
    bundle.question = std::string(question);
    bundle.context = std::string(context);
    bundle.prior_draft = prior_draft;
    bundle.max_answer_tokens = profile.max_answer_tokens;
    bundle.total_token_estimate = chunker::estimate_tokens(bundle.system_message) +
                                  chunker::estimate_tokens(bundle.question) + chunker::estimate_tokens(bundle.context) +
                                  (prior_draft ? chunker::estimate_tokens(*prior_draft) : 0);

    const auto budget = prompt_budget(config);
    if (bundle.total_token_estimate > budget) {
        throw Error(ErrorCode::bundle_too_large, "prompt needs " + std::to_string(bundle.total_token_estimate) +
                                                     " tokens but only " + std::to_string(budget) + " are available");
    }
    return bundle;
}

std::string user_content(const PromptBundle& bundle) {
    std::string out = "Question:\n" + bundle.question + "\n\nContext:\n" + bundle.context;
    if (bundle.prior_draft) {
        out += "\n\nDraft answer from earlier parts of the sources (refine it with the context above, keep what "
               "is still correct):\n" +
               *bundle.prior_draft;
    }
    return out;
}

}  // namespace groundchat::levels
