#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace groundchat {
struct ModelConfig;
}

namespace groundchat::levels {

enum class ProficiencyLevel { beginner, intermediate, advanced };

inline constexpr std::array<ProficiencyLevel, 3> kAllLevels = {
    ProficiencyLevel::beginner, ProficiencyLevel::intermediate, ProficiencyLevel::advanced};

std::string_view to_string(ProficiencyLevel level);

// Throws Error(unknown_level).
ProficiencyLevel parse_level(std::string_view name);

struct LevelProfile {
    ProficiencyLevel level = ProficiencyLevel::beginner;
    // May contain {level}; no other placeholder is allowed.
    std::string system_message;
    std::size_t max_answer_tokens = 256;

    // Substitutes {level}.
    std::string render() const;

    // Throws Error(empty_system_message), Error(unresolved_placeholder) or
    // Error(invalid_argument) for a zero answer length.
    void validate() const;
};

using ProfileMap = std::map<ProficiencyLevel, LevelProfile>;

// Beginner: short sentences, simple vocabulary. Intermediate: standard
// register, technical terms explained. Advanced: precise technical
// register. All three restrict answers to the provided context.
ProfileMap default_profiles();

// The per-session profile table.
class ProfileSet {
public:
    ProfileSet() : profiles_(default_profiles()) {}
    // Validates every entry; levels missing from `profiles` keep the default.
    explicit ProfileSet(const ProfileMap& profiles);

    const LevelProfile& get(ProficiencyLevel level) const { return profiles_.at(level); }
    const ProfileMap& all() const noexcept { return profiles_; }

    // Validates, then replaces the profile for `level`.
    void set_profile(ProficiencyLevel level, LevelProfile profile);

private:
    ProfileMap profiles_;
};

struct PromptBundle {
    ProficiencyLevel level = ProficiencyLevel::beginner;
    std::string system_message;
    std::string question;
    std::string context;
    std::optional<std::string> prior_draft;
    std::size_t max_answer_tokens = 0;
    std::size_t total_token_estimate = 0;
};

// Token room for a prompt: context window minus the answer reserve.
std::size_t prompt_budget(const ModelConfig& config);

// Renders the profile and sizes the bundle. Throws Error(empty_question),
// Error(invalid_argument) for empty context, Error(bundle_too_large) when
// the estimate exceeds prompt_budget(config). Never truncates.
PromptBundle assemble(const LevelProfile& profile, std::string_view question, std::string_view context,
                      const std::optional<std::string>& prior_draft, const ModelConfig& config);

// The user-turn text sent to a model: question, source excerpt, and the
// previous draft when refining.
std::string user_content(const PromptBundle& bundle);

}  // namespace groundchat::levels
