#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundchat/clock.hpp"

namespace groundchat::survey {

enum class ItemKind { likert5, open };

std::string_view to_string(ItemKind kind);
// Throws Error(invalid_argument).
ItemKind parse_item_kind(std::string_view name);

struct Item {
    std::string item_id;
    std::string prompt;
    ItemKind kind = ItemKind::likert5;
};

struct Questionnaire {
    std::string id;
    std::vector<Item> items;

    // Throws Error(invalid_argument) for no items, an empty or repeated id.
    void validate() const;
    const Item* find(std::string_view item_id) const;
};

// Eight Likert items (experience, satisfaction, interaction; ease of use
// for interaction, level adjustment, response quality, speed; design) and
// one open item for comments. Id "default".
Questionnaire default_questionnaire();

struct LikertResponse {
    std::string item_id;
    int value = 0;
};

struct OpenAnswer {
    std::string item_id;
    std::string text;
};

struct Submission {
    std::string respondent;
    std::vector<LikertResponse> likert;
    std::vector<OpenAnswer> open;
    Timestamp submitted_at = 0;
};

// Mean and sample standard deviation of 1..5 ratings. Display strings are
// rounded half-up to two decimals from the exact rational values.
struct LikertStats {
    std::size_t n = 0;
    std::optional<double> mean;          // n >= 1
    std::optional<double> std_dev;       // n >= 2
    std::optional<std::string> mean_display;
    std::optional<std::string> std_display;
};

// Throws Error(out_of_range) for a value outside 1..5.
LikertStats likert_stats(const std::vector<int>& values);

struct ItemSummary {
    Item item;
    LikertStats stats;                   // likert items
    std::vector<std::string> answers;    // open items, in submission order
};

struct SurveySummary {
    std::string questionnaire_id;
    std::size_t submissions = 0;
    std::vector<ItemSummary> items;
};

// "item_id,prompt,n,mean,std" then one row per item. Open items carry the
// answer count and empty mean/std cells.
std::string to_csv(const SurveySummary& summary);

// Wide response table: header row of item ids, one row per respondent,
// blank cells for skipped items. Likert cells must be integers 1..5.
// Throws Error(unknown_item), Error(out_of_range), Error(invalid_argument).
std::vector<Submission> parse_responses_csv(std::string_view csv, const Questionnaire& q);

// Minimal RFC 4180 reader. Throws Error(invalid_argument) on an
// unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_field(std::string_view value);

struct SurveyOptions {
    std::size_t max_submissions_per_respondent = 1;
};

// Append-only answers for one questionnaire.
class SurveyStore {
public:
    SurveyStore(Questionnaire questionnaire, SurveyOptions options, const Clock& clock);

    const Questionnaire& questionnaire() const noexcept { return questionnaire_; }

    // Throws Error(unknown_item), Error(out_of_range),
    // Error(duplicate_submission), Error(invalid_argument) for an empty
    // submission, an item answered twice or the wrong answer kind.
    void submit(Submission submission);

    SurveySummary summarize() const;
    std::size_t submission_count() const;

private:
    Questionnaire questionnaire_;
    SurveyOptions options_;
    const Clock* clock_;
    mutable std::mutex mutex_;
    std::vector<Submission> submissions_;
    std::map<std::string, std::size_t> per_respondent_;
};

// Questionnaires by id; "default" is always present.
class SurveyRegistry {
public:
    SurveyRegistry(SurveyOptions options, const Clock& clock);

    // Throws Error(invalid_argument) for an invalid or repeated id.
    void add(Questionnaire questionnaire);
    // Throws Error(unknown_questionnaire).
    SurveyStore& get(const std::string& id);
    const SurveyStore& get(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    SurveyOptions options_;
    const Clock* clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::unique_ptr<SurveyStore>> stores_;
};

}  // namespace groundchat::survey
