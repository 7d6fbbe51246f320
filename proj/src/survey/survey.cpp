#include "groundchat/survey.hpp"

#include <cmath>
#include <set>

#include "groundchat/error.hpp"

namespace groundchat::survey {

namespace {

using u128 = unsigned __int128;

std::string hundredths(std::uint64_t k) {
    std::string frac = std::to_string(k % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return std::to_string(k / 100) + "." + frac;
}

// round_half_up(100 * sqrt(num / den)): the largest k with
// (k - 1/2)^2 <= 10000 * num / den, i.e. (2k - 1)^2 * den <= 40000 * num.
std::uint64_t rounded_sqrt_hundredths(std::uint64_t num, std::uint64_t den) {
    auto fits = [&](std::uint64_t k) {
        if (k == 0) return true;
        const u128 odd = 2 * static_cast<u128>(k) - 1;
        return odd * odd * den <= static_cast<u128>(40000) * num;
    };
    auto k = static_cast<std::uint64_t>(std::llround(100.0 * std::sqrt(static_cast<double>(num) / den)));
    while (!fits(k)) --k;
    while (fits(k + 1)) ++k;
    return k;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(ItemKind kind) { return kind == ItemKind::likert5 ? "likert5" : "open"; }

ItemKind parse_item_kind(std::string_view name) {
    if (name == "likert5") return ItemKind::likert5;
    if (name == "open") return ItemKind::open;
    throw Error(ErrorCode::invalid_argument, "unknown item kind '" + std::string(name) + "'");
}

void Questionnaire::validate() const {
    if (id.empty()) throw Error(ErrorCode::invalid_argument, "questionnaire id must not be empty");
    if (items.empty()) throw Error(ErrorCode::invalid_argument, "questionnaire " + id + " has no items");
    std::set<std::string> seen;
    for (const auto& item : items) {
        if (item.item_id.empty()) throw Error(ErrorCode::invalid_argument, "item id must not be empty");
        if (!seen.insert(item.item_id).second) {
            throw Error(ErrorCode::invalid_argument, "item id " + item.item_id + " appears twice");
        }
    }
}

const Item* Questionnaire::find(std::string_view item_id) const {
    for (const auto& item : items) {
        if (item.item_id == item_id) return &item;
    }
    return nullptr;
}

Questionnaire default_questionnaire() {
    return {"default",
            {
                {"q1", "Previous experience [experience]", ItemKind::likert5},
                {"q2", "Previous experience [satisfaction]", ItemKind::likert5},
                {"q3", "Previous experience [interaction]", ItemKind::likert5},
                {"q4", "Ease of Use [Interaction]", ItemKind::likert5},
                {"q5", "Ease of Use [Adjust Skill Levels]", ItemKind::likert5},
                {"q6", "Ease of Use [Response Quality]", ItemKind::likert5},
                {"q7", "Ease of Use [Speed of Response]", ItemKind::likert5},
                {"q8", "Usability [Design]", ItemKind::likert5},
                {"q9", "Comments and suggestions for improvement (optional)", ItemKind::open},
            }};
}

LikertStats likert_stats(const std::vector<int>& values) {
    LikertStats st;
    st.n = values.size();
    std::uint64_t sum = 0, squares = 0;
    for (int v : values) {
        if (v < 1 || v > 5) throw Error(ErrorCode::out_of_range, "rating " + std::to_string(v) + " is outside 1..5");
        sum += static_cast<std::uint64_t>(v);
        squares += static_cast<std::uint64_t>(v * v);
    }
    if (st.n == 0) return st;
    const std::uint64_t n = st.n;
    st.mean = static_cast<double>(sum) / static_cast<double>(n);
    st.mean_display = hundredths((200 * sum + n) / (2 * n));
    if (n >= 2) {
        // n * sum(x^2) - sum^2 == sum((n x - S)^2) / n, never negative.
        const std::uint64_t num = n * squares - sum * sum;
        const std::uint64_t den = n * (n - 1);
        st.std_dev = std::sqrt(static_cast<double>(num) / static_cast<double>(den));
        st.std_display = hundredths(rounded_sqrt_hundredths(num, den));
    }
    return st;
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string to_csv(const SurveySummary& summary) {
    std::string out = "item_id,prompt,n,mean,std\n";
    for (const auto& row : summary.items) {
        const bool open = row.item.kind == ItemKind::open;
        out += csv_field(row.item.item_id) + "," + csv_field(row.item.prompt) + "," +
               std::to_string(open ? row.answers.size() : row.stats.n) + ",";
        if (!open) {
            out += row.stats.mean_display.value_or("") + "," + row.stats.std_display.value_or("");
        } else {
            out += ",";
        }
        out += "\n";
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw Error(ErrorCode::invalid_argument, "CSV ends inside a quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Submission> parse_responses_csv(std::string_view csv, const Questionnaire& q) {
    if (csv.substr(0, 3) == "\xEF\xBB\xBF") csv.remove_prefix(3);
    const auto rows = parse_csv(csv);
    if (rows.empty()) throw Error(ErrorCode::invalid_argument, "response CSV has no header row");
    std::vector<const Item*> columns;
    for (const auto& name : rows[0]) {
        const auto id = trim(name);
        if (id == "respondent") {
            columns.push_back(nullptr);
            continue;
        }
        const auto* item = q.find(id);
        if (!item) throw Error(ErrorCode::unknown_item, "unknown item '" + id + "' in CSV header");
        columns.push_back(item);
    }

    std::vector<Submission> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() > columns.size()) {
            throw Error(ErrorCode::invalid_argument, "CSV row " + std::to_string(r + 1) + " has too many cells");
        }
        Submission s;
        s.respondent = "row" + std::to_string(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto cell = trim(row[c]);
            if (!columns[c]) {
                if (!cell.empty()) s.respondent = cell;
                continue;
            }
            if (cell.empty()) continue;
            if (columns[c]->kind == ItemKind::open) {
                s.open.push_back({columns[c]->item_id, row[c]});
                continue;
            }
            int value = 0;
            std::size_t used = 0;
            try {
                value = std::stoi(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cell.size() || used == 0) {
                throw Error(ErrorCode::invalid_argument,
                            "CSV row " + std::to_string(r + 1) + ": '" + cell + "' is not an integer rating");
            }
            if (value < 1 || value > 5) {
                throw Error(ErrorCode::out_of_range,
                            "CSV row " + std::to_string(r + 1) + ": rating " + cell + " is outside 1..5");
            }
            s.likert.push_back({columns[c]->item_id, value});
        }
        if (!s.likert.empty() || !s.open.empty()) out.push_back(std::move(s));
    }
    return out;
}

SurveyStore::SurveyStore(Questionnaire questionnaire, SurveyOptions options, const Clock& clock)
    : questionnaire_(std::move(questionnaire)), options_(options), clock_(&clock) {
    questionnaire_.validate();
    if (options_.max_submissions_per_respondent == 0) {
        throw Error(ErrorCode::invalid_config, "survey submissions per respondent must be at least 1");
    }
}

void SurveyStore::submit(Submission submission) {
    if (submission.likert.empty() && submission.open.empty()) {
        throw Error(ErrorCode::invalid_argument, "submission has no answers");
    }
    std::set<std::string> answered;
    for (const auto& r : submission.likert) {
        const auto* item = questionnaire_.find(r.item_id);
        if (!item) throw Error(ErrorCode::unknown_item, "no item " + r.item_id + " in questionnaire " + questionnaire_.id);
        if (item->kind != ItemKind::likert5) {
            throw Error(ErrorCode::invalid_argument, "item " + r.item_id + " takes a text answer");
        }
        if (r.value < 1 || r.value > 5) {
            throw Error(ErrorCode::out_of_range, "rating " + std::to_string(r.value) + " for " + r.item_id + " is outside 1..5");
        }
        if (!answered.insert(r.item_id).second) {
            throw Error(ErrorCode::invalid_argument, "item " + r.item_id + " answered twice");
        }
    }
    for (const auto& a : submission.open) {
        const auto* item = questionnaire_.find(a.item_id);
        if (!item) throw Error(ErrorCode::unknown_item, "no item " + a.item_id + " in questionnaire " + questionnaire_.id);
        if (item->kind != ItemKind::open) {
            throw Error(ErrorCode::invalid_argument, "item " + a.item_id + " takes a rating");
        }
        if (!answered.insert(a.item_id).second) {
            throw Error(ErrorCode::invalid_argument, "item " + a.item_id + " answered twice");
        }
    }

    std::lock_guard lock(mutex_);
    auto& count = per_respondent_[submission.respondent];
    if (count >= options_.max_submissions_per_respondent) {
        throw Error(ErrorCode::duplicate_submission, "feedback was already submitted");
    }
    ++count;
    submission.submitted_at = clock_->now();
    submissions_.push_back(std::move(submission));
}

std::size_t SurveyStore::submission_count() const {
    std::lock_guard lock(mutex_);
    return submissions_.size();
}

SurveySummary SurveyStore::summarize() const {
    std::vector<Submission> snapshot;
    {
        std::lock_guard lock(mutex_);
        snapshot = submissions_;
    }
    SurveySummary summary;
    summary.questionnaire_id = questionnaire_.id;
    summary.submissions = snapshot.size();
    for (const auto& item : questionnaire_.items) {
        ItemSummary row;
        row.item = item;
        std::vector<int> values;
        for (const auto& s : snapshot) {
            for (const auto& r : s.likert) {
                if (r.item_id == item.item_id) values.push_back(r.value);
            }
            for (const auto& a : s.open) {
                if (a.item_id == item.item_id) row.answers.push_back(a.text);
            }
        }
        row.stats = likert_stats(values);
        summary.items.push_back(std::move(row));
    }
    return summary;
}

SurveyRegistry::SurveyRegistry(SurveyOptions options, const Clock& clock) : options_(options), clock_(&clock) {
    add(default_questionnaire());
}

void SurveyRegistry::add(Questionnaire questionnaire) {
    questionnaire.validate();
    std::lock_guard lock(mutex_);
    if (stores_.count(questionnaire.id)) {
        throw Error(ErrorCode::invalid_argument, "questionnaire " + questionnaire.id + " already exists");
    }
    auto id = questionnaire.id;
    stores_.emplace(std::move(id), std::make_unique<SurveyStore>(std::move(questionnaire), options_, *clock_));
}

SurveyStore& SurveyRegistry::get(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = stores_.find(id);
    if (it == stores_.end()) throw Error(ErrorCode::unknown_questionnaire, "no questionnaire " + id);
    return *it->second;
}

const SurveyStore& SurveyRegistry::get(const std::string& id) const {
    return const_cast<SurveyRegistry*>(this)->get(id);
}

std::vector<std::string> SurveyRegistry::ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : stores_) out.push_back(id);
    return out;
}

}  // namespace groundchat::survey
