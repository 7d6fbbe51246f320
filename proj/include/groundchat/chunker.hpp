#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace groundchat::chunker {

enum class Estimator { chars_div4 };

struct ChunkPolicy {
    std::size_t chunk_budget_tokens = 1000;
    Estimator estimator = Estimator::chars_div4;
    bool hard_cut_allowed = true;

    // Throws Error(invalid_config) when the budget is below 16 tokens.
    void validate() const;
};

struct Chunk {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;
    std::size_t token_estimate = 0;
    // True when this chunk ends mid-word: the next chunk continues without
    // a separating space.
    bool hard_cut = false;

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text, Estimator estimator = Estimator::chars_div4);

// Greedy left-to-right split of normalized text. Each chunk is the longest
// prefix ending at a space whose estimate fits the budget; the boundary
// space is consumed. A single run longer than the budget is cut at the
// budget when the policy allows it, else Error(unsplittable).
std::vector<Chunk> split(std::string_view text, const ChunkPolicy& policy, std::string_view doc_id = {});

// Inverse of split: joins with a space except after hard cuts.
std::string reconstruct(const std::vector<Chunk>& chunks);

}  // namespace groundchat::chunker
