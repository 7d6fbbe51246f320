#include "groundchat/chunker.hpp"

#include "groundchat/error.hpp"
#include "groundchat/utf8.hpp"

namespace groundchat::chunker {

namespace {

// Max code points a chunk may hold under the budget.
std::size_t char_capacity(const ChunkPolicy& policy) {
    switch (policy.estimator) {
        case Estimator::chars_div4:
            return policy.chunk_budget_tokens * 4;
    }
    return policy.chunk_budget_tokens * 4;
}

std::vector<std::size_t> code_point_offsets(std::string_view text) {
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    std::size_t pos = 0;
    while (pos < text.size()) {
        offsets.push_back(pos);
        auto d = utf8::decode(text, pos);
        pos += d ? d->length : 1;
    }
    offsets.push_back(text.size());
    return offsets;
}

}  // namespace

void ChunkPolicy::validate() const {
    if (chunk_budget_tokens < 16) {
        throw Error(ErrorCode::invalid_config, "chunk budget must be at least 16 tokens");
    }
}

std::size_t estimate_tokens(std::string_view text, Estimator estimator) {
    switch (estimator) {
        case Estimator::chars_div4:
            return (utf8::length(text) + 3) / 4;
    }
    return 0;
}

std::vector<Chunk> split(std::string_view text, const ChunkPolicy& policy, std::string_view doc_id) {
    policy.validate();
    if (!text.empty() && (text.front() == ' ' || text.back() == ' ' || text.find("  ") != std::string_view::npos)) {
        throw Error(ErrorCode::invalid_argument, "chunker input must be normalized text");
    }

    const auto offsets = code_point_offsets(text);
    const std::size_t total = offsets.size() - 1;
    const std::size_t capacity = char_capacity(policy);

    std::vector<Chunk> chunks;
    auto emit = [&](std::size_t from, std::size_t to, bool hard_cut) {
        Chunk c;
        c.doc_id = std::string(doc_id);
        c.index = chunks.size();
        c.text = std::string(text.substr(offsets[from], offsets[to] - offsets[from]));
        c.token_estimate = estimate_tokens(c.text, policy.estimator);
        c.hard_cut = hard_cut;
        chunks.push_back(std::move(c));
    };

    std::size_t start = 0;
    while (start < total) {
        if (total - start <= capacity) {
            emit(start, total, false);
            break;
        }
        // Last space at a code point index in (start, start + capacity].
        std::size_t boundary = 0;
        for (std::size_t i = start + capacity; i > start; --i) {
            if (text[offsets[i]] == ' ') {
                boundary = i;
                break;
            }
        }
        if (boundary != 0) {
            emit(start, boundary, false);
            start = boundary + 1;
        } else if (policy.hard_cut_allowed) {
            emit(start, start + capacity, true);
            start += capacity;
        } else {
            throw Error(ErrorCode::unsplittable,
                        "a run of " + std::to_string(capacity) + "+ characters without whitespace exceeds the chunk budget");
        }
    }
    return chunks;
}

std::string reconstruct(const std::vector<Chunk>& chunks) {
    std::string out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        out += chunks[i].text;
        if (i + 1 < chunks.size() && !chunks[i].hard_cut) out.push_back(' ');
    }
    return out;
}

}  // namespace groundchat::chunker
