#pragma once

// Naive character-by-character greedy splitter. Test-only: it shares no
// code with the production chunker and exists to cross-check it.

#include <optional>
#include <string>
#include <vector>

namespace groundchat::testing {

struct OracleChunk {
    std::string text;
    bool hard_cut = false;
    friend bool operator==(const OracleChunk&, const OracleChunk&) = default;
};

inline std::vector<std::string> oracle_code_points(const std::string& s) {
    std::vector<std::string> cps;
    for (std::size_t i = 0; i < s.size();) {
        const unsigned char b = static_cast<unsigned char>(s[i]);
        const std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : 4;
        cps.push_back(s.substr(i, len));
        i += len;
    }
    return cps;
}

inline std::size_t oracle_estimate(std::size_t chars) {
    std::size_t tokens = 0;
    std::size_t remaining = chars;
    while (remaining > 0) {
        ++tokens;
        remaining = remaining >= 4 ? remaining - 4 : 0;
    }
    return tokens;
}

// nullopt when an oversized run is met and hard cuts are not allowed.
inline std::optional<std::vector<OracleChunk>> oracle_split(const std::string& text, std::size_t budget, bool hard_cut_allowed) {
    const auto cps = oracle_code_points(text);
    const std::size_t n = cps.size();
    auto join = [&](std::size_t from, std::size_t to) {
        std::string out;
        for (std::size_t k = from; k < to; ++k) out += cps[k];
        return out;
    };
    std::vector<OracleChunk> chunks;
    std::size_t i = 0;
    while (i < n) {
        std::size_t best = 0;
        bool found = false;
        for (std::size_t j = i + 1; j <= n; ++j) {
            if (oracle_estimate(j - i) > budget) break;
            if (j == n || cps[j] == " ") {
                best = j;
                found = true;
            }
        }
        if (found) {
            chunks.push_back({join(i, best), false});
            i = best + 1;
            continue;
        }
        if (!hard_cut_allowed) return std::nullopt;
        std::size_t j = i;
        while (j < n && oracle_estimate(j + 1 - i) <= budget) ++j;
        chunks.push_back({join(i, j), true});
        i = j;
    }
    return chunks;
}

}  // namespace groundchat::testing
