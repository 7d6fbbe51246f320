#pragma once

#include <random>
#include <string>

namespace groundchat::testing {

// Mixed-script strings with whitespace of every kind, control characters
// and the occasional ill-formed byte.
inline std::string random_messy_string(std::mt19937& rng, std::size_t max_len) {
    static const char* pieces[] = {
        "a", "b", "Z", "7", ".", ",", " ", " ", "  ", "\t", "\n", "\r\n", "\v", "\f",
        "\x01", "\x1f", "\x7f", "\xc2\x85",        // NEL
        "\xc2\xa0",                                // NBSP
        "\xe2\x80\x83",                            // EM SPACE
        "\xe3\x80\x80",                            // IDEOGRAPHIC SPACE
        "\xc3\xa9", "\xc3\x9f", "\xe2\x82\xac", "\xf0\x9f\x98\x80",
        "\xe2\x80\x8b",                            // ZERO WIDTH SPACE (not whitespace)
        "\xff", "\xc3",                            // ill-formed
        "word", "Grammar", "rules"};
    std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
    std::uniform_int_distribution<std::size_t> piece_dist(0, std::size(pieces) - 1);
    const std::size_t target = len_dist(rng);
    std::string out;
    while (out.size() < target) out += pieces[piece_dist(rng)];
    return out;
}

// Words of random length over a small alphabet (incl. multibyte letters),
// separated by single spaces: already-normalized text.
inline std::string random_normalized_string(std::mt19937& rng, std::size_t max_len) {
    static const char* letters[] = {"a", "b", "c", "d", "e", "x", "\xc3\xa4", "\xc3\xb6", "\xe2\x82\xac"};
    std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
    std::uniform_int_distribution<int> word_len(1, 40);
    std::uniform_int_distribution<int> rare(0, 99);
    std::uniform_int_distribution<std::size_t> letter(0, std::size(letters) - 1);
    const std::size_t target = len_dist(rng);
    std::string out;
    std::size_t chars = 0;
    while (chars < target) {
        if (!out.empty()) {
            out.push_back(' ');
            ++chars;
        }
        // Occasionally a very long run that forces hard cuts.
        const int n = rare(rng) == 0 ? 3000 : word_len(rng);
        for (int i = 0; i < n && chars < target; ++i) {
            out += letters[letter(rng)];
            ++chars;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace groundchat::testing
