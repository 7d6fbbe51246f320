#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace groundchat::utf8 {

struct Decoded {
    char32_t cp;
    std::size_t length;  // bytes consumed
};

// Decodes one scalar value at `pos`. Returns nullopt for an ill-formed
// sequence (overlong, surrogate, truncated, > U+10FFFF).
std::optional<Decoded> decode(std::string_view s, std::size_t pos);

void append(std::string& out, char32_t cp);

bool is_valid(std::string_view s);

// Number of Unicode scalar values; ill-formed bytes count one each.
std::size_t length(std::string_view s);

// White_Space property.
bool is_space(char32_t cp);

// General category Cc.
bool is_control(char32_t cp);

std::string from_latin1(std::string_view s);
std::string from_windows1252(std::string_view s);

}  // namespace groundchat::utf8
