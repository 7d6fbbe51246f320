#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"
#include "groundchat/utf8.hpp"

namespace groundchat::ingest {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool istarts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
    if (pos + prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) return false;
    }
    return true;
}

std::size_t ifind(std::string_view s, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
        if (istarts_with(s, i, needle)) return i;
    }
    return std::string_view::npos;
}

const std::unordered_set<std::string>& block_elements() {
    static const std::unordered_set<std::string> names = {
        "address", "article", "aside", "blockquote", "body", "br", "caption", "dd", "details", "dialog",
        "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4",
        "h5", "h6", "head", "header", "hgroup", "hr", "html", "li", "main", "menu", "nav", "ol", "option",
        "p", "pre", "section", "summary", "table", "tbody", "td", "tfoot", "th", "thead", "title", "tr",
        "ul", "textarea", "legend", "center"};
    return names;
}

// Elements whose content is not markup.
bool is_raw_text(std::string_view name) {
    return name == "script" || name == "style" || name == "textarea" || name == "title" || name == "iframe" ||
           name == "noscript" || name == "xmp" || name == "noembed" || name == "noframes";
}

const std::unordered_map<std::string, char32_t>& named_entities() {
    static const std::unordered_map<std::string, char32_t> table = {
        {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}, {"nbsp", 0xA0},
        {"ensp", 0x2002}, {"emsp", 0x2003}, {"thinsp", 0x2009}, {"zwnj", 0x200C}, {"zwj", 0x200D},
        {"shy", 0xAD}, {"copy", 0xA9}, {"reg", 0xAE}, {"trade", 0x2122}, {"deg", 0xB0}, {"plusmn", 0xB1},
        {"times", 0xD7}, {"divide", 0xF7}, {"middot", 0xB7}, {"para", 0xB6}, {"sect", 0xA7},
        {"laquo", 0xAB}, {"raquo", 0xBB}, {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"sbquo", 0x201A},
        {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"bdquo", 0x201E}, {"lsaquo", 0x2039}, {"rsaquo", 0x203A},
        {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"bull", 0x2022}, {"prime", 0x2032},
        {"dagger", 0x2020}, {"Dagger", 0x2021}, {"permil", 0x2030}, {"euro", 0x20AC}, {"pound", 0xA3},
        {"yen", 0xA5}, {"cent", 0xA2}, {"curren", 0xA4}, {"iexcl", 0xA1}, {"iquest", 0xBF},
        {"frac12", 0xBD}, {"frac14", 0xBC}, {"frac34", 0xBE}, {"sup1", 0xB9}, {"sup2", 0xB2}, {"sup3", 0xB3},
        {"micro", 0xB5}, {"ordf", 0xAA}, {"ordm", 0xBA}, {"not", 0xAC}, {"macr", 0xAF}, {"acute", 0xB4},
        {"cedil", 0xB8}, {"uml", 0xA8}, {"brvbar", 0xA6}, {"larr", 0x2190}, {"rarr", 0x2192},
        {"uarr", 0x2191}, {"darr", 0x2193}, {"harr", 0x2194}, {"le", 0x2264}, {"ge", 0x2265},
        {"ne", 0x2260}, {"asymp", 0x2248}, {"infin", 0x221E}, {"minus", 0x2212}, {"alpha", 0x3B1},
        {"beta", 0x3B2}, {"gamma", 0x3B3}, {"delta", 0x3B4}, {"pi", 0x3C0}, {"sigma", 0x3C3},
        {"mu", 0x3BC}, {"lambda", 0x3BB}, {"Auml", 0xC4}, {"Ouml", 0xD6}, {"Uuml", 0xDC}, {"auml", 0xE4},
        {"ouml", 0xF6}, {"uuml", 0xFC}, {"szlig", 0xDF}, {"Agrave", 0xC0}, {"Aacute", 0xC1},
        {"Acirc", 0xC2}, {"Atilde", 0xC3}, {"Aring", 0xC5}, {"AElig", 0xC6}, {"Ccedil", 0xC7},
        {"Egrave", 0xC8}, {"Eacute", 0xC9}, {"Ecirc", 0xCA}, {"Euml", 0xCB}, {"Igrave", 0xCC},
        {"Iacute", 0xCD}, {"Icirc", 0xCE}, {"Iuml", 0xCF}, {"Ntilde", 0xD1}, {"Ograve", 0xD2},
        {"Oacute", 0xD3}, {"Ocirc", 0xD4}, {"Otilde", 0xD5}, {"Oslash", 0xD8}, {"Ugrave", 0xD9},
        {"Uacute", 0xDA}, {"Ucirc", 0xDB}, {"Yacute", 0xDD}, {"agrave", 0xE0}, {"aacute", 0xE1},
        {"acirc", 0xE2}, {"atilde", 0xE3}, {"aring", 0xE5}, {"aelig", 0xE6}, {"ccedil", 0xE7},
        {"egrave", 0xE8}, {"eacute", 0xE9}, {"ecirc", 0xEA}, {"euml", 0xEB}, {"igrave", 0xEC},
        {"iacute", 0xED}, {"icirc", 0xEE}, {"iuml", 0xEF}, {"ntilde", 0xF1}, {"ograve", 0xF2},
        {"oacute", 0xF3}, {"ocirc", 0xF4}, {"otilde", 0xF5}, {"oslash", 0xF8}, {"ugrave", 0xF9},
        {"uacute", 0xFA}, {"ucirc", 0xFB}, {"yacute", 0xFD}, {"yuml", 0xFF}, {"OElig", 0x152},
        {"oelig", 0x153}, {"Scaron", 0x160}, {"scaron", 0x161}, {"Yuml", 0x178}, {"fnof", 0x192}};
    return table;
}

// Numeric references in 0x80..0x9F name windows-1252 characters.
char32_t numeric_entity(std::uint32_t value) {
    if (value == 0 || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) return 0xFFFD;
    if (value >= 0x80 && value <= 0x9F) {
        std::string mapped = utf8::from_windows1252(std::string(1, static_cast<char>(value)));
        if (auto d = utf8::decode(mapped, 0)) return d->cp;
    }
    return value;
}

void append_decoded(std::string& out, std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto amp = text.find('&', pos);
        out.append(text.substr(pos, amp - pos));
        if (amp == std::string_view::npos) break;
        pos = amp + 1;

        if (pos < text.size() && text[pos] == '#') {
            std::size_t p = pos + 1;
            const bool hex = p < text.size() && (text[p] == 'x' || text[p] == 'X');
            if (hex) ++p;
            const std::size_t digits_start = p;
            std::uint64_t value = 0;
            while (p < text.size() && p - digits_start < 8 &&
                   (hex ? std::isxdigit(static_cast<unsigned char>(text[p]))
                        : std::isdigit(static_cast<unsigned char>(text[p])))) {
                value = value * (hex ? 16 : 10) +
                        static_cast<std::uint64_t>(std::isdigit(static_cast<unsigned char>(text[p]))
                                                       ? text[p] - '0'
                                                       : std::tolower(static_cast<unsigned char>(text[p])) - 'a' + 10);
                ++p;
            }
            if (p == digits_start) {
                out.push_back('&');
                continue;
            }
            utf8::append(out, numeric_entity(static_cast<std::uint32_t>(std::min<std::uint64_t>(value, 0x110000))));
            if (p < text.size() && text[p] == ';') ++p;
            pos = p;
            continue;
        }

        std::size_t p = pos;
        while (p < text.size() && p - pos < 32 && std::isalnum(static_cast<unsigned char>(text[p]))) ++p;
        const std::string name(text.substr(pos, p - pos));
        const auto& table = named_entities();
        auto it = table.find(name);
        if (it != table.end() && p < text.size() && text[p] == ';') {
            utf8::append(out, it->second);
            pos = p + 1;
        } else if (it != table.end() &&
                   (name == "amp" || name == "lt" || name == "gt" || name == "quot" || name == "nbsp")) {
            // Legacy form without the semicolon.
            utf8::append(out, it->second);
            pos = p;
        } else {
            out.push_back('&');
        }
    }
}

std::string declared_charset(std::string_view bytes) {
    const std::string_view head = bytes.substr(0, 4096);
    auto pos = ifind(head, "charset", 0);
    while (pos != std::string_view::npos) {
        std::size_t p = pos + 7;
        while (p < head.size() && (head[p] == ' ' || head[p] == '=' || head[p] == '"' || head[p] == '\'')) ++p;
        std::size_t end = p;
        while (end < head.size() && (std::isalnum(static_cast<unsigned char>(head[end])) || head[end] == '-' ||
                                     head[end] == '_' || head[end] == ':')) {
            ++end;
        }
        if (end > p) return lower(head.substr(p, end - p));
        pos = ifind(head, "charset", pos + 7);
    }
    return {};
}

std::string to_utf8(std::string_view bytes) {
    if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
    if (utf8::is_valid(bytes)) return std::string(bytes);

    const std::string charset = declared_charset(bytes);
    if (charset == "iso-8859-1" || charset == "iso8859-1" || charset == "latin1" || charset == "latin-1" ||
        charset == "windows-1252" || charset == "cp1252" || charset == "us-ascii" || charset == "ascii") {
        return utf8::from_windows1252(bytes);
    }
    if (charset == "iso-8859-15" || charset == "latin9") return utf8::from_latin1(bytes);
    if (charset.empty()) throw Error(ErrorCode::html_parse, "document is not valid UTF-8 and declares no charset");
    throw Error(ErrorCode::html_parse, "document is not decodable as declared charset '" + charset + "'");
}

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
};

// Parses the tag starting at `pos` (which points at '<'). Returns the index
// just past '>' or the input size when the tag runs off the end.
std::size_t read_tag(std::string_view s, std::size_t pos, Tag& tag) {
    std::size_t p = pos + 1;
    if (p < s.size() && s[p] == '/') {
        tag.closing = true;
        ++p;
    }
    const std::size_t name_start = p;
    while (p < s.size() && (std::isalnum(static_cast<unsigned char>(s[p])) || s[p] == '-' || s[p] == ':' || s[p] == '_')) {
        ++p;
    }
    tag.name = lower(s.substr(name_start, p - name_start));

    char quote = 0;
    char last = 0;  // last non-whitespace character outside quotes
    while (p < s.size()) {
        const char c = s[p];
        if (quote) {
            if (c == quote) quote = 0;
        } else if ((c == '"' || c == '\'') && last == '=') {
            quote = c;
        } else if (c == '>') {
            tag.self_closing = last == '/';
            return p + 1;
        } else if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f') {
            last = c;
        }
        ++p;
    }
    return s.size();
}

}  // namespace

std::vector<std::string> default_strip_elements() {
    return {"script", "style", "noscript", "nav", "header", "footer", "aside", "form", "iframe"};
}

std::string extract_html(std::string_view bytes, const std::vector<std::string>& strip) {
    const std::string doc = to_utf8(bytes);
    const std::string_view s = doc;
    std::unordered_set<std::string> strip_set;
    for (const auto& name : strip) strip_set.insert(lower(name));
    const auto& blocks = block_elements();

    std::string out;
    out.reserve(s.size() / 2);
    std::string skip_name;  // element being dropped, empty when emitting
    int skip_depth = 0;

    std::size_t pos = 0;
    while (pos < s.size()) {
        if (s[pos] != '<') {
            const auto next = s.find('<', pos);
            const auto text = s.substr(pos, next - pos);
            if (skip_name.empty()) append_decoded(out, text);
            pos = next == std::string_view::npos ? s.size() : next;
            continue;
        }

        if (s.compare(pos, 4, "<!--") == 0) {
            const auto end = s.find("-->", pos + 4);
            pos = end == std::string_view::npos ? s.size() : end + 3;
            continue;
        }
        if (pos + 1 < s.size() && (s[pos + 1] == '!' || s[pos + 1] == '?')) {
            const auto end = s.find('>', pos);
            pos = end == std::string_view::npos ? s.size() : end + 1;
            continue;
        }
        const bool looks_like_tag =
            pos + 1 < s.size() && (std::isalpha(static_cast<unsigned char>(s[pos + 1])) ||
                                   (s[pos + 1] == '/' && pos + 2 < s.size() &&
                                    std::isalpha(static_cast<unsigned char>(s[pos + 2]))));
        if (!looks_like_tag) {
            if (skip_name.empty()) out.push_back('<');
            ++pos;
            continue;
        }

        Tag tag;
        pos = read_tag(s, pos, tag);

        if (!skip_name.empty()) {
            if (tag.name == skip_name && !tag.self_closing) {
                skip_depth += tag.closing ? -1 : 1;
                if (skip_depth == 0) {
                    skip_name.clear();
                    out.push_back(' ');
                }
            }
            continue;
        }

        if (!tag.closing && !tag.self_closing && strip_set.count(tag.name)) {
            out.push_back(' ');
            if (is_raw_text(tag.name)) {
                const auto close = ifind(s, "</" + tag.name, pos);
                if (close == std::string_view::npos) {
                    pos = s.size();
                } else {
                    const auto gt = s.find('>', close);
                    pos = gt == std::string_view::npos ? s.size() : gt + 1;
                }
            } else {
                skip_name = tag.name;
                skip_depth = 1;
            }
            continue;
        }

        if (!tag.closing && is_raw_text(tag.name)) {
            // Kept raw-text element (e.g. title): content is literal text.
            const auto close = ifind(s, "</" + tag.name, pos);
            const auto end = close == std::string_view::npos ? s.size() : close;
            out.push_back(' ');
            if (tag.name == "title" || tag.name == "textarea") append_decoded(out, s.substr(pos, end - pos));
            else out.append(s.substr(pos, end - pos));
            out.push_back(' ');
            if (close == std::string_view::npos) {
                pos = s.size();
            } else {
                const auto gt = s.find('>', close);
                pos = gt == std::string_view::npos ? s.size() : gt + 1;
            }
            continue;
        }

        if (blocks.count(tag.name)) out.push_back(' ');
    }

    const auto first = out.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = out.find_last_not_of(" \t\r\n");
    return out.substr(first, last - first + 1);
}

}  // namespace groundchat::ingest
