#include "groundchat/ingest.hpp"
#include "groundchat/utf8.hpp"

namespace groundchat::ingest {

std::string normalize(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        const auto d = utf8::decode(raw, pos);
        if (!d) {
            ++pos;  // ill-formed byte: dropped
            continue;
        }
        pos += d->length;
        if (utf8::is_space(d->cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (utf8::is_control(d->cp)) continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        utf8::append(out, d->cp);
    }
    return out;
}

bool is_normalized(std::string_view text) {
    if (!utf8::is_valid(text)) return false;
    if (text.empty()) return true;
    if (text.front() == ' ' || text.back() == ' ') return false;
    char32_t prev = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto d = utf8::decode(text, pos);
        pos += d->length;
        if (d->cp != ' ' && (utf8::is_space(d->cp) || utf8::is_control(d->cp))) return false;
        if (d->cp == ' ' && prev == ' ') return false;
        prev = d->cp;
    }
    return true;
}

}  // namespace groundchat::ingest
