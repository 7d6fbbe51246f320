// Minimal PDF text-layer reader. It does not trust the xref table: objects
// are recovered by scanning the file for "N G obj", which also copes with
// incremental updates (later definitions win) and mildly damaged files.

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "groundchat/error.hpp"
#include "groundchat/ingest.hpp"
#include "groundchat/utf8.hpp"

namespace groundchat::ingest {

namespace {

struct Object;
using Array = std::vector<Object>;
using Dict = std::map<std::string, Object, std::less<>>;

struct Null {};
struct Name {
    std::string value;
};
struct String {
    std::string bytes;
};
struct Ref {
    int num = 0;
    int gen = 0;
};
struct Stream {
    Dict dict;
    std::string raw;
};

struct Object {
    std::variant<Null, bool, double, String, Name, Array, Dict, Ref, std::shared_ptr<Stream>> value;

    template <class T>
    const T* as() const {
        return std::get_if<T>(&value);
    }
};

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::pdf_parse, "PDF could not be read: " + why); }

// --- Lexer -------------------------------------------------------------

bool is_ws(char c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\0'; }
bool is_delim(char c) {
    return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' || c == '}' || c == '/' ||
           c == '%';
}
bool is_regular(char c) { return !is_ws(c) && !is_delim(c); }

struct Token {
    enum Kind { eof, number, name, string, array_open, array_close, dict_open, dict_close, keyword } kind = eof;
    std::string text;
    double num = 0;
    bool integer = false;
};

class Lexer {
public:
    explicit Lexer(std::string_view data, std::size_t pos = 0) : s_(data), pos_(pos) {}

    std::size_t pos() const { return pos_; }
    void seek(std::size_t pos) { pos_ = pos; }
    std::string_view data() const { return s_; }

    void skip_ws() {
        while (pos_ < s_.size()) {
            if (is_ws(s_[pos_])) {
                ++pos_;
            } else if (s_[pos_] == '%') {
                while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') ++pos_;
            } else {
                break;
            }
        }
    }

    Token next() {
        skip_ws();
        Token t;
        if (pos_ >= s_.size()) return t;
        const char c = s_[pos_];
        switch (c) {
            case '[':
                ++pos_;
                t.kind = Token::array_open;
                return t;
            case ']':
                ++pos_;
                t.kind = Token::array_close;
                return t;
            case '{':
            case '}':
            case ')':
                ++pos_;
                t.kind = Token::keyword;
                t.text = std::string(1, c);
                return t;
            case '/':
                ++pos_;
                t.kind = Token::name;
                t.text = read_name();
                return t;
            case '(':
                ++pos_;
                t.kind = Token::string;
                t.text = read_literal();
                return t;
            case '<':
                if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '<') {
                    pos_ += 2;
                    t.kind = Token::dict_open;
                    return t;
                }
                ++pos_;
                t.kind = Token::string;
                t.text = read_hex();
                return t;
            case '>':
                if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '>') {
                    pos_ += 2;
                    t.kind = Token::dict_close;
                    return t;
                }
                ++pos_;
                t.kind = Token::keyword;
                t.text = ">";
                return t;
            default:
                break;
        }
        const std::size_t start = pos_;
        while (pos_ < s_.size() && is_regular(s_[pos_])) ++pos_;
        t.text = std::string(s_.substr(start, pos_ - start));
        if (parse_number(t.text, t.num, t.integer)) {
            t.kind = Token::number;
        } else {
            t.kind = Token::keyword;
        }
        return t;
    }

private:
    static bool parse_number(const std::string& text, double& out, bool& integer) {
        if (text.empty()) return false;
        std::size_t i = 0;
        bool negative = false;
        if (text[i] == '+' || text[i] == '-') {
            negative = text[i] == '-';
            ++i;
        }
        bool digits = false;
        bool dot = false;
        double value = 0;
        double scale = 1;
        for (; i < text.size(); ++i) {
            const char c = text[i];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                digits = true;
                if (dot) {
                    scale /= 10;
                    value += (c - '0') * scale;
                } else {
                    value = value * 10 + (c - '0');
                }
            } else if (c == '.' && !dot) {
                dot = true;
            } else {
                return false;
            }
        }
        if (!digits) return false;
        out = negative ? -value : value;
        integer = !dot;
        return true;
    }

    std::string read_name() {
        std::string out;
        while (pos_ < s_.size() && is_regular(s_[pos_])) {
            if (s_[pos_] == '#' && pos_ + 2 < s_.size() && std::isxdigit(static_cast<unsigned char>(s_[pos_ + 1])) &&
                std::isxdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
                out.push_back(static_cast<char>(std::stoi(std::string(s_.substr(pos_ + 1, 2)), nullptr, 16)));
                pos_ += 3;
            } else {
                out.push_back(s_[pos_++]);
            }
        }
        return out;
    }

    std::string read_literal() {
        std::string out;
        int depth = 1;
        while (pos_ < s_.size()) {
            char c = s_[pos_++];
            if (c == '\\') {
                if (pos_ >= s_.size()) break;
                c = s_[pos_++];
                switch (c) {
                    case 'n': out.push_back('\n'); break;
                    case 'r': out.push_back('\r'); break;
                    case 't': out.push_back('\t'); break;
                    case 'b': out.push_back('\b'); break;
                    case 'f': out.push_back('\f'); break;
                    case '\r':
                        if (pos_ < s_.size() && s_[pos_] == '\n') ++pos_;
                        break;
                    case '\n': break;
                    default:
                        if (c >= '0' && c <= '7') {
                            int value = c - '0';
                            for (int k = 0; k < 2 && pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '7'; ++k) {
                                value = value * 8 + (s_[pos_++] - '0');
                            }
                            out.push_back(static_cast<char>(value & 0xFF));
                        } else {
                            out.push_back(c);
                        }
                }
            } else if (c == '(') {
                ++depth;
                out.push_back(c);
            } else if (c == ')') {
                if (--depth == 0) return out;
                out.push_back(c);
            } else {
                out.push_back(c);
            }
        }
        return out;
    }

    std::string read_hex() {
        std::string out;
        int hi = -1;
        while (pos_ < s_.size() && s_[pos_] != '>') {
            const char c = s_[pos_++];
            if (!std::isxdigit(static_cast<unsigned char>(c))) continue;
            const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                                                       : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
            if (hi < 0) {
                hi = v;
            } else {
                out.push_back(static_cast<char>(hi * 16 + v));
                hi = -1;
            }
        }
        if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
        if (pos_ < s_.size()) ++pos_;
        return out;
    }

    std::string_view s_;
    std::size_t pos_;
};

// --- Object parser -----------------------------------------------------

constexpr int kMaxNesting = 64;

class Parser {
public:
    explicit Parser(Lexer& lexer) : lex_(lexer) {}

    // Parses one object starting with `first`. Integers followed by
    // "G R" become references.
    Object parse(const Token& first, int depth = 0) {
        if (depth > kMaxNesting) corrupt("objects nested too deeply");
        switch (first.kind) {
            case Token::number: {
                if (first.integer) {
                    const auto save = lex_.pos();
                    Token gen = lex_.next();
                    if (gen.kind == Token::number && gen.integer) {
                        Token r = lex_.next();
                        if (r.kind == Token::keyword && r.text == "R") {
                            return Object{Ref{static_cast<int>(first.num), static_cast<int>(gen.num)}};
                        }
                    }
                    lex_.seek(save);
                }
                return Object{first.num};
            }
            case Token::name:
                return Object{Name{first.text}};
            case Token::string:
                return Object{String{first.text}};
            case Token::array_open: {
                Array items;
                for (;;) {
                    Token t = lex_.next();
                    if (t.kind == Token::array_close) break;
                    if (t.kind == Token::eof) corrupt("unterminated array");
                    if (t.kind == Token::keyword && (t.text == "endobj" || t.text == "stream")) corrupt("unterminated array");
                    items.push_back(parse(t, depth + 1));
                }
                return Object{std::move(items)};
            }
            case Token::dict_open: {
                Dict dict;
                for (;;) {
                    Token key = lex_.next();
                    if (key.kind == Token::dict_close) break;
                    if (key.kind != Token::name) corrupt("dictionary key is not a name");
                    Token value = lex_.next();
                    if (value.kind == Token::dict_close) {
                        dict[key.text] = Object{Null{}};
                        break;
                    }
                    if (value.kind == Token::eof) corrupt("unterminated dictionary");
                    dict[key.text] = parse(value, depth + 1);
                }
                return Object{std::move(dict)};
            }
            case Token::keyword:
                if (first.text == "true") return Object{true};
                if (first.text == "false") return Object{false};
                return Object{Null{}};
            default:
                corrupt("unexpected end of data");
        }
    }

private:
    Lexer& lex_;
};

// --- Filters -----------------------------------------------------------

std::optional<std::string> inflate_bytes(std::string_view in, bool raw_deflate) {
    z_stream zs{};
    if (inflateInit2(&zs, raw_deflate ? -MAX_WBITS : MAX_WBITS + 32) != Z_OK) return std::nullopt;
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(in.data()));
    zs.avail_in = static_cast<uInt>(in.size());
    std::string out;
    std::array<char, 16384> buf{};
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        out.append(buf.data(), buf.size() - zs.avail_out);
        if (out.size() > (256u << 20)) {
            rc = Z_MEM_ERROR;
            break;
        }
    } while (rc == Z_OK);
    inflateEnd(&zs);
    // Truncated streams are common; keep whatever decoded cleanly.
    if (rc == Z_STREAM_END || !out.empty()) return out;
    return std::nullopt;
}

std::optional<std::string> ascii_hex(std::string_view in) {
    std::string out;
    int hi = -1;
    for (char c : in) {
        if (c == '>') break;
        if (!std::isxdigit(static_cast<unsigned char>(c))) {
            if (is_ws(c)) continue;
            return std::nullopt;
        }
        const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
        if (hi < 0) {
            hi = v;
        } else {
            out.push_back(static_cast<char>(hi * 16 + v));
            hi = -1;
        }
    }
    if (hi >= 0) out.push_back(static_cast<char>(hi * 16));
    return out;
}

std::optional<std::string> ascii85(std::string_view in) {
    std::string out;
    std::uint32_t tuple = 0;
    int count = 0;
    std::size_t i = 0;
    if (in.substr(0, 2) == "<~") i = 2;
    for (; i < in.size(); ++i) {
        const char c = in[i];
        if (c == '~') break;
        if (is_ws(c)) continue;
        if (c == 'z' && count == 0) {
            out.append(4, '\0');
            continue;
        }
        if (c < '!' || c > 'u') return std::nullopt;
        tuple = tuple * 85 + static_cast<std::uint32_t>(c - '!');
        if (++count == 5) {
            for (int k = 3; k >= 0; --k) out.push_back(static_cast<char>((tuple >> (k * 8)) & 0xFF));
            tuple = 0;
            count = 0;
        }
    }
    if (count > 1) {
        for (int k = count; k < 5; ++k) tuple = tuple * 85 + 84;
        for (int k = 0; k < count - 1; ++k) out.push_back(static_cast<char>((tuple >> ((3 - k) * 8)) & 0xFF));
    }
    return out;
}

std::optional<std::string> run_length(std::string_view in) {
    std::string out;
    std::size_t i = 0;
    while (i < in.size()) {
        const auto len = static_cast<unsigned char>(in[i++]);
        if (len == 128) break;
        if (len < 128) {
            if (i + len + 1 > in.size()) return std::nullopt;
            out.append(in.substr(i, len + 1));
            i += len + 1;
        } else {
            if (i >= in.size()) return std::nullopt;
            out.append(257 - len, in[i++]);
        }
    }
    return out;
}

// --- Document ----------------------------------------------------------

class Document {
public:
    explicit Document(std::string_view bytes) : data_(bytes) {
        const auto header = data_.substr(0, 1024).find("%PDF-");
        if (header == std::string_view::npos) corrupt("missing %PDF header");
        scan(header);
        if (objects_.empty()) corrupt("no objects found (file truncated?)");
        expand_object_streams();
        if (trailer_.count("Encrypt")) corrupt("encrypted documents are not supported");
    }

    const Object* resolve(const Object* obj, int hops = 0) const {
        while (obj && hops < 32) {
            const Ref* ref = obj->as<Ref>();
            if (!ref) return obj;
            auto it = objects_.find(ref->num);
            if (it == objects_.end()) return nullptr;
            obj = &it->second;
            ++hops;
        }
        return nullptr;
    }

    const Dict* dict_of(const Object* obj) const {
        obj = resolve(obj);
        if (!obj) return nullptr;
        if (const Dict* d = obj->as<Dict>()) return d;
        if (const auto* s = obj->as<std::shared_ptr<Stream>>()) return &(*s)->dict;
        return nullptr;
    }

    const Object* get(const Dict& dict, std::string_view key) const {
        auto it = dict.find(key);
        return it == dict.end() ? nullptr : resolve(&it->second);
    }

    std::optional<std::string> name_of(const Dict& dict, std::string_view key) const {
        if (const Object* o = get(dict, key)) {
            if (const Name* n = o->as<Name>()) return n->value;
        }
        return std::nullopt;
    }

    std::optional<double> number_of(const Dict& dict, std::string_view key) const {
        if (const Object* o = get(dict, key)) {
            if (const double* d = o->as<double>()) return *d;
        }
        return std::nullopt;
    }

    // Applies the stream's filter chain. nullopt when a filter is unknown
    // or the data does not decode.
    std::optional<std::string> decode(const Stream& stream) const {
        std::vector<std::string> filters;
        if (const Object* f = get(stream.dict, "Filter")) {
            if (const Name* n = f->as<Name>()) {
                filters.push_back(n->value);
            } else if (const Array* a = f->as<Array>()) {
                for (const auto& item : *a) {
                    if (const Object* r = resolve(&item)) {
                        if (const Name* n = r->as<Name>()) filters.push_back(n->value);
                    }
                }
            }
        }
        std::string data = stream.raw;
        for (const auto& filter : filters) {
            std::optional<std::string> next;
            if (filter == "FlateDecode" || filter == "Fl") {
                next = inflate_bytes(data, false);
                if (!next) next = inflate_bytes(data, true);
            } else if (filter == "ASCIIHexDecode" || filter == "AHx") {
                next = ascii_hex(data);
            } else if (filter == "ASCII85Decode" || filter == "A85") {
                next = ascii85(data);
            } else if (filter == "RunLengthDecode" || filter == "RL") {
                next = run_length(data);
            }
            if (!next) return std::nullopt;
            data = std::move(*next);
        }
        return data;
    }

    // Pages in document order, each paired with its effective resources.
    std::vector<std::pair<const Dict*, const Dict*>> pages() const {
        std::vector<std::pair<const Dict*, const Dict*>> out;
        const Dict* root = nullptr;
        if (const Object* r = get(trailer_, "Root")) root = dict_of(r);
        if (!root) {
            for (const auto& [num, obj] : objects_) {
                const Dict* d = dict_of(&obj);
                if (d && name_of(*d, "Type") == "Catalog") {
                    root = d;
                    break;
                }
            }
        }
        if (root) {
            if (const Object* p = get(*root, "Pages")) {
                std::set<const Dict*> seen;
                walk_pages(dict_of(p), nullptr, out, seen, 0);
            }
        }
        if (out.empty()) {
            for (const auto& [num, obj] : objects_) {
                const Dict* d = dict_of(&obj);
                if (d && name_of(*d, "Type") == "Page") out.emplace_back(d, dict_of(get(*d, "Resources")));
            }
        }
        return out;
    }

private:
    void walk_pages(const Dict* node, const Dict* inherited, std::vector<std::pair<const Dict*, const Dict*>>& out,
                    std::set<const Dict*>& seen, int depth) const {
        if (!node || depth > 64 || !seen.insert(node).second) return;
        const Dict* resources = inherited;
        if (const Object* r = get(*node, "Resources")) {
            if (const Dict* d = dict_of(r)) resources = d;
        }
        if (const Object* kids = get(*node, "Kids")) {
            if (const Array* a = kids->as<Array>()) {
                for (const auto& kid : *a) walk_pages(dict_of(&kid), resources, out, seen, depth + 1);
                return;
            }
        }
        if (name_of(*node, "Type") != "Pages") out.emplace_back(node, resources);
    }

    void scan(std::size_t start) {
        Lexer lex(data_, start);
        Parser parser(lex);
        // Two integers seen immediately before the current token.
        std::optional<int> prev2;
        std::optional<int> prev1;
        for (;;) {
            const std::size_t token_start = lex.pos();
            Token t = lex.next();
            if (t.kind == Token::eof) break;
            if (t.kind == Token::keyword && t.text == "obj" && prev2 && prev1) {
                const int num = *prev2;
                prev2.reset();
                prev1.reset();
                try {
                    read_indirect(lex, parser, num);
                } catch (const Error&) {
                    // Damaged object: resynchronize after its endobj.
                    const auto end = data_.find("endobj", token_start);
                    if (end == std::string_view::npos) break;
                    lex.seek(end + 6);
                }
                continue;
            }
            if (t.kind == Token::keyword && t.text == "trailer") {
                Token d = lex.next();
                if (d.kind == Token::dict_open) {
                    try {
                        Object o = parser.parse(d);
                        if (const Dict* dict = o.as<Dict>()) merge_trailer(*dict);
                    } catch (const Error&) {
                    }
                }
                prev2.reset();
                prev1.reset();
                continue;
            }
            if (t.kind == Token::number && t.integer && t.num >= 0) {
                prev2 = prev1;
                prev1 = static_cast<int>(t.num);
            } else {
                prev2.reset();
                prev1.reset();
            }
        }
    }

    void merge_trailer(const Dict& dict) {
        for (const auto& [k, v] : dict) trailer_[k] = v;
    }

    void read_indirect(Lexer& lex, Parser& parser, int num) {
        Token first = lex.next();
        if (first.kind == Token::eof) corrupt("object " + std::to_string(num) + " is truncated");
        if (first.kind == Token::keyword && first.text == "endobj") {
            objects_[num] = Object{Null{}};
            return;
        }
        Object obj = parser.parse(first);
        const auto after = lex.pos();
        Token t = lex.next();
        if (t.kind == Token::keyword && t.text == "stream") {
            const Dict* dict = obj.as<Dict>();
            if (!dict) corrupt("stream without dictionary");
            auto stream = std::make_shared<Stream>();
            stream->dict = *dict;
            std::size_t begin = lex.pos();
            if (begin < data_.size() && data_[begin] == '\r') ++begin;
            if (begin < data_.size() && data_[begin] == '\n') ++begin;

            std::size_t end = std::string_view::npos;
            auto len_it = dict->find("Length");
            if (len_it != dict->end()) {
                if (const double* len = len_it->second.as<double>()) {
                    const auto candidate = begin + static_cast<std::size_t>(*len);
                    if (*len >= 0 && candidate <= data_.size()) {
                        Lexer probe(data_, candidate);
                        Token e = probe.next();
                        if (e.kind == Token::keyword && e.text == "endstream") end = candidate;
                    }
                }
            }
            std::size_t resume = 0;
            if (end == std::string_view::npos) {
                const auto marker = data_.find("endstream", begin);
                if (marker == std::string_view::npos) corrupt("stream of object " + std::to_string(num) + " is truncated");
                end = marker;
                if (end > begin && data_[end - 1] == '\n') --end;
                if (end > begin && data_[end - 1] == '\r') --end;
                resume = marker + 9;
            } else {
                resume = data_.find("endstream", end) + 9;
            }
            stream->raw = std::string(data_.substr(begin, end - begin));
            lex.seek(resume);
            if (stream->dict.count("Type") && stream->dict.at("Type").as<Name>() &&
                stream->dict.at("Type").as<Name>()->value == "XRef") {
                merge_trailer(stream->dict);
            }
            objects_[num] = Object{std::move(stream)};
            Token e = lex.next();
            if (!(e.kind == Token::keyword && e.text == "endobj")) lex.seek(resume);
            return;
        }
        if (!(t.kind == Token::keyword && t.text == "endobj")) lex.seek(after);
        objects_[num] = std::move(obj);
    }

    void expand_object_streams() {
        std::vector<std::shared_ptr<Stream>> containers;
        for (const auto& [num, obj] : objects_) {
            if (const auto* s = obj.as<std::shared_ptr<Stream>>()) {
                if (name_of((*s)->dict, "Type") == "ObjStm") containers.push_back(*s);
            }
        }
        for (const auto& container : containers) {
            const auto n = number_of(container->dict, "N");
            const auto first = number_of(container->dict, "First");
            if (!n || !first) continue;
            auto data = decode(*container);
            if (!data) continue;
            Lexer header(*data);
            std::vector<std::pair<int, std::size_t>> entries;
            for (int i = 0; i < static_cast<int>(*n); ++i) {
                Token num = header.next();
                Token off = header.next();
                if (num.kind != Token::number || off.kind != Token::number) break;
                entries.emplace_back(static_cast<int>(num.num), static_cast<std::size_t>(off.num));
            }
            for (const auto& [num, offset] : entries) {
                if (objects_.count(num)) continue;
                const std::size_t at = static_cast<std::size_t>(*first) + offset;
                if (at >= data->size()) continue;
                try {
                    Lexer lex(*data, at);
                    Parser parser(lex);
                    objects_[num] = parser.parse(lex.next());
                } catch (const Error&) {
                }
            }
        }
    }

    std::string_view data_;
    std::map<int, Object> objects_;
    Dict trailer_;
};

// --- Fonts -------------------------------------------------------------

char32_t glyph_name_to_unicode(const std::string& name) {
    static const std::unordered_map<std::string, char32_t> table = {
        {"space", ' '}, {"exclam", '!'}, {"quotedbl", '"'}, {"numbersign", '#'}, {"dollar", '$'},
        {"percent", '%'}, {"ampersand", '&'}, {"quotesingle", '\''}, {"quoteright", 0x2019},
        {"quoteleft", 0x2018}, {"parenleft", '('}, {"parenright", ')'}, {"asterisk", '*'}, {"plus", '+'},
        {"comma", ','}, {"hyphen", '-'}, {"period", '.'}, {"slash", '/'}, {"zero", '0'}, {"one", '1'},
        {"two", '2'}, {"three", '3'}, {"four", '4'}, {"five", '5'}, {"six", '6'}, {"seven", '7'},
        {"eight", '8'}, {"nine", '9'}, {"colon", ':'}, {"semicolon", ';'}, {"less", '<'}, {"equal", '='},
        {"greater", '>'}, {"question", '?'}, {"at", '@'}, {"bracketleft", '['}, {"backslash", '\\'},
        {"bracketright", ']'}, {"asciicircum", '^'}, {"underscore", '_'}, {"grave", '`'},
        {"braceleft", '{'}, {"bar", '|'}, {"braceright", '}'}, {"asciitilde", '~'},
        {"quotedblleft", 0x201C}, {"quotedblright", 0x201D}, {"quotedblbase", 0x201E},
        {"quotesinglbase", 0x201A}, {"endash", 0x2013}, {"emdash", 0x2014}, {"bullet", 0x2022},
        {"ellipsis", 0x2026}, {"fi", 0xFB01}, {"fl", 0xFB02}, {"ff", 0xFB00}, {"ffi", 0xFB03},
        {"ffl", 0xFB04}, {"adieresis", 0xE4}, {"odieresis", 0xF6}, {"udieresis", 0xFC},
        {"Adieresis", 0xC4}, {"Odieresis", 0xD6}, {"Udieresis", 0xDC}, {"germandbls", 0xDF},
        {"eacute", 0xE9}, {"egrave", 0xE8}, {"ecircumflex", 0xEA}, {"aacute", 0xE1}, {"agrave", 0xE0},
        {"acircumflex", 0xE2}, {"ccedilla", 0xE7}, {"iacute", 0xED}, {"oacute", 0xF3}, {"uacute", 0xFA},
        {"ntilde", 0xF1}, {"Eacute", 0xC9}, {"degree", 0xB0}, {"section", 0xA7}, {"copyright", 0xA9},
        {"registered", 0xAE}, {"Euro", 0x20AC}, {"minus", 0x2212}, {"nbspace", 0xA0}};
    if (name.size() == 1 && std::isalpha(static_cast<unsigned char>(name[0]))) return static_cast<unsigned char>(name[0]);
    if (auto it = table.find(name); it != table.end()) return it->second;
    auto hex = [](const std::string& s) -> char32_t {
        if (s.empty() || s.size() > 6) return 0;
        for (char c : s) {
            if (!std::isxdigit(static_cast<unsigned char>(c))) return 0;
        }
        return static_cast<char32_t>(std::stoul(s, nullptr, 16));
    };
    if (name.rfind("uni", 0) == 0 && name.size() >= 7) return hex(name.substr(3, 4));
    if (name.rfind("u", 0) == 0 && name.size() >= 5) return hex(name.substr(1));
    return 0;
}

class Font {
public:
    Font() = default;

    Font(const Document& doc, const Dict& dict) {
        const auto subtype = doc.name_of(dict, "Subtype");
        composite_ = subtype == "Type0";
        code_bytes_ = composite_ ? 2 : 1;

        if (!composite_) {
            // Simple fonts: WinAnsi-like base, optionally patched by Differences.
            for (int c = 0; c < 256; ++c) {
                std::string byte(1, static_cast<char>(c));
                auto u = utf8::from_windows1252(byte);
                if (auto d = utf8::decode(u, 0)) base_[c] = d->cp;
            }
            if (const Object* enc = doc.get(dict, "Encoding")) {
                if (const Dict* ed = doc.dict_of(enc)) apply_differences(doc, *ed);
            }
        }
        if (const Object* tu = doc.get(dict, "ToUnicode")) {
            if (const auto* s = tu->as<std::shared_ptr<Stream>>()) {
                if (auto cmap = doc.decode(**s)) parse_cmap(*cmap);
            }
        }
    }

    void decode(std::string_view bytes, std::string& out) const {
        const int width = cmap_bytes_ ? cmap_bytes_ : code_bytes_;
        for (std::size_t i = 0; i + width <= bytes.size(); i += width) {
            std::uint32_t code = 0;
            for (int k = 0; k < width; ++k) code = (code << 8) | static_cast<unsigned char>(bytes[i + k]);
            if (auto it = to_unicode_.find(code); it != to_unicode_.end()) {
                for (char32_t cp : it->second) utf8::append(out, cp);
            } else if (!composite_ && code < 256 && base_[code]) {
                utf8::append(out, base_[code]);
            }
        }
    }

private:
    void apply_differences(const Document& doc, const Dict& enc) {
        const Object* diffs = doc.get(enc, "Differences");
        if (!diffs) return;
        const Array* a = diffs->as<Array>();
        if (!a) return;
        int code = 0;
        for (const auto& item : *a) {
            if (const double* d = item.as<double>()) {
                code = static_cast<int>(*d);
            } else if (const Name* n = item.as<Name>()) {
                if (code >= 0 && code < 256) base_[code] = glyph_name_to_unicode(n->value);
                ++code;
            }
        }
    }

    static std::u32string utf16be_to_u32(const std::string& bytes) {
        std::u32string out;
        for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
            char32_t unit = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
            if (unit >= 0xD800 && unit <= 0xDBFF && i + 3 < bytes.size()) {
                const char32_t low = (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
                if (low >= 0xDC00 && low <= 0xDFFF) {
                    out.push_back(0x10000 + ((unit - 0xD800) << 10) + (low - 0xDC00));
                    i += 2;
                    continue;
                }
            }
            out.push_back(unit);
        }
        if (bytes.size() == 1) out.push_back(static_cast<unsigned char>(bytes[0]));
        return out;
    }

    static std::uint32_t code_value(const std::string& bytes) {
        std::uint32_t v = 0;
        for (unsigned char c : bytes) v = (v << 8) | c;
        return v;
    }

    void parse_cmap(std::string_view data) {
        Lexer lex(data);
        for (;;) {
            Token t = lex.next();
            if (t.kind == Token::eof) break;
            if (t.kind != Token::keyword) continue;
            if (t.text == "begincodespacerange") {
                for (;;) {
                    Token lo = lex.next();
                    if (lo.kind != Token::string) break;
                    lex.next();
                    cmap_bytes_ = std::max(cmap_bytes_, static_cast<int>(lo.text.size()));
                }
            } else if (t.text == "beginbfchar") {
                for (;;) {
                    Token src = lex.next();
                    if (src.kind != Token::string) break;
                    Token dst = lex.next();
                    if (dst.kind == Token::string) to_unicode_[code_value(src.text)] = utf16be_to_u32(dst.text);
                    else if (dst.kind == Token::name) {
                        if (char32_t cp = glyph_name_to_unicode(dst.text)) to_unicode_[code_value(src.text)] = {cp};
                    }
                }
            } else if (t.text == "beginbfrange") {
                for (;;) {
                    Token lo = lex.next();
                    if (lo.kind != Token::string) break;
                    Token hi = lex.next();
                    Token dst = lex.next();
                    const auto first = code_value(lo.text);
                    const auto last = std::min(code_value(hi.text), first + 0xFFFF);
                    if (dst.kind == Token::string) {
                        auto base = utf16be_to_u32(dst.text);
                        for (auto code = first; code <= last && !base.empty(); ++code) {
                            to_unicode_[code] = base;
                            ++base.back();
                        }
                    } else if (dst.kind == Token::array_open) {
                        auto code = first;
                        for (;;) {
                            Token item = lex.next();
                            if (item.kind != Token::string) break;
                            if (code <= last) to_unicode_[code++] = utf16be_to_u32(item.text);
                        }
                    }
                }
            }
        }
    }

    bool composite_ = false;
    int code_bytes_ = 1;
    int cmap_bytes_ = 0;
    std::array<char32_t, 256> base_{};
    std::unordered_map<std::uint32_t, std::u32string> to_unicode_;
};

// --- Content streams ---------------------------------------------------

class TextWriter {
public:
    TextWriter(const Document& doc, std::string& out) : doc_(doc), out_(out) {}

    void run(std::string_view content, const Dict* resources, int depth = 0) {
        if (depth > 8) return;
        Lexer lex(content);
        Parser parser(lex);
        std::vector<Object> operands;
        const Font* font = nullptr;
        double last_y = 0;
        for (;;) {
            Token t = lex.next();
            if (t.kind == Token::eof) break;
            if (t.kind != Token::keyword) {
                try {
                    operands.push_back(parser.parse(t));
                } catch (const Error&) {
                    break;
                }
                continue;
            }
            const std::string& op = t.text;
            if (op == "BI") {
                skip_inline_image(lex);
            } else if (op == "BT") {
                last_y = 0;
            } else if (op == "ET") {
                separate(' ');
            } else if (op == "Tf") {
                if (operands.size() >= 2) {
                    if (const Name* n = operands[operands.size() - 2].as<Name>()) font = font_for(resources, n->value);
                }
            } else if (op == "Tj") {
                if (!operands.empty()) show(font, operands.back());
            } else if (op == "'" || op == "\"") {
                separate('\n');
                if (!operands.empty()) show(font, operands.back());
            } else if (op == "TJ") {
                if (!operands.empty()) {
                    if (const Array* a = operands.back().as<Array>()) {
                        for (const auto& item : *a) {
                            if (const double* d = item.as<double>()) {
                                if (*d < -250) separate(' ');
                            } else {
                                show(font, item);
                            }
                        }
                    }
                }
            } else if (op == "Td" || op == "TD") {
                if (operands.size() >= 2) {
                    const double* ty = operands[operands.size() - 1].as<double>();
                    separate(ty && std::abs(*ty) > 0.01 ? '\n' : ' ');
                }
            } else if (op == "T*") {
                separate('\n');
            } else if (op == "Tm") {
                if (operands.size() >= 6) {
                    const double* y = operands[operands.size() - 1].as<double>();
                    const double ny = y ? *y : 0;
                    separate(std::abs(ny - last_y) > 0.01 ? '\n' : ' ');
                    last_y = ny;
                }
            } else if (op == "Do") {
                if (!operands.empty()) {
                    if (const Name* n = operands.back().as<Name>()) draw_form(resources, n->value, depth);
                }
            }
            operands.clear();
        }
    }

    std::size_t undecodable_streams = 0;

private:
    void separate(char c) {
        if (!out_.empty() && out_.back() != ' ' && out_.back() != '\n') out_.push_back(c);
    }

    void show(const Font* font, const Object& operand) {
        const String* s = operand.as<String>();
        if (!s) return;
        if (font) {
            font->decode(s->bytes, out_);
        } else {
            // No usable font resource: assume a single-byte Latin encoding.
            out_ += utf8::from_windows1252(s->bytes);
        }
    }

    const Font* font_for(const Dict* resources, const std::string& name) {
        if (!resources) return nullptr;
        const Object* fonts = doc_.get(*resources, "Font");
        const Dict* fd = doc_.dict_of(fonts);
        if (!fd) return nullptr;
        const Dict* font_dict = doc_.dict_of(doc_.get(*fd, name));
        if (!font_dict) return nullptr;
        auto it = fonts_.find(font_dict);
        if (it == fonts_.end()) it = fonts_.emplace(font_dict, Font(doc_, *font_dict)).first;
        return &it->second;
    }

    void draw_form(const Dict* resources, const std::string& name, int depth) {
        if (!resources) return;
        const Dict* xobjects = doc_.dict_of(doc_.get(*resources, "XObject"));
        if (!xobjects) return;
        const Object* target = doc_.get(*xobjects, name);
        if (!target) return;
        const auto* stream = target->as<std::shared_ptr<Stream>>();
        if (!stream || doc_.name_of((*stream)->dict, "Subtype") != "Form") return;
        auto content = doc_.decode(**stream);
        if (!content) {
            ++undecodable_streams;
            return;
        }
        const Dict* form_resources = doc_.dict_of(doc_.get((*stream)->dict, "Resources"));
        run(*content, form_resources ? form_resources : resources, depth + 1);
    }

    static void skip_inline_image(Lexer& lex) {
        const std::string_view s = lex.data();
        auto pos = s.find("ID", lex.pos());
        if (pos == std::string_view::npos) {
            lex.seek(s.size());
            return;
        }
        pos += 3;
        for (; pos + 2 <= s.size(); ++pos) {
            if (s[pos] == 'E' && s[pos + 1] == 'I' && pos > 0 && is_ws(s[pos - 1]) &&
                (pos + 2 == s.size() || is_ws(s[pos + 2]))) {
                lex.seek(pos + 2);
                return;
            }
        }
        lex.seek(s.size());
    }

    const Document& doc_;
    std::string& out_;
    std::map<const Dict*, Font> fonts_;
};

}  // namespace

std::string extract_pdf(std::string_view bytes) {
    Document doc(bytes);
    const auto pages = doc.pages();
    if (pages.empty()) corrupt("no pages found");

    std::string out;
    TextWriter writer(doc, out);
    for (const auto& [page, resources] : pages) {
        const Object* contents = doc.get(*page, "Contents");
        std::vector<const Object*> parts;
        if (contents) {
            if (const Array* a = contents->as<Array>()) {
                for (const auto& item : *a) parts.push_back(doc.resolve(&item));
            } else {
                parts.push_back(contents);
            }
        }
        std::string page_content;
        for (const Object* part : parts) {
            if (!part) continue;
            const auto* stream = part->as<std::shared_ptr<Stream>>();
            if (!stream) continue;
            auto decoded = doc.decode(**stream);
            if (!decoded) {
                ++writer.undecodable_streams;
                continue;
            }
            // Content may be split mid-token across streams.
            page_content += *decoded;
            page_content.push_back('\n');
        }
        writer.run(page_content, resources);
        if (!out.empty() && out.back() != '\n') out.push_back('\n');
    }

    const bool has_text = std::any_of(out.begin(), out.end(), [](unsigned char c) { return !std::isspace(c); });
    if (!has_text) {
        if (writer.undecodable_streams > 0) corrupt("page content could not be decoded");
        throw Error(ErrorCode::no_text_layer,
                    "the PDF contains no selectable text (it may be a scan); only PDFs with a text layer can be used");
    }
    return out;
}

}  // namespace groundchat::ingest
