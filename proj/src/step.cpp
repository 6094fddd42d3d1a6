#include "ifcmcp/step.hpp"

#include "ifcmcp/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace ifcmcp {

// ---------------------------------------------------------------------------
// StepValue

StepValue StepValue::typed(std::string type_name, StepValue inner)
{
    return StepValue{Typed{std::move(type_name), List{std::move(inner)}}};
}

StepValue StepValue::reals(std::initializer_list<double> values)
{
    List items;
    items.reserve(values.size());
    for (double v : values)
        items.push_back(StepValue::real(v));
    return StepValue{std::move(items)};
}

StepValue StepValue::refs(const std::vector<EntityId>& ids)
{
    List items;
    items.reserve(ids.size());
    for (EntityId id : ids)
        items.push_back(StepValue::ref(id));
    return StepValue{std::move(items)};
}

std::optional<EntityId> StepValue::as_ref() const
{
    if (const auto* r = std::get_if<Ref>(&storage_))
        return r->id;
    return std::nullopt;
}

const StepValue::List* StepValue::as_list() const { return std::get_if<List>(&storage_); }
StepValue::List* StepValue::as_list() { return std::get_if<List>(&storage_); }
const std::string* StepValue::as_string() const { return std::get_if<std::string>(&storage_); }
const StepValue::Enum* StepValue::as_enum() const { return std::get_if<Enum>(&storage_); }
const StepValue::Typed* StepValue::as_typed() const { return std::get_if<Typed>(&storage_); }

std::optional<double> StepValue::as_number() const
{
    if (const auto* d = std::get_if<double>(&storage_))
        return *d;
    if (const auto* i = std::get_if<std::int64_t>(&storage_))
        return static_cast<double>(*i);
    return std::nullopt;
}

const StepValue& EntityInstance::attr(std::size_t index) const
{
    static const StepValue unset_value = StepValue::unset();
    return index < attributes.size() ? attributes[index] : unset_value;
}

void collect_refs(const StepValue& value, std::vector<EntityId>& out)
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, StepValue::Ref>) {
                out.push_back(v.id);
            } else if constexpr (std::is_same_v<T, StepValue::List>) {
                for (const auto& item : v)
                    collect_refs(item, out);
            } else if constexpr (std::is_same_v<T, StepValue::Typed>) {
                for (const auto& item : v.inner)
                    collect_refs(item, out);
            }
        },
        value.storage());
}

std::vector<EntityId> find_dangling_refs(const EntityMap& entities)
{
    std::set<EntityId> dangling;
    std::vector<EntityId> refs;
    for (const auto& [id, entity] : entities) {
        refs.clear();
        for (const auto& a : entity.attributes)
            collect_refs(a, refs);
        for (EntityId r : refs)
            if (!entities.contains(r))
                dangling.insert(r);
    }
    return {dangling.begin(), dangling.end()};
}

// ---------------------------------------------------------------------------
// String escapes

namespace {

void append_utf8(std::string& out, std::uint32_t cp)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Decodes one code point; invalid sequences are read as a single Latin-1 byte.
std::uint32_t next_code_point(std::string_view s, std::size_t& i)
{
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char c = byte(i);
    auto continuation = [&](std::size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
    if (c < 0x80) {
        ++i;
        return c;
    }
    if ((c & 0xE0) == 0xC0 && continuation(i + 1)) {
        std::uint32_t cp = ((c & 0x1F) << 6) | (byte(i + 1) & 0x3F);
        i += 2;
        return cp;
    }
    if ((c & 0xF0) == 0xE0 && continuation(i + 1) && continuation(i + 2)) {
        std::uint32_t cp = ((c & 0x0F) << 12) | ((byte(i + 1) & 0x3F) << 6) | (byte(i + 2) & 0x3F);
        i += 3;
        return cp;
    }
    if ((c & 0xF8) == 0xF0 && continuation(i + 1) && continuation(i + 2) && continuation(i + 3)) {
        std::uint32_t cp = ((c & 0x07) << 18) | ((byte(i + 1) & 0x3F) << 12) |
                           ((byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
        i += 4;
        return cp;
    }
    ++i;
    return c;
}

int hex_value(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    return -1;
}

bool read_hex(std::string_view s, std::size_t pos, std::size_t digits, std::uint32_t& out)
{
    if (pos + digits > s.size())
        return false;
    out = 0;
    for (std::size_t k = 0; k < digits; ++k) {
        int h = hex_value(s[pos + k]);
        if (h < 0)
            return false;
        out = (out << 4) | static_cast<std::uint32_t>(h);
    }
    return true;
}

} // namespace

std::string encode_step_string(std::string_view utf8)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out = "'";
    std::size_t i = 0;
    while (i < utf8.size()) {
        unsigned char c = static_cast<unsigned char>(utf8[i]);
        if (c >= 0x20 && c < 0x7F) {
            if (c == '\'')
                out += "''";
            else if (c == '\\')
                out += "\\\\";
            else
                out.push_back(static_cast<char>(c));
            ++i;
            continue;
        }
        // Collect a run of code points needing escapes and emit one block.
        std::vector<std::uint32_t> run;
        while (i < utf8.size()) {
            unsigned char d = static_cast<unsigned char>(utf8[i]);
            if (d >= 0x20 && d < 0x7F)
                break;
            run.push_back(next_code_point(utf8, i));
        }
        bool wide = std::any_of(run.begin(), run.end(), [](std::uint32_t cp) { return cp > 0xFFFF; });
        out += wide ? "\\X4\\" : "\\X2\\";
        int digits = wide ? 8 : 4;
        for (std::uint32_t cp : run)
            for (int shift = (digits - 1) * 4; shift >= 0; shift -= 4)
                out.push_back(hex[(cp >> shift) & 0xF]);
        out += "\\X0\\";
    }
    out += "'";
    return out;
}

namespace {

// `raw` is the literal body with '' already collapsed; applies the backslash
// directives. Returns false on a malformed directive.
bool decode_step_string(std::string_view raw, std::string& out)
{
    std::size_t i = 0;
    while (i < raw.size()) {
        char c = raw[i];
        if (c != '\\') {
            unsigned char u = static_cast<unsigned char>(c);
            if (u >= 0x80)
                append_utf8(out, u); // ISO-8859-1 byte
            else
                out.push_back(c);
            ++i;
            continue;
        }
        std::string_view rest = raw.substr(i);
        if (rest.starts_with("\\\\")) {
            out.push_back('\\');
            i += 2;
        } else if (rest.starts_with("\\X2\\") || rest.starts_with("\\X4\\")) {
            std::size_t digits = rest[2] == '2' ? 4 : 8;
            i += 4;
            std::vector<std::uint32_t> units;
            while (!raw.substr(i).starts_with("\\X0\\")) {
                std::uint32_t v = 0;
                if (!read_hex(raw, i, digits, v))
                    return false;
                units.push_back(v);
                i += digits;
            }
            i += 4;
            for (std::size_t k = 0; k < units.size(); ++k) {
                std::uint32_t u = units[k];
                if (u >= 0xD800 && u <= 0xDBFF && k + 1 < units.size() && units[k + 1] >= 0xDC00 &&
                    units[k + 1] <= 0xDFFF) {
                    u = 0x10000 + ((u - 0xD800) << 10) + (units[k + 1] - 0xDC00);
                    ++k;
                }
                append_utf8(out, u);
            }
        } else if (rest.starts_with("\\X\\")) {
            std::uint32_t v = 0;
            if (!read_hex(raw, i + 3, 2, v))
                return false;
            append_utf8(out, v);
            i += 5;
        } else if (rest.starts_with("\\S\\") && rest.size() >= 4) {
            append_utf8(out, static_cast<unsigned char>(rest[3]) + 0x80u);
            i += 4;
        } else if (rest.size() >= 4 && rest[1] == 'P' && rest[3] == '\\') {
            i += 4; // code page switch; Latin-1 is assumed
        } else {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
    Keyword,
    InstanceName,
    Integer,
    Real,
    String,
    Enumeration,
    Binary,
    Dollar,
    Star,
    LParen,
    RParen,
    Comma,
    Equals,
    Semicolon,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next()
    {
        skip_space_and_comments();
        Token t;
        t.line = line_;
        t.column = column_;
        if (pos_ >= text_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = text_[pos_];
        switch (c) {
        case '$': advance(); t.kind = Tok::Dollar; return t;
        case '*': advance(); t.kind = Tok::Star; return t;
        case '(': advance(); t.kind = Tok::LParen; return t;
        case ')': advance(); t.kind = Tok::RParen; return t;
        case ',': advance(); t.kind = Tok::Comma; return t;
        case '=': advance(); t.kind = Tok::Equals; return t;
        case ';': advance(); t.kind = Tok::Semicolon; return t;
        default: break;
        }
        if (c == '#') {
            advance();
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                advance();
            if (pos_ == start)
                throw SyntaxError(t.line, t.column, "expected digits after '#'");
            t.kind = Tok::InstanceName;
            t.text = std::string(text_.substr(start, pos_ - start));
            return t;
        }
        if (c == '\'') {
            t.kind = Tok::String;
            t.text = lex_string(t);
            return t;
        }
        if (c == '"') {
            advance();
            std::size_t start = pos_;
            while (pos_ < text_.size() && text_[pos_] != '"')
                advance();
            if (pos_ >= text_.size())
                throw SyntaxError(t.line, t.column, "unterminated binary literal");
            t.kind = Tok::Binary;
            t.text = std::string(text_.substr(start, pos_ - start));
            advance();
            return t;
        }
        if (c == '.') {
            advance();
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                advance();
            if (pos_ >= text_.size() || text_[pos_] != '.' || pos_ == start)
                throw SyntaxError(t.line, t.column, "malformed enumeration literal");
            t.kind = Tok::Enumeration;
            t.text = std::string(text_.substr(start, pos_ - start));
            for (auto& ch : t.text)
                ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            advance();
            return t;
        }
        if (c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            lex_number(t);
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '!') {
            std::size_t start = pos_;
            advance();
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                    text_[pos_] == '-'))
                advance();
            t.kind = Tok::Keyword;
            t.text = std::string(text_.substr(start, pos_ - start));
            for (auto& ch : t.text)
                ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            return t;
        }
        throw SyntaxError(t.line, t.column, std::string("unexpected character '") + c + "'");
    }

private:
    void advance()
    {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space_and_comments()
    {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
                std::size_t line = line_, column = column_;
                advance();
                advance();
                while (pos_ + 1 < text_.size() && !(text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                    advance();
                if (pos_ + 1 >= text_.size())
                    throw SyntaxError(line, column, "unterminated comment");
                advance();
                advance();
            } else {
                break;
            }
        }
    }

    std::string lex_string(const Token& t)
    {
        advance();
        std::string raw;
        while (true) {
            if (pos_ >= text_.size())
                throw SyntaxError(t.line, t.column, "unterminated string literal");
            char c = text_[pos_];
            if (c == '\'') {
                if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
                    raw.push_back('\'');
                    advance();
                    advance();
                    continue;
                }
                advance();
                break;
            }
            if (c != '\n' && c != '\r')
                raw.push_back(c);
            advance();
        }
        std::string decoded;
        if (!decode_step_string(raw, decoded))
            throw SyntaxError(t.line, t.column, "malformed escape sequence in string literal");
        return decoded;
    }

    void lex_number(Token& t)
    {
        std::size_t start = pos_;
        if (text_[pos_] == '+' || text_[pos_] == '-')
            advance();
        std::size_t digits_start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            advance();
        if (pos_ == digits_start)
            throw SyntaxError(t.line, t.column, "expected digits in numeric literal");
        bool real = false;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            real = true;
            advance();
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                advance();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'E' || text_[pos_] == 'e')) {
            real = true;
            advance();
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
                advance();
            std::size_t exp_start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                advance();
            if (pos_ == exp_start)
                throw SyntaxError(t.line, t.column, "expected exponent digits");
        }
        t.kind = real ? Tok::Real : Tok::Integer;
        t.text = std::string(text_.substr(start, pos_ - start));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    explicit Parser(std::string_view text) : lexer_(text) { current_ = lexer_.next(); }

    StepFile parse()
    {
        StepFile file;
        expect_keyword("ISO-10303-21");
        expect(Tok::Semicolon, "';'");
        expect_keyword("HEADER");
        expect(Tok::Semicolon, "';'");
        bool saw_schema = false;
        while (!(current_.kind == Tok::Keyword && current_.text == "ENDSEC")) {
            Token name = expect(Tok::Keyword, "header entity");
            expect(Tok::LParen, "'('");
            StepValue::List params = parse_params();
            expect(Tok::Semicolon, "';'");
            apply_header(file.header, name, params, saw_schema);
        }
        if (!saw_schema)
            throw SyntaxError(current_.line, current_.column, "missing FILE_SCHEMA header entity");
        advance();
        expect(Tok::Semicolon, "';'");
        expect_keyword("DATA");
        if (current_.kind == Tok::LParen) {
            advance();
            parse_params();
        }
        expect(Tok::Semicolon, "';'");
        while (current_.kind == Tok::InstanceName)
            parse_instance(file.entities);
        expect_keyword("ENDSEC");
        expect(Tok::Semicolon, "';'");
        expect_keyword("END-ISO-10303-21");
        expect(Tok::Semicolon, "';'");
        if (current_.kind != Tok::End)
            throw SyntaxError(current_.line, current_.column, "trailing content after END-ISO-10303-21");
        return file;
    }

private:
    void advance() { current_ = lexer_.next(); }

    Token expect(Tok kind, const char* what)
    {
        if (current_.kind != kind)
            throw SyntaxError(current_.line, current_.column, std::string("expected ") + what);
        Token t = current_;
        advance();
        return t;
    }

    void expect_keyword(const char* keyword)
    {
        if (current_.kind != Tok::Keyword || current_.text != keyword)
            throw SyntaxError(current_.line, current_.column, std::string("expected ") + keyword);
        advance();
    }

    void parse_instance(EntityMap& entities)
    {
        Token name = current_;
        advance();
        EntityId id = 0;
        auto [ptr, ec] = std::from_chars(name.text.data(), name.text.data() + name.text.size(), id);
        if (ec != std::errc{} || id == 0)
            throw SyntaxError(name.line, name.column, "entity id must be a positive integer");
        expect(Tok::Equals, "'='");
        if (current_.kind == Tok::LParen)
            throw SyntaxError(current_.line, current_.column,
                              "complex entity instances are not supported");
        Token cls = expect(Tok::Keyword, "entity class name");
        if (!std::isalpha(static_cast<unsigned char>(cls.text[0])) ||
            cls.text.find('-') != std::string::npos)
            throw SyntaxError(cls.line, cls.column, "invalid entity class name '" + cls.text + "'");
        expect(Tok::LParen, "'('");
        StepValue::List params = parse_params();
        expect(Tok::Semicolon, "';'");
        if (entities.contains(id))
            throw Error(ErrorCode::DuplicateId, "duplicate entity id #" + std::to_string(id));
        entities.emplace(id, EntityInstance{id, cls.text, std::move(params)});
    }

    // Called after '('; consumes the closing ')'.
    StepValue::List parse_params()
    {
        StepValue::List items;
        if (current_.kind == Tok::RParen) {
            advance();
            return items;
        }
        while (true) {
            items.push_back(parse_value());
            if (current_.kind == Tok::Comma) {
                advance();
                continue;
            }
            expect(Tok::RParen, "',' or ')'");
            return items;
        }
    }

    StepValue parse_value()
    {
        if (++depth_ > 256)
            throw SyntaxError(current_.line, current_.column, "nesting too deep");
        StepValue v = parse_value_inner();
        --depth_;
        return v;
    }

    StepValue parse_value_inner()
    {
        Token t = current_;
        switch (t.kind) {
        case Tok::Dollar: advance(); return StepValue::unset();
        case Tok::Star: advance(); return StepValue::derived();
        case Tok::String: advance(); return StepValue::string(t.text);
        case Tok::Binary: advance(); return StepValue::string(t.text);
        case Tok::Enumeration:
            advance();
            if (t.text == "T")
                return StepValue::boolean(true);
            if (t.text == "F")
                return StepValue::boolean(false);
            return StepValue::enumeration(t.text);
        case Tok::InstanceName: {
            advance();
            EntityId id = 0;
            auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), id);
            if (ec != std::errc{} || id == 0)
                throw SyntaxError(t.line, t.column, "entity reference must be positive");
            return StepValue::ref(id);
        }
        case Tok::Integer: {
            advance();
            std::int64_t value = 0;
            const char* begin = t.text.data() + (t.text[0] == '+' ? 1 : 0);
            auto [ptr, ec] = std::from_chars(begin, t.text.data() + t.text.size(), value);
            if (ec != std::errc{})
                throw SyntaxError(t.line, t.column, "integer out of range");
            return StepValue::integer(value);
        }
        case Tok::Real: {
            advance();
            return StepValue::real(std::strtod(t.text.c_str(), nullptr));
        }
        case Tok::LParen: {
            advance();
            return StepValue::list(parse_params());
        }
        case Tok::Keyword: {
            advance();
            expect(Tok::LParen, "'(' after type name");
            StepValue::List inner = parse_params();
            return StepValue{StepValue::Typed{t.text, std::move(inner)}};
        }
        default:
            throw SyntaxError(t.line, t.column, "expected a parameter value");
        }
    }

    static std::string text_of(const StepValue& v)
    {
        if (const auto* s = v.as_string())
            return *s;
        return {};
    }

    static std::vector<std::string> strings_of(const StepValue& v)
    {
        std::vector<std::string> out;
        if (const auto* list = v.as_list())
            for (const auto& item : *list)
                out.push_back(text_of(item));
        else if (v.is_string())
            out.push_back(text_of(v));
        return out;
    }

    void apply_header(StepHeader& header, const Token& name, const StepValue::List& p,
                      bool& saw_schema)
    {
        auto at = [&](std::size_t i) -> const StepValue& {
            static const StepValue unset = StepValue::unset();
            return i < p.size() ? p[i] : unset;
        };
        if (name.text == "FILE_DESCRIPTION") {
            header.description = strings_of(at(0));
            header.implementation_level = text_of(at(1));
        } else if (name.text == "FILE_NAME") {
            header.name = text_of(at(0));
            header.time_stamp = text_of(at(1));
            header.author = strings_of(at(2));
            header.organization = strings_of(at(3));
            header.preprocessor_version = text_of(at(4));
            header.originating_system = text_of(at(5));
            header.authorization = text_of(at(6));
        } else if (name.text == "FILE_SCHEMA") {
            header.schema = strings_of(at(0));
            if (header.schema.size() != 1)
                throw SyntaxError(name.line, name.column,
                                  "exactly one schema identifier is required");
            saw_schema = true;
        }
    }

    Lexer lexer_;
    Token current_;
    int depth_ = 0;
};

// ---------------------------------------------------------------------------
// Writer

void write_value(std::string& out, const StepValue& value)
{
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, StepValue::Unset>) {
                out.push_back('$');
            } else if constexpr (std::is_same_v<T, StepValue::Derived>) {
                out.push_back('*');
            } else if constexpr (std::is_same_v<T, bool>) {
                out += v ? ".T." : ".F.";
            } else if constexpr (std::is_same_v<T, std::int64_t>) {
                out += std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
                out += format_step_real(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
                out += encode_step_string(v);
            } else if constexpr (std::is_same_v<T, StepValue::Enum>) {
                out.push_back('.');
                out += v.name;
                out.push_back('.');
            } else if constexpr (std::is_same_v<T, StepValue::Ref>) {
                out.push_back('#');
                out += std::to_string(v.id);
            } else if constexpr (std::is_same_v<T, StepValue::Typed>) {
                out += v.type_name;
                out.push_back('(');
                for (std::size_t i = 0; i < v.inner.size(); ++i) {
                    if (i)
                        out.push_back(',');
                    write_value(out, v.inner[i]);
                }
                out.push_back(')');
            } else if constexpr (std::is_same_v<T, StepValue::List>) {
                out.push_back('(');
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i)
                        out.push_back(',');
                    write_value(out, v[i]);
                }
                out.push_back(')');
            }
        },
        value.storage());
}

std::string string_list(const std::vector<std::string>& items)
{
    std::string out = "(";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out.push_back(',');
        out += encode_step_string(items[i]);
    }
    out.push_back(')');
    return out;
}

} // namespace

std::string format_step_real(double value)
{
    if (!std::isfinite(value))
        throw Error(ErrorCode::InvalidParams, "non-finite real cannot be written to STEP");
    if (value == 0.0)
        return std::signbit(value) ? "-0." : "0.";

    // Shortest precision (at most 15 significant digits) that reads back exactly.
    char buf[64];
    int precision = 15;
    for (int p = 1; p <= 15; ++p) {
        std::snprintf(buf, sizeof buf, "%.*e", p - 1, value);
        if (std::strtod(buf, nullptr) == value) {
            precision = p;
            break;
        }
    }
    std::snprintf(buf, sizeof buf, "%.*e", precision - 1, value);
    std::string sci = buf;
    auto e_pos = sci.find('e');
    int exponent = std::atoi(sci.c_str() + e_pos + 1);

    // Values that need more than 15 digits end up with padding zeros.
    auto trim = [](std::string t) {
        if (t.find('.') != std::string::npos)
            while (t.back() == '0')
                t.pop_back();
        return t;
    };
    std::string out;
    if (exponent >= -5 && exponent < 15) {
        int decimals = std::max(0, precision - 1 - exponent);
        std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
        out = trim(buf);
        if (out.find('.') == std::string::npos)
            out.push_back('.');
    } else {
        std::string mantissa = trim(sci.substr(0, e_pos));
        if (mantissa.find('.') == std::string::npos)
            mantissa.push_back('.');
        std::snprintf(buf, sizeof buf, "E%c%02d", exponent < 0 ? '-' : '+', std::abs(exponent));
        out = mantissa + buf;
    }
    return out;
}

StepFile parse_step(std::string_view text)
{
    Parser parser(text);
    StepFile file = parser.parse();
    auto dangling = find_dangling_refs(file.entities);
    if (!dangling.empty())
        throw Error(ErrorCode::DanglingRef,
                    "unresolved entity reference #" + std::to_string(dangling.front()));
    return file;
}

std::string write_step(const StepHeader& header, const EntityMap& entities)
{
    auto dangling = find_dangling_refs(entities);
    if (!dangling.empty())
        throw Error(ErrorCode::DanglingRef,
                    "unresolved entity reference #" + std::to_string(dangling.front()));

    std::string out;
    out += "ISO-10303-21;\nHEADER;\n";
    out += "FILE_DESCRIPTION(" + string_list(header.description) + "," +
           encode_step_string(header.implementation_level) + ");\n";
    out += "FILE_NAME(" + encode_step_string(header.name) + "," +
           encode_step_string(header.time_stamp) + "," + string_list(header.author) + "," +
           string_list(header.organization) + "," + encode_step_string(header.preprocessor_version) +
           "," + encode_step_string(header.originating_system) + "," +
           encode_step_string(header.authorization) + ");\n";
    out += "FILE_SCHEMA(" + string_list(header.schema) + ");\n";
    out += "ENDSEC;\nDATA;\n";
    for (const auto& [id, entity] : entities) {
        out.push_back('#');
        out += std::to_string(id);
        out.push_back('=');
        out += entity.class_name;
        out.push_back('(');
        for (std::size_t i = 0; i < entity.attributes.size(); ++i) {
            if (i)
                out.push_back(',');
            write_value(out, entity.attributes[i]);
        }
        out += ");\n";
    }
    out += "ENDSEC;\nEND-ISO-10303-21;\n";
    return out;
}

} // namespace ifcmcp
