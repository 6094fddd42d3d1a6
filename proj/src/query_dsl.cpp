#include "ifcmcp/query_dsl.hpp"

#include "ifcmcp/error.hpp"
#include "ifcmcp/representation.hpp"
#include "ifcmcp/scene_query.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace ifcmcp {

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
    enum class Kind { Ident, Number, String, Symbol, End };
    Kind kind = Kind::End;
    std::string text;
    double number = 0.0;
    std::size_t pos = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            if (i_ >= src_.size()) {
                out.push_back({Token::Kind::End, "", 0.0, i_});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    void skip_space()
    {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_])))
            ++i_;
    }

    Token next()
    {
        std::size_t start = i_;
        char c = src_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                ++i_;
            return {Token::Kind::Ident, std::string(src_.substr(start, i_ - start)), 0.0, start};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
            while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_])))
                ++i_;
            if (i_ < src_.size() && src_[i_] == '.') {
                ++i_;
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_])))
                    ++i_;
            }
            if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
                std::size_t save = i_++;
                if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-'))
                    ++i_;
                if (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) {
                    while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_])))
                        ++i_;
                } else {
                    i_ = save;
                }
            }
            std::string text(src_.substr(start, i_ - start));
            return {Token::Kind::Number, text, std::stod(text), start};
        }
        if (c == '"' || c == '\'') {
            ++i_;
            std::string value;
            while (i_ < src_.size() && src_[i_] != c) {
                if (src_[i_] == '\\' && i_ + 1 < src_.size()) {
                    char e = src_[i_ + 1];
                    value += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                    i_ += 2;
                } else {
                    value += src_[i_++];
                }
            }
            if (i_ >= src_.size())
                throw QueryParseError(start, "closing quote");
            ++i_;
            return {Token::Kind::String, value, 0.0, start};
        }
        static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
        for (const char* op : two)
            if (src_.substr(i_, 2) == op) {
                i_ += 2;
                return {Token::Kind::Symbol, op, 0.0, start};
            }
        if (std::string_view("|(),.<>+-*/!").find(c) != std::string_view::npos) {
            ++i_;
            return {Token::Kind::Symbol, std::string(1, c), 0.0, start};
        }
        throw QueryParseError(start, "token");
    }

    std::string_view src_;
    std::size_t i_ = 0;
};

// ---------------------------------------------------------------------------
// Parser

const std::map<std::string, std::vector<std::string>, std::less<>>& selector_aliases()
{
    static const std::map<std::string, std::vector<std::string>, std::less<>> aliases{
        {"walls", {"IFCWALL", "IFCWALLSTANDARDCASE"}},
        {"slabs", {"IFCSLAB"}},
        {"roofs", {"IFCROOF"}},
        {"doors", {"IFCDOOR"}},
        {"windows", {"IFCWINDOW"}},
        {"stairs", {"IFCSTAIR"}},
        {"columns", {"IFCCOLUMN"}},
        {"beams", {"IFCBEAM"}},
        {"members", {"IFCMEMBER"}},
        {"proxies", {"IFCBUILDINGELEMENTPROXY"}},
        {"furnishings", {"IFCFURNISHINGELEMENT"}},
        {"openings", {"IFCOPENINGELEMENT"}},
        {"spaces", {"IFCSPACE"}},
        {"storeys", {"IFCBUILDINGSTOREY"}},
        {"buildings", {"IFCBUILDING"}},
        {"sites", {"IFCSITE"}},
        {"projects", {"IFCPROJECT"}},
        {"products", {}},
        {"types", {}},
    };
    return aliases;
}

const std::set<std::string, std::less<>>& attribute_names()
{
    static const std::set<std::string, std::less<>> names{
        "Name", "Description", "ObjectType", "LongName", "Tag", "GlobalId",
        "PredefinedType", "OverallHeight", "OverallWidth", "Elevation"};
    return names;
}

const std::set<std::string, std::less<>>& derived_names()
{
    static const std::set<std::string, std::less<>> names{
        "area", "length", "height", "thickness", "width", "elevation", "storey",
        "name", "guid", "class", "selected", "visible"};
    return names;
}

class Parser {
public:
    Parser(std::string_view src, std::vector<Token> tokens) : src_(src), tokens_(std::move(tokens)) {}

    QueryProgram program()
    {
        QueryProgram p;
        const Token& sel = peek();
        if (sel.kind != Token::Kind::Ident)
            throw QueryParseError(sel.pos, "selector");
        if (!is_known_selector(sel.text))
            throw QueryParseError(sel.pos, "selector (alias such as 'walls', an IFC class name, or 'all')");
        p.selector = sel.text;
        advance();
        bool terminal = false;
        while (is_symbol("|")) {
            advance();
            if (terminal)
                throw QueryParseError(peek().pos, "end of query after the terminal stage");
            p.stages.push_back(stage());
            terminal = p.stages.back().is_terminal();
        }
        if (peek().kind != Token::Kind::End)
            throw QueryParseError(peek().pos, "'|' or end of query");
        if (!terminal)
            throw QueryParseError(peek().pos,
                                  "terminal stage (count, sum, min, max, avg, list, select, set, rename)");
        return p;
    }

private:
    const Token& peek() const { return tokens_[i_]; }
    const Token& advance() { return tokens_[i_ < tokens_.size() - 1 ? i_++ : i_]; }
    bool is_symbol(std::string_view s) const
    {
        return peek().kind == Token::Kind::Symbol && peek().text == s;
    }
    void expect_symbol(std::string_view s)
    {
        if (!is_symbol(s))
            throw QueryParseError(peek().pos, "'" + std::string(s) + "'");
        advance();
    }
    std::string expect_string()
    {
        if (peek().kind != Token::Kind::String)
            throw QueryParseError(peek().pos, "string literal");
        return advance().text;
    }

    std::size_t end_of_previous() const
    {
        // Source span ends where the next token starts (trimmed).
        std::size_t end = peek().pos;
        while (end > 0 && std::isspace(static_cast<unsigned char>(src_[end - 1])))
            --end;
        return end;
    }

    Stage stage()
    {
        const Token& t = peek();
        if (t.kind != Token::Kind::Ident)
            throw QueryParseError(t.pos, "stage (filter, select, count, sum, min, max, avg, list, set, rename)");
        Stage s;
        s.pos = t.pos;
        std::string name = t.text;
        static const std::map<std::string, Stage::Kind, std::less<>> kinds{
            {"filter", Stage::Kind::Filter}, {"select", Stage::Kind::Select},
            {"count", Stage::Kind::Count},   {"sum", Stage::Kind::Sum},
            {"min", Stage::Kind::Min},       {"max", Stage::Kind::Max},
            {"avg", Stage::Kind::Avg},       {"list", Stage::Kind::List},
            {"set", Stage::Kind::Set},       {"rename", Stage::Kind::Rename}};
        auto it = kinds.find(name);
        if (it == kinds.end())
            throw QueryParseError(t.pos, "stage (filter, select, count, sum, min, max, avg, list, set, rename)");
        s.kind = it->second;
        advance();
        switch (s.kind) {
        case Stage::Kind::Count:
            if (is_symbol("(")) {
                advance();
                expect_symbol(")");
            }
            break;
        case Stage::Kind::Rename:
            expect_symbol("(");
            s.text = expect_string();
            check_template(s.text, s.pos);
            expect_symbol(")");
            break;
        case Stage::Kind::Set:
            expect_symbol("(");
            s.target = field_target();
            expect_symbol(",");
            s.args.push_back(expr(0));
            expect_symbol(")");
            break;
        case Stage::Kind::Select:
            expect_symbol("(");
            s.args.push_back(expr(0));
            while (is_symbol(",")) {
                advance();
                s.args.push_back(expr(0));
            }
            expect_symbol(")");
            break;
        default:
            expect_symbol("(");
            s.args.push_back(expr(0));
            expect_symbol(")");
        }
        s.source = std::string(src_.substr(s.pos, end_of_previous() - s.pos));
        return s;
    }

    static void check_template(const std::string& t, std::size_t pos)
    {
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] == '{') {
                if (i + 1 < t.size() && t[i + 1] == '{') {
                    ++i;
                    continue;
                }
                auto close = t.find('}', i);
                if (close == std::string::npos || close == i + 1)
                    throw QueryParseError(pos, "placeholder of the form {field} in the template");
                i = close;
            } else if (t[i] == '}') {
                if (i + 1 < t.size() && t[i + 1] == '}')
                    ++i;
                else
                    throw QueryParseError(pos, "'}}' for a literal brace in the template");
            }
        }
    }

    ExprPtr field_target()
    {
        std::size_t start = peek().pos;
        if (is_symbol(".") || (peek().kind == Token::Kind::Ident && peek().text == "pset"))
            return field(start, 0);
        throw QueryParseError(start, "attribute (.Name) or property (pset(\"Set\").Prop) to set");
    }

    ExprPtr finish(Expr e, std::size_t start)
    {
        e.pos = start;
        e.source = std::string(src_.substr(start, end_of_previous() - start));
        return std::make_shared<const Expr>(std::move(e));
    }

    ExprPtr field(std::size_t start, int /*depth*/)
    {
        Expr e;
        if (is_symbol(".")) {
            advance();
            if (peek().kind != Token::Kind::Ident)
                throw QueryParseError(peek().pos, "attribute name after '.'");
            e.kind = Expr::Kind::Attribute;
            e.text = advance().text;
            return finish(std::move(e), start);
        }
        advance(); // pset
        expect_symbol("(");
        e.kind = Expr::Kind::Pset;
        e.text = expect_string();
        if (is_symbol(",")) {
            advance();
            e.prop = expect_string();
            expect_symbol(")");
        } else {
            expect_symbol(")");
            expect_symbol(".");
            if (peek().kind != Token::Kind::Ident)
                throw QueryParseError(peek().pos, "property name");
            e.prop = advance().text;
        }
        return finish(std::move(e), start);
    }

    // Precedence climbing: || < && < comparison < additive < multiplicative.
    static int precedence(const std::string& op)
    {
        if (op == "||")
            return 1;
        if (op == "&&")
            return 2;
        if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=")
            return 3;
        if (op == "+" || op == "-")
            return 4;
        if (op == "*" || op == "/")
            return 5;
        return 0;
    }

    ExprPtr expr(int depth, int min_prec = 1)
    {
        if (depth > kMaxExprDepth)
            throw QueryParseError(peek().pos, "expression nested at most 32 levels deep");
        std::size_t start = peek().pos;
        ExprPtr lhs = unary(depth + 1);
        for (;;) {
            if (peek().kind != Token::Kind::Symbol)
                break;
            std::string op = peek().text;
            int prec = precedence(op);
            if (prec == 0 || prec < min_prec)
                break;
            advance();
            ExprPtr rhs = expr(depth + 1, prec + 1);
            if (prec == 3 && peek().kind == Token::Kind::Symbol && precedence(peek().text) == 3)
                throw QueryParseError(peek().pos, "parentheses around chained comparisons");
            Expr e;
            e.kind = Expr::Kind::Binary;
            e.op = op;
            e.operands = {lhs, rhs};
            lhs = finish(std::move(e), start);
        }
        return lhs;
    }

    ExprPtr unary(int depth)
    {
        if (depth > kMaxExprDepth)
            throw QueryParseError(peek().pos, "expression nested at most 32 levels deep");
        std::size_t start = peek().pos;
        if (is_symbol("-") || is_symbol("!")) {
            Expr e;
            e.kind = Expr::Kind::Unary;
            e.op = advance().text;
            e.operands = {unary(depth + 1)};
            return finish(std::move(e), start);
        }
        return primary(depth);
    }

    ExprPtr primary(int depth)
    {
        const Token& t = peek();
        std::size_t start = t.pos;
        Expr e;
        switch (t.kind) {
        case Token::Kind::Number:
            e.kind = Expr::Kind::Number;
            e.number = advance().number;
            return finish(std::move(e), start);
        case Token::Kind::String:
            e.kind = Expr::Kind::String;
            e.text = advance().text;
            return finish(std::move(e), start);
        case Token::Kind::Ident:
            if (t.text == "true" || t.text == "false") {
                e.kind = Expr::Kind::Bool;
                e.boolean = advance().text == "true";
                return finish(std::move(e), start);
            }
            if (t.text == "null") {
                advance();
                e.kind = Expr::Kind::Null;
                return finish(std::move(e), start);
            }
            if (t.text == "pset")
                return field(start, depth);
            e.kind = Expr::Kind::Derived;
            e.text = advance().text;
            if (is_symbol("("))
                throw QueryParseError(peek().pos, "operator or ')' (function calls are not part of the language)");
            return finish(std::move(e), start);
        case Token::Kind::Symbol:
            if (t.text == "(") {
                advance();
                ExprPtr inner = expr(depth + 1);
                expect_symbol(")");
                return inner;
            }
            if (t.text == ".")
                return field(start, depth);
            break;
        case Token::Kind::End:
            break;
        }
        throw QueryParseError(t.pos, "expression");
    }

    std::string_view src_;
    std::vector<Token> tokens_;
    std::size_t i_ = 0;
};

} // namespace

QueryProgram parse_query(std::string_view text)
{
    if (text.size() > kMaxQueryBytes)
        throw QueryParseError(kMaxQueryBytes, "query of at most 8192 bytes");
    Lexer lexer(text);
    Parser parser(text, lexer.run());
    return parser.program();
}

bool is_known_selector(std::string_view selector)
{
    if (selector == "all" || selector_aliases().count(selector))
        return true;
    if (selector.size() <= 3)
        return false;
    std::string upper = step_class_name(selector);
    if (upper.compare(0, 3, "IFC") != 0)
        return false;
    return std::all_of(upper.begin(), upper.end(),
                       [](char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); });
}

std::vector<EntityId> select_elements(const IfcModel& model, std::string_view selector)
{
    if (selector == "all")
        return scene_order(model);
    if (selector == "products")
        return model.products();
    if (selector == "types")
        return model.type_objects();
    std::vector<std::string> classes;
    if (auto it = selector_aliases().find(selector); it != selector_aliases().end())
        classes = it->second;
    else
        classes = {step_class_name(selector)};
    std::vector<EntityId> out;
    for (const auto& cls : classes)
        for (EntityId id : model.ids_of_class(cls))
            if (model.is_rooted(id))
                out.push_back(id);
    if (classes.size() == 1 && classes.front() == "IFCBUILDINGSTOREY")
        return model.storeys();
    std::sort(out.begin(), out.end());
    return out;
}

std::string format_template_number(double v)
{
    double r = std::round(v * 10.0) / 10.0;
    if (r == 0.0)
        r = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", r);
    return buf;
}

std::optional<double> derived_length(const IfcModel& model, EntityId id)
{
    const auto& cls = model.get(id).class_name;
    if (cls == "IFCWALL" || cls == "IFCWALLSTANDARDCASE")
        if (auto axis = wall_axis(model, id))
            return axis->length;
    return std::nullopt;
}

std::optional<double> derived_height(const IfcModel& model, EntityId id)
{
    if (auto depth = extrusion_depth(model, id))
        return depth;
    if (!model.is_product(id))
        return std::nullopt;
    auto mesh = world_mesh(model, id);
    if (mesh.vertices.empty())
        return std::nullopt;
    return mesh_bounds(mesh).size().z;
}

std::optional<double> derived_area(const IfcModel& model, EntityId id)
{
    const auto& cls = model.get(id).class_name;
    if (cls == "IFCWALL" || cls == "IFCWALLSTANDARDCASE") {
        if (auto axis = wall_axis(model, id))
            return axis->length * axis->height;
        return std::nullopt;
    }
    return profile_area(model, id);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

using Value = std::variant<std::monostate, bool, double, std::string>;

Json value_json(const Value& v)
{
    return std::visit(
        [](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return nullptr;
            else if constexpr (std::is_same_v<T, double>)
                return std::isfinite(x) ? Json(clean_number(x)) : Json(nullptr);
            else
                return x;
        },
        v);
}

const char* type_name(const Value& v)
{
    switch (v.index()) {
    case 0: return "null";
    case 1: return "boolean";
    case 2: return "number";
    default: return "string";
    }
}

Value from_step(const StepValue& v)
{
    const auto& s = v.storage();
    if (const auto* b = std::get_if<bool>(&s))
        return *b;
    if (auto n = v.as_number())
        return *n;
    if (const auto* str = v.as_string())
        return *str;
    if (const auto* e = v.as_enum())
        return e->name;
    if (const auto* t = v.as_typed(); t && !t->inner.empty())
        return from_step(t->inner.front());
    return std::monostate{};
}

std::optional<std::size_t> attribute_slot(const IfcModel& model, EntityId id, std::string_view name)
{
    const auto& cls = model.get(id).class_name;
    bool type = is_type_class(cls);
    if (name == "GlobalId")
        return 0;
    if (name == "Name")
        return 2;
    if (name == "Description")
        return 3;
    if (is_relationship_class(cls) || cls == "IFCPROPERTYSET")
        return std::nullopt;
    if (name == "ObjectType")
        return type ? std::nullopt : std::optional<std::size_t>(4);
    if (name == "LongName") {
        if (cls == "IFCPROJECT")
            return 5;
        if (is_spatial_class(cls) || cls == "IFCSPACE")
            return 7;
        return std::nullopt;
    }
    if (name == "Elevation")
        return cls == "IFCBUILDINGSTOREY" ? std::optional<std::size_t>(9) : std::nullopt;
    if (is_spatial_class(cls))
        return std::nullopt;
    if (name == "Tag")
        return 7;
    if (cls == "IFCDOOR" || cls == "IFCWINDOW") {
        if (name == "OverallHeight")
            return 8;
        if (name == "OverallWidth")
            return 9;
        if (name == "PredefinedType")
            return 10;
        return std::nullopt;
    }
    if (name == "PredefinedType")
        return type ? 9 : 8;
    return std::nullopt;
}

class Evaluator {
public:
    Evaluator(const IfcModel& model, std::uint64_t budget) : model_(model), budget_(budget) {}

    void tick(std::uint64_t n = 1)
    {
        steps_ += n;
        if (steps_ > budget_)
            throw Error(ErrorCode::BudgetExceeded,
                        "query exceeded the evaluation budget of " + std::to_string(budget_) + " steps");
    }

    Value field(EntityId id, const std::string& name)
    {
        if (name == "name")
            return model_.name_of(id);
        if (name == "guid")
            return model_.guid_of(id);
        if (name == "class")
            return display_class_name(model_.get(id).class_name);
        if (name == "selected")
            return model_.flags(id).selected;
        if (name == "visible")
            return model_.flags(id).visible;
        if (name == "elevation") {
            if (auto e = model_.storey_elevation(id))
                return *e;
            return model_.world_transform(id).t.z;
        }
        if (name == "storey") {
            if (auto s = model_.container_of(id))
                return model_.name_of(*s);
            return std::monostate{};
        }
        auto opt = [](std::optional<double> v) -> Value {
            if (v)
                return *v;
            return std::monostate{};
        };
        if (name == "length")
            return opt(derived_length(model_, id));
        if (name == "height")
            return opt(derived_height(model_, id));
        if (name == "area")
            return opt(derived_area(model_, id));
        if (name == "thickness") {
            const auto& cls = model_.get(id).class_name;
            if (cls == "IFCWALL" || cls == "IFCWALLSTANDARDCASE")
                if (auto axis = wall_axis(model_, id))
                    return axis->thickness;
            if (cls == "IFCSLAB" || cls == "IFCROOF")
                return opt(extrusion_depth(model_, id));
            return std::monostate{};
        }
        if (name == "width") {
            const auto& e = model_.get(id);
            if (e.class_name == "IFCDOOR" || e.class_name == "IFCWINDOW")
                return opt(e.attr(9).as_number());
            return std::monostate{};
        }
        throw Error(ErrorCode::UnknownField, "unknown field '" + name + "'");
    }

    Value attribute(EntityId id, const std::string& name)
    {
        auto slot = attribute_slot(model_, id, name);
        if (!slot)
            return std::monostate{};
        return from_step(model_.get(id).attr(*slot));
    }

    Value eval(const Expr& e, EntityId id)
    {
        tick();
        switch (e.kind) {
        case Expr::Kind::Number: return e.number;
        case Expr::Kind::String: return e.text;
        case Expr::Kind::Bool: return e.boolean;
        case Expr::Kind::Null: return std::monostate{};
        case Expr::Kind::Attribute: return attribute(id, e.text);
        case Expr::Kind::Derived: return field(id, e.text);
        case Expr::Kind::Pset: {
            auto p = model_.property(id, e.text, e.prop);
            if (!p)
                return std::monostate{};
            return from_step(p->value);
        }
        case Expr::Kind::Unary: {
            Value v = eval(*e.operands[0], id);
            if (e.op == "-") {
                if (v.index() == 0)
                    return v;
                if (auto* d = std::get_if<double>(&v))
                    return -*d;
                throw mismatch(e, "unary '-' needs a number, got " + std::string(type_name(v)));
            }
            if (v.index() == 0)
                return true;
            if (auto* b = std::get_if<bool>(&v))
                return !*b;
            throw mismatch(e, "'!' needs a boolean, got " + std::string(type_name(v)));
        }
        case Expr::Kind::Binary: return binary(e, id);
        }
        return std::monostate{};
    }

    static Error mismatch(const Expr& e, const std::string& what)
    {
        return Error(ErrorCode::TypeMismatch, "in '" + e.source + "': " + what);
    }

    static bool truthy(const Expr& e, const Value& v)
    {
        if (v.index() == 0)
            return false;
        if (const auto* b = std::get_if<bool>(&v))
            return *b;
        throw mismatch(e, std::string("expected a boolean, got ") + type_name(v));
    }

    Value binary(const Expr& e, EntityId id)
    {
        const std::string& op = e.op;
        if (op == "&&" || op == "||") {
            bool lhs = truthy(*e.operands[0], eval(*e.operands[0], id));
            if (op == "&&" && !lhs)
                return false;
            if (op == "||" && lhs)
                return true;
            return truthy(*e.operands[1], eval(*e.operands[1], id));
        }
        Value a = eval(*e.operands[0], id);
        Value b = eval(*e.operands[1], id);
        if (op == "==" || op == "!=") {
            bool eq;
            if (a.index() == 2 && b.index() == 2)
                eq = std::get<double>(a) == std::get<double>(b);
            else
                eq = a == b;
            return op == "==" ? eq : !eq;
        }
        if (op == "<" || op == "<=" || op == ">" || op == ">=") {
            if (a.index() == 0 || b.index() == 0)
                return false;
            int cmp;
            if (a.index() == 2 && b.index() == 2) {
                double x = std::get<double>(a), y = std::get<double>(b);
                cmp = x < y ? -1 : x > y ? 1 : 0;
            } else if (a.index() == 3 && b.index() == 3) {
                cmp = std::get<std::string>(a).compare(std::get<std::string>(b));
                cmp = cmp < 0 ? -1 : cmp > 0 ? 1 : 0;
            } else {
                throw mismatch(e, std::string("cannot order ") + type_name(a) + " and " + type_name(b));
            }
            if (op == "<")
                return cmp < 0;
            if (op == "<=")
                return cmp <= 0;
            if (op == ">")
                return cmp > 0;
            return cmp >= 0;
        }
        if (a.index() == 0 || b.index() == 0)
            return std::monostate{};
        if (op == "+" && a.index() == 3 && b.index() == 3)
            return std::get<std::string>(a) + std::get<std::string>(b);
        if (a.index() != 2 || b.index() != 2)
            throw mismatch(e, "'" + op + "' needs numbers, got " + type_name(a) + " and " + type_name(b));
        double x = std::get<double>(a), y = std::get<double>(b);
        if (op == "+")
            return x + y;
        if (op == "-")
            return x - y;
        if (op == "*")
            return x * y;
        if (y == 0.0)
            return std::monostate{};
        return x / y;
    }

    std::string render(const std::string& tmpl, EntityId id)
    {
        std::string out;
        for (std::size_t i = 0; i < tmpl.size(); ++i) {
            char c = tmpl[i];
            if ((c == '{' || c == '}') && i + 1 < tmpl.size() && tmpl[i + 1] == c) {
                out += c;
                ++i;
                continue;
            }
            if (c != '{') {
                out += c;
                continue;
            }
            auto close = tmpl.find('}', i);
            std::string key = tmpl.substr(i + 1, close - i - 1);
            i = close;
            tick();
            Value v = key.front() == '.' ? attribute(id, key.substr(1)) : field(id, key);
            if (auto* d = std::get_if<double>(&v))
                out += format_template_number(*d);
            else if (auto* s = std::get_if<std::string>(&v))
                out += *s;
            else if (auto* b = std::get_if<bool>(&v))
                out += *b ? "true" : "false";
        }
        return out;
    }

private:
    const IfcModel& model_;
    std::uint64_t budget_;
    std::uint64_t steps_ = 0;
};

void check_fields(const Expr& e)
{
    if (e.kind == Expr::Kind::Derived && !derived_names().count(e.text))
        throw Error(ErrorCode::UnknownField, "unknown field '" + e.text + "' (known: area, length, height, "
                                                                          "thickness, width, elevation, "
                                                                          "storey, name, guid, class, "
                                                                          "selected, visible)");
    if (e.kind == Expr::Kind::Attribute && !attribute_names().count(e.text))
        throw Error(ErrorCode::UnknownField, "unknown attribute '." + e.text + "'");
    for (const auto& o : e.operands)
        check_fields(*o);
}

void check_template_fields(const std::string& t)
{
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] != '{')
            continue;
        if (i + 1 < t.size() && t[i + 1] == '{') {
            ++i;
            continue;
        }
        auto close = t.find('}', i);
        std::string key = t.substr(i + 1, close - i - 1);
        if (key.front() == '.' ? !attribute_names().count(key.substr(1)) : !derived_names().count(key))
            throw Error(ErrorCode::UnknownField, "unknown template field '{" + key + "}'");
        i = close;
    }
}

void check_program(const QueryProgram& p)
{
    for (const auto& s : p.stages) {
        for (const auto& a : s.args)
            check_fields(*a);
        if (s.target)
            check_fields(*s.target);
        if (s.kind == Stage::Kind::Rename)
            check_template_fields(s.text);
    }
}

std::vector<EntityId> run_filters(Evaluator& ev, const IfcModel& model, const QueryProgram& p,
                                  std::vector<std::string>& log)
{
    auto ids = select_elements(model, p.selector);
    ev.tick(ids.size());
    log.push_back("selector '" + p.selector + "' matched " + std::to_string(ids.size()) + " element(s)");
    for (const auto& s : p.stages) {
        if (s.kind != Stage::Kind::Filter)
            continue;
        std::vector<EntityId> kept;
        for (EntityId id : ids) {
            Value v = ev.eval(*s.args[0], id);
            if (Evaluator::truthy(*s.args[0], v))
                kept.push_back(id);
        }
        log.push_back(s.source + " kept " + std::to_string(kept.size()) + " of " + std::to_string(ids.size()));
        ids = std::move(kept);
    }
    return ids;
}

std::string describe(const Value& v)
{
    return value_json(v).dump();
}

} // namespace

QueryResult eval_query(const IfcModel& model, const QueryProgram& program, std::uint64_t budget)
{
    if (program.is_mutation())
        throw Error(ErrorCode::InvalidParams, "mutation programs need write access; use run_query");
    check_program(program);
    Evaluator ev(model, budget);
    QueryResult r;
    auto ids = run_filters(ev, model, program, r.log);
    const Stage& t = program.terminal();
    switch (t.kind) {
    case Stage::Kind::Count:
        r.result = ids.size();
        break;
    case Stage::Kind::List: {
        Json arr = Json::array();
        for (EntityId id : ids)
            arr.push_back(value_json(ev.eval(*t.args[0], id)));
        r.result = std::move(arr);
        break;
    }
    case Stage::Kind::Select: {
        Json rows = Json::array();
        for (EntityId id : ids) {
            Json row;
            row["guid"] = model.guid_of(id);
            for (const auto& a : t.args)
                row[a->source] = value_json(ev.eval(*a, id));
            rows.push_back(std::move(row));
        }
        r.result = std::move(rows);
        break;
    }
    default: {
        // sum / min / max / avg over the non-null numeric values.
        std::vector<double> values;
        for (EntityId id : ids) {
            Value v = ev.eval(*t.args[0], id);
            if (v.index() == 0)
                continue;
            if (v.index() != 2)
                throw Evaluator::mismatch(*t.args[0], std::string("aggregation needs numbers, got ") +
                                                          type_name(v));
            values.push_back(std::get<double>(v));
        }
        double acc = 0.0;
        for (double v : values)
            acc += v;
        if (t.kind == Stage::Kind::Sum)
            r.result = clean_number(acc);
        else if (values.empty())
            r.result = nullptr;
        else if (t.kind == Stage::Kind::Avg)
            r.result = clean_number(acc / static_cast<double>(values.size()));
        else if (t.kind == Stage::Kind::Min)
            r.result = clean_number(*std::min_element(values.begin(), values.end()));
        else
            r.result = clean_number(*std::max_element(values.begin(), values.end()));
        r.log.push_back(t.source + " over " + std::to_string(values.size()) + " value(s)");
    }
    }
    r.log.push_back("result: " + r.result.dump());
    return r;
}

QueryResult run_query(IfcModel& model, const QueryProgram& program, std::uint64_t budget)
{
    if (!program.is_mutation())
        return eval_query(model, program, budget);
    check_program(program);
    QueryResult r;
    const Stage& t = program.terminal();

    // Compute every new value before touching the model.
    struct Planned {
        EntityId id;
        Value value;
    };
    std::vector<Planned> plan;
    {
        Evaluator ev(model, budget);
        auto ids = run_filters(ev, model, program, r.log);
        for (EntityId id : ids) {
            Value v = t.kind == Stage::Kind::Rename ? Value(ev.render(t.text, id)) : ev.eval(*t.args[0], id);
            plan.push_back({id, std::move(v)});
        }
    }

    const bool is_attr = t.kind == Stage::Kind::Rename || t.target->kind == Expr::Kind::Attribute;
    const std::string attr = t.kind == Stage::Kind::Rename ? "Name" : is_attr ? t.target->text : "";
    for (const auto& p : plan) {
        const auto& cls = model.get(p.id).class_name;
        bool spatial = is_spatial_class(cls);
        if (is_attr) {
            if (spatial && attr != "Name" && attr != "Description")
                throw Error(ErrorCode::UnknownAttribute,
                            "only Name and Description can be changed on spatial elements by a query");
            if (p.value.index() != 3 && p.value.index() != 0)
                throw Error(ErrorCode::TypeMismatch, "attribute ." + attr + " takes a string, got " +
                                                         std::string(type_name(p.value)));
        } else {
            if (spatial)
                throw Error(ErrorCode::UnknownAttribute, "property edits on spatial elements are not allowed by a query");
            if (p.value.index() == 0)
                throw Error(ErrorCode::TypeMismatch, "property value is null");
        }
    }

    IfcModel backup = model;
    try {
        for (const auto& p : plan) {
            std::string guid = model.guid_of(p.id);
            if (is_attr) {
                StepValue v = p.value.index() == 0 ? StepValue::unset()
                                                   : StepValue::string(std::get<std::string>(p.value));
                auto changes = model.edit_attributes(guid, {{attr, v}});
                for (const auto& c : changes)
                    r.log.push_back(guid + ": " + c.name + " " + step_value_to_json(c.old_value).dump() +
                                    " -> " + step_value_to_json(c.new_value).dump());
            } else {
                StepValue v;
                if (const auto* b = std::get_if<bool>(&p.value))
                    v = StepValue::boolean(*b);
                else if (const auto* d = std::get_if<double>(&p.value))
                    v = StepValue::real(*d);
                else
                    v = StepValue::string(std::get<std::string>(p.value));
                model.add_property_set(guid, PropertySpec{t.target->text, {{t.target->prop, v, std::nullopt}}});
                r.log.push_back(guid + ": " + t.target->text + "." + t.target->prop + " = " + describe(p.value));
            }
            r.changed.push_back(guid);
        }
    } catch (...) {
        model = std::move(backup);
        throw;
    }
    r.result = Json(r.changed);
    r.log.push_back(std::to_string(r.changed.size()) + " element(s) changed");
    return r;
}

std::vector<std::string> mutate_query(IfcModel& model, const QueryProgram& program)
{
    if (!program.is_mutation())
        throw Error(ErrorCode::InvalidParams, "program does not end in set() or rename()");
    return run_query(model, program).changed;
}

} // namespace ifcmcp
