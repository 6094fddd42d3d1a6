#pragma once

#include "ifcmcp/json_util.hpp"
#include "ifcmcp/model.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ifcmcp {

inline constexpr std::size_t kMaxQueryBytes = 8 * 1024;
inline constexpr int kMaxExprDepth = 32;
inline constexpr std::uint64_t kQueryStepBudget = 1'000'000;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind { Number, String, Bool, Null, Attribute, Pset, Derived, Unary, Binary };
    Kind kind = Kind::Null;
    double number = 0.0;
    bool boolean = false;
    std::string text; // string literal, attribute/derived name, or pset name
    std::string prop; // pset property
    std::string op;
    std::vector<ExprPtr> operands;
    std::size_t pos = 0;
    std::string source; // original text, used as a column label
};

struct Stage {
    enum class Kind { Filter, Select, Count, Sum, Min, Max, Avg, List, Set, Rename };
    Kind kind = Kind::Filter;
    std::vector<ExprPtr> args;
    ExprPtr target; // set()
    std::string text; // rename() template
    std::size_t pos = 0;
    std::string source;

    bool is_terminal() const { return kind != Kind::Filter; }
    bool is_mutation() const { return kind == Kind::Set || kind == Kind::Rename; }
};

struct QueryProgram {
    std::string selector;
    std::vector<Stage> stages;

    const Stage& terminal() const { return stages.back(); }
    bool is_mutation() const { return terminal().is_mutation(); }
};

/// Parses the pipeline language:
///
///   program  := selector ('|' stage)*
///   selector := IDENT | 'all'
///   stage    := 'filter(' expr ')' | 'select(' expr (',' expr)* ')'
///             | 'count' ['()'] | ('sum'|'min'|'max'|'avg'|'list') '(' expr ')'
///             | 'set(' field ',' expr ')' | 'rename(' STRING ')'
///   field    := '.' IDENT | 'pset(' STRING ')' '.' IDENT | 'pset(' STRING ',' STRING ')'
///
/// Filters come first and exactly one terminal stage ends the pipeline.
/// Throws QueryParseError(position, expected).
QueryProgram parse_query(std::string_view text);

struct QueryResult {
    Json result;
    std::vector<std::string> log;
    std::vector<std::string> changed; // GUIDs touched by a mutation
};

/// Read-only evaluation. Throws InvalidParams for mutation programs,
/// BudgetExceeded, TypeMismatch, UnknownField.
QueryResult eval_query(const IfcModel& model, const QueryProgram& program,
                       std::uint64_t budget = kQueryStepBudget);

/// Runs any program; mutations are applied all-or-nothing.
QueryResult run_query(IfcModel& model, const QueryProgram& program,
                      std::uint64_t budget = kQueryStepBudget);

/// Mutation programs only; returns the changed GUIDs.
std::vector<std::string> mutate_query(IfcModel& model, const QueryProgram& program);

/// Selector resolution: aliases ("walls"), IFC class names or "all".
std::vector<EntityId> select_elements(const IfcModel& model, std::string_view selector);
bool is_known_selector(std::string_view selector);

/// One decimal, half away from zero ("3.0", "2.5").
std::string format_template_number(double v);

/// Derived quantities shared with the scene tools.
std::optional<double> derived_length(const IfcModel& model, EntityId id);
std::optional<double> derived_height(const IfcModel& model, EntityId id);
std::optional<double> derived_area(const IfcModel& model, EntityId id);

} // namespace ifcmcp
