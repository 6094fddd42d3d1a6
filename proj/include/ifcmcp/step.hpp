#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ifcmcp {

using EntityId = std::uint64_t;

/// One attribute value of a STEP record.
///
/// Strings are held decoded (UTF-8); the STEP escape forms are applied only by
/// the reader and writer.
class StepValue {
public:
    using List = std::vector<StepValue>;

    struct Unset {
        bool operator==(const Unset&) const = default;
    };
    struct Derived {
        bool operator==(const Derived&) const = default;
    };
    struct Enum {
        std::string name;
        bool operator==(const Enum&) const = default;
    };
    struct Ref {
        EntityId id = 0;
        bool operator==(const Ref&) const = default;
    };
    /// `IFCLABEL('x')`: a defined-type wrapper around exactly one value.
    struct Typed {
        std::string type_name;
        List inner;
        bool operator==(const Typed&) const = default;
    };

    using Storage = std::variant<Unset, Derived, bool, std::int64_t, double, std::string, Enum, Ref,
                                 Typed, List>;

    StepValue() = default;
    StepValue(Storage storage) : storage_(std::move(storage)) {}

    static StepValue unset() { return StepValue{Unset{}}; }
    static StepValue derived() { return StepValue{Derived{}}; }
    static StepValue boolean(bool b) { return StepValue{b}; }
    static StepValue integer(std::int64_t i) { return StepValue{i}; }
    static StepValue real(double d) { return StepValue{d}; }
    static StepValue string(std::string s) { return StepValue{std::move(s)}; }
    static StepValue enumeration(std::string name) { return StepValue{Enum{std::move(name)}}; }
    static StepValue ref(EntityId id) { return StepValue{Ref{id}}; }
    static StepValue typed(std::string type_name, StepValue inner);
    static StepValue list(List items) { return StepValue{std::move(items)}; }
    static StepValue reals(std::initializer_list<double> values);
    static StepValue refs(const std::vector<EntityId>& ids);

    const Storage& storage() const noexcept { return storage_; }

    bool is_unset() const noexcept { return std::holds_alternative<Unset>(storage_); }
    bool is_ref() const noexcept { return std::holds_alternative<Ref>(storage_); }
    bool is_list() const noexcept { return std::holds_alternative<List>(storage_); }
    bool is_string() const noexcept { return std::holds_alternative<std::string>(storage_); }
    bool is_number() const noexcept
    {
        return std::holds_alternative<double>(storage_) ||
               std::holds_alternative<std::int64_t>(storage_);
    }
    bool is_typed() const noexcept { return std::holds_alternative<Typed>(storage_); }
    bool is_enum() const noexcept { return std::holds_alternative<Enum>(storage_); }

    std::optional<EntityId> as_ref() const;
    const List* as_list() const;
    List* as_list();
    const std::string* as_string() const;
    std::optional<double> as_number() const;
    const Enum* as_enum() const;
    const Typed* as_typed() const;

    bool operator==(const StepValue&) const = default;

private:
    Storage storage_;
};

struct EntityInstance {
    EntityId id = 0;
    std::string class_name;
    std::vector<StepValue> attributes;

    const StepValue& attr(std::size_t index) const;

    bool operator==(const EntityInstance&) const = default;
};

struct StepHeader {
    std::vector<std::string> description{"ViewDefinition [CoordinationView]"};
    std::string implementation_level = "2;1";
    std::string name;
    std::string time_stamp;
    std::vector<std::string> author{""};
    std::vector<std::string> organization{""};
    std::string preprocessor_version;
    std::string originating_system;
    std::string authorization;
    std::vector<std::string> schema{"IFC4"};

    bool operator==(const StepHeader&) const = default;
};

using EntityMap = std::map<EntityId, EntityInstance>;

struct StepFile {
    StepHeader header;
    EntityMap entities;
};

/// Parses an ISO 10303-21 exchange file.
///
/// Throws SyntaxError on malformed input, DuplicateId when a record id
/// repeats, and DanglingRef (after the full pass) for unresolved references.
StepFile parse_step(std::string_view text);

/// Serializes deterministically: entities in ascending id order, reals in
/// shortest form of at most 15 significant digits.
std::string write_step(const StepHeader& header, const EntityMap& entities);

/// Formats a real the way the writer does (`3.`, `0.25`, `1.E-06`).
std::string format_step_real(double value);

/// Encodes UTF-8 text as a quoted STEP string literal.
std::string encode_step_string(std::string_view utf8);

/// Every referenced id that has no record in `entities`, ascending.
std::vector<EntityId> find_dangling_refs(const EntityMap& entities);

void collect_refs(const StepValue& value, std::vector<EntityId>& out);

} // namespace ifcmcp
