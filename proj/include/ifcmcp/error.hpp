#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ifcmcp {

enum class ErrorCode {
    SyntaxError,
    DuplicateId,
    DanglingRef,
    InvalidGuid,
    UnknownGuid,
    UnknownAttribute,
    EmptySpec,
    CannotDeleteSpatial,
    DegeneratePolygon,
    NonPositiveDepth,
    EmptyMesh,
    DegenerateFace,
    ZeroLengthAxis,
    SlopeOutOfRange,
    SkeletonFailure,
    InvalidParams,
    UnknownStorey,
    WallsNotClosed,
    OpeningOutOfBounds,
    ClassNotAllowed,
    NotADoor,
    ParseError,
    BudgetExceeded,
    TypeMismatch,
    UnknownField,
    IoError,
    EmptyIndex,
    EmptyModel,
    DuplicateName,
    StepFailed,
    GroupDisabled,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a stable code; the MCP layer
// forwards the code name to clients verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return to_string(code_); }

private:
    ErrorCode code_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t column, const std::string& message);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class QueryParseError : public Error {
public:
    QueryParseError(std::size_t position, const std::string& expected);

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

} // namespace ifcmcp
