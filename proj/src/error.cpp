#include "ifcmcp/error.hpp"

namespace ifcmcp {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingRef: return "DanglingRef";
    case ErrorCode::InvalidGuid: return "InvalidGuid";
    case ErrorCode::UnknownGuid: return "UnknownGuid";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::EmptySpec: return "EmptySpec";
    case ErrorCode::CannotDeleteSpatial: return "CannotDeleteSpatial";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::ZeroLengthAxis: return "ZeroLengthAxis";
    case ErrorCode::SlopeOutOfRange: return "SlopeOutOfRange";
    case ErrorCode::SkeletonFailure: return "SkeletonFailure";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnknownStorey: return "UnknownStorey";
    case ErrorCode::WallsNotClosed: return "WallsNotClosed";
    case ErrorCode::OpeningOutOfBounds: return "OpeningOutOfBounds";
    case ErrorCode::ClassNotAllowed: return "ClassNotAllowed";
    case ErrorCode::NotADoor: return "NotADoor";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::StepFailed: return "StepFailed";
    case ErrorCode::GroupDisabled: return "GroupDisabled";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code)
{
}

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& message)
    : Error(ErrorCode::SyntaxError,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line), column_(column)
{
}

QueryParseError::QueryParseError(std::size_t position, const std::string& expected)
    : Error(ErrorCode::ParseError,
            "at position " + std::to_string(position) + ": expected " + expected),
      position_(position), expected_(expected)
{
}

} // namespace ifcmcp
