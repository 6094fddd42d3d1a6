#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>

namespace ifcmcp {

/// 128-bit IFC GlobalId value.
struct Guid {
    std::uint64_t high = 0;
    std::uint64_t low = 0;

    bool operator==(const Guid&) const = default;
};

/// The 64-character alphabet used by the compressed IFC GlobalId form.
inline constexpr std::string_view kIfcGuidAlphabet =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_$";

/// 22 characters; the first encodes the top two bits.
std::string guid_encode(const Guid& guid);

/// Throws Error(InvalidGuid) unless `text` is a well-formed 22-character id.
Guid guid_decode(std::string_view text);

bool is_valid_guid_text(std::string_view text) noexcept;

/// Source of fresh GlobalIds. The default instance draws from the system
/// entropy source; a seeded instance yields a reproducible stream for golden
/// files. Either way an id is never handed out twice.
class GuidGenerator {
public:
    GuidGenerator();
    static GuidGenerator seeded(std::uint64_t seed);

    std::string fresh();

    /// Marks ids already present in a loaded model as taken.
    void reserve(std::string_view text);

    bool is_seeded() const noexcept { return seeded_.has_value(); }

private:
    Guid draw();

    std::optional<std::mt19937_64> seeded_;
    std::unordered_set<std::string> issued_;
};

} // namespace ifcmcp
