#include "ifcmcp/guid.hpp"

#include "ifcmcp/error.hpp"

#include <array>

namespace ifcmcp {

namespace {

int alphabet_index(char c) noexcept
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'A' && c <= 'Z')
        return c - 'A' + 10;
    if (c >= 'a' && c <= 'z')
        return c - 'a' + 36;
    if (c == '_')
        return 62;
    if (c == '$')
        return 63;
    return -1;
}

} // namespace

std::string guid_encode(const Guid& guid)
{
    // Big-endian base-64 over 132 bits: four leading zero bits, then the value.
    std::string out(22, '0');
    std::uint64_t high = guid.high;
    std::uint64_t low = guid.low;
    for (int i = 21; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kIfcGuidAlphabet[low & 63u];
        low = (low >> 6) | (high << 58);
        high >>= 6;
    }
    return out;
}

bool is_valid_guid_text(std::string_view text) noexcept
{
    if (text.size() != 22)
        return false;
    if (text[0] < '0' || text[0] > '3')
        return false;
    for (char c : text)
        if (alphabet_index(c) < 0)
            return false;
    return true;
}

Guid guid_decode(std::string_view text)
{
    if (!is_valid_guid_text(text))
        throw Error(ErrorCode::InvalidGuid, "malformed IFC GlobalId '" + std::string(text) + "'");
    Guid g;
    for (char c : text) {
        auto digit = static_cast<std::uint64_t>(alphabet_index(c));
        g.high = (g.high << 6) | (g.low >> 58);
        g.low = (g.low << 6) | digit;
    }
    return g;
}

GuidGenerator::GuidGenerator() = default;

GuidGenerator GuidGenerator::seeded(std::uint64_t seed)
{
    GuidGenerator gen;
    gen.seeded_.emplace(seed);
    return gen;
}

Guid GuidGenerator::draw()
{
    if (seeded_)
        return Guid{(*seeded_)(), (*seeded_)()};
    // std::random_device reads the kernel CSPRNG on the supported platforms.
    std::random_device device;
    std::array<std::uint64_t, 4> words{};
    for (auto& w : words)
        w = device();
    return Guid{(words[0] << 32) | (words[1] & 0xFFFFFFFFu), (words[2] << 32) | (words[3] & 0xFFFFFFFFu)};
}

std::string GuidGenerator::fresh()
{
    while (true) {
        std::string text = guid_encode(draw());
        if (issued_.insert(text).second)
            return text;
    }
}

void GuidGenerator::reserve(std::string_view text)
{
    issued_.emplace(text);
}

} // namespace ifcmcp
