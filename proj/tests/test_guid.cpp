#include "ifcmcp/error.hpp"
#include "ifcmcp/guid.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace ifcmcp;

TEST_CASE("guid: encode/decode bijection over 10k values")
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 10000; ++i) {
        Guid g{rng(), rng()};
        std::string s = guid_encode(g);
        REQUIRE(s.size() == 22);
        REQUIRE(is_valid_guid_text(s));
        REQUIRE(guid_decode(s) == g);
        REQUIRE(guid_encode(guid_decode(s)) == s);
    }
}

TEST_CASE("guid: known values")
{
    CHECK(guid_encode(Guid{0, 0}) == "0000000000000000000000");
    CHECK(guid_encode(Guid{~0ull, ~0ull}) == "3$$$$$$$$$$$$$$$$$$$$$");
    const std::string reference = "3UdjywU2L4v9tTcFvuqwGm";
    CHECK(guid_encode(guid_decode(reference)) == reference);
}

TEST_CASE("guid: malformed text is rejected")
{
    CHECK_FALSE(is_valid_guid_text("short"));
    CHECK_FALSE(is_valid_guid_text("4000000000000000000000")); // top char above 3
    CHECK_FALSE(is_valid_guid_text("3UdjywU2L4v9tTcFvuqwG-"));
    CHECK_THROWS_AS(guid_decode("nope"), Error);
}

TEST_CASE("guid: seeded generators repeat, and never hand out an id twice")
{
    auto a = GuidGenerator::seeded(9);
    auto b = GuidGenerator::seeded(9);
    std::set<std::string> seen;
    for (int i = 0; i < 1000; ++i) {
        std::string x = a.fresh();
        CHECK(x == b.fresh());
        CHECK(seen.insert(x).second);
    }
    auto c = GuidGenerator::seeded(9);
    std::string first = GuidGenerator::seeded(9).fresh();
    c.reserve(first);
    CHECK(c.fresh() != first);
}
