#include "ifcmcp/error.hpp"
#include "ifcmcp/step.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

using namespace ifcmcp;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kMinimal = "ISO-10303-21;\nHEADER;\nFILE_DESCRIPTION((''),'2;1');\n"
                       "FILE_NAME('','',(''),(''),'','','');\nFILE_SCHEMA(('IFC4'));\nENDSEC;\nDATA;\n";

std::string wrap(const std::string& data)
{
    return std::string(kMinimal) + data + "ENDSEC;\nEND-ISO-10303-21;\n";
}

} // namespace

TEST_CASE("step: every fixture is a write/parse/write fixpoint")
{
    auto dir = std::filesystem::path(IFCMCP_SOURCE_ROOT) / "tests" / "fixtures";
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".ifc")
            continue;
        ++seen;
        CAPTURE(entry.path().filename().string());
        std::string text = slurp(entry.path());
        StepFile f = parse_step(text);
        std::regex record(R"((^|\n)\s*#\d+\s*=)");
        auto n = std::distance(std::sregex_iterator(text.begin(), text.end(), record), std::sregex_iterator());
        CHECK(f.entities.size() == static_cast<std::size_t>(n));
        std::string once = write_step(f.header, f.entities);
        StepFile g = parse_step(once);
        CHECK(g.entities == f.entities);
        CHECK(write_step(g.header, g.entities) == once);
    }
    CHECK(seen >= 5);
}

TEST_CASE("step: string escapes decode to UTF-8")
{
    auto f = parse_step(wrap("#1=IFCLABEL('It''s');\n#2=IFCLABEL('Caf\\X\\E9');\n"
                             "#3=IFCLABEL('\\X2\\00C400DF\\X0\\');\n#4=IFCLABEL('\\X4\\0001F600\\X0\\');\n"
                             "#5=IFCLABEL('a\\\\b');\n"));
    CHECK(*f.entities.at(1).attr(0).as_string() == "It's");
    CHECK(*f.entities.at(2).attr(0).as_string() == "Caf\xC3\xA9");
    CHECK(*f.entities.at(3).attr(0).as_string() == "\xC3\x84\xC3\x9F");
    CHECK(*f.entities.at(4).attr(0).as_string() == "\xF0\x9F\x98\x80");
    CHECK(*f.entities.at(5).attr(0).as_string() == "a\\b");
}

TEST_CASE("step: encode_step_string round-trips arbitrary text")
{
    std::mt19937 rng(3);
    const std::vector<std::string> pieces{"a", "'", "\\", " ", "\xC3\xA9", "\xE2\x80\x93", "\xF0\x9F\x98\x80", "Z", "\n"};
    for (int i = 0; i < 500; ++i) {
        std::string s;
        int n = rng() % 12;
        for (int j = 0; j < n; ++j)
            s += pieces[rng() % pieces.size()];
        auto f = parse_step(wrap("#1=IFCLABEL(" + encode_step_string(s) + ");\n"));
        REQUIRE(*f.entities.at(1).attr(0).as_string() == s);
    }
}

TEST_CASE("step: value kinds")
{
    auto f = parse_step(wrap("#1=IFCX($,*,.T.,.F.,.ELEMENT.,-3,2.5E-1,1.,(1,2),#1,IFCBOOLEAN(.T.),());\n"));
    const auto& a = f.entities.at(1).attributes;
    REQUIRE(a.size() == 12);
    CHECK(a[0].is_unset());
    CHECK(a[1] == StepValue::derived());
    CHECK(a[2] == StepValue::boolean(true));
    CHECK(a[3] == StepValue::boolean(false));
    CHECK(a[4].as_enum()->name == "ELEMENT");
    CHECK(a[5] == StepValue::integer(-3));
    CHECK(*a[6].as_number() == doctest::Approx(0.25));
    CHECK(a[7] == StepValue::real(1.0));
    CHECK(a[8].as_list()->size() == 2);
    CHECK(*a[9].as_ref() == 1);
    CHECK(a[10].as_typed()->type_name == "IFCBOOLEAN");
    CHECK(a[11].as_list()->empty());
}

TEST_CASE("step: real formatting")
{
    CHECK(format_step_real(3.0) == "3.");
    CHECK(format_step_real(0.25) == "0.25");
    CHECK(format_step_real(-0.5) == "-0.5");
    CHECK(format_step_real(0.1 + 0.2) == "0.3");
    CHECK(format_step_real(1e-6) == "1.E-06");
    CHECK(format_step_real(1e20) == "1.E+20");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        double v = d(rng);
        auto f = parse_step(wrap("#1=IFCX(" + format_step_real(v) + ");\n"));
        CHECK(*f.entities.at(1).attr(0).as_number() == doctest::Approx(v).epsilon(1e-14));
    }
}

TEST_CASE("step: errors")
{
    SUBCASE("syntax error carries a position")
    {
        try {
            parse_step(wrap("#1=IFCX(1,;\n"));
            FAIL("expected SyntaxError");
        } catch (const SyntaxError& e) {
            CHECK(e.code() == ErrorCode::SyntaxError);
            CHECK(e.line() == 8);
        }
    }
    SUBCASE("duplicate id")
    {
        try {
            parse_step(wrap("#1=IFCX(1);\n#1=IFCX(2);\n"));
            FAIL("expected DuplicateId");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DuplicateId);
        }
    }
    SUBCASE("dangling reference")
    {
        try {
            parse_step(wrap("#1=IFCX(#9);\n"));
            FAIL("expected DanglingRef");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DanglingRef);
        }
    }
    SUBCASE("missing header")
    {
        CHECK_THROWS_AS(parse_step("ISO-10303-21;\nDATA;\nENDSEC;\nEND-ISO-10303-21;\n"), SyntaxError);
    }
}

TEST_CASE("step: comments and forward references are accepted")
{
    auto f = parse_step(wrap("/* c */#2=IFCX(#1); /* trailing */\n#1=IFCY('/* not a comment */');\n"));
    CHECK(f.entities.size() == 2);
    CHECK(*f.entities.at(1).attr(0).as_string() == "/* not a comment */");
    CHECK(find_dangling_refs(f.entities).empty());
}
