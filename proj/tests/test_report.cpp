#include <doctest.h>

#include <bit>
#include <cstdint>
#include <numbers>
#include <vector>

#include "sdnc/report.hpp"

using namespace sdnc;

namespace {

bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

TEST_CASE("format/parse round-trips doubles bit for bit") {
    const std::vector<double> values = {
        0.0,
        -0.0,
        1.0,
        -1.0,
        0.1,
        1.0 / 3.0,
        1e-10,
        1e308,
        5e-324,  // smallest subnormal
        std::numbers::pi,
        0.8456663206148138,
    };
    for (double v : values) {
        CHECK(same_bits(parse_double(format_double(v)), v));
    }
}

TEST_CASE("parse_double rejects anything but one number") {
    CHECK_THROWS_AS(parse_double(""), IoError);
    CHECK_THROWS_AS(parse_double("abc"), IoError);
    CHECK_THROWS_AS(parse_double("1.5x"), IoError);
    CHECK_THROWS_AS(parse_double("1.5 2.5"), IoError);
    CHECK(parse_double("1e-10") == 1e-10);
    CHECK(parse_double("-0.5") == -0.5);
}

TEST_CASE("equivalence report lines parse back exactly") {
    EquivalenceReport rep;
    rep.max_abs_diff = 1.0 / 3.0;  // awkward on purpose
    rep.passed = false;
    rep.config.seq_len = 8;
    rep.config.d_model = 16;
    rep.config.d_k = rep.config.d_v = 8;
    rep.config.n_heads = 2;
    rep.config.seed = 42;
    rep.config.tol = 1e-10;

    const std::string line = to_line(rep);
    const ParsedLine parsed = parse_report_line(line);
    CHECK(parsed.get("check") == "self_equivalence");
    CHECK(parsed.get("mode") == "self");
    CHECK(parsed.get("seed") == "42");
    CHECK(parsed.get("T") == "8");
    CHECK(parsed.get("H") == "2");
    CHECK(parsed.get("scale") == "dk");
    CHECK(parsed.get("passed") == "false");
    CHECK_FALSE(parsed.has("S"));
    CHECK(same_bits(parse_double(parsed.get("max_abs_diff")), 1.0 / 3.0));
    CHECK(same_bits(parse_double(parsed.get("tol")), 1e-10));
}

TEST_CASE("cross-mode lines carry the source length") {
    EquivalenceReport rep;
    rep.passed = true;
    rep.config.mode = EquivMode::cross;
    rep.config.seq_len = 3;
    rep.config.enc_len = 5;
    const ParsedLine parsed = parse_report_line(to_line(rep));
    CHECK(parsed.get("check") == "cross_equivalence");
    CHECK(parsed.get("mode") == "cross");
    CHECK(parsed.get("S") == "5");
    CHECK(parsed.get("passed") == "true");
}

TEST_CASE("gradient report lines include the worst parameter id") {
    GradCheckReport rep;
    rep.max_rel_err = 3.25e-7;
    rep.worst_parameter = "W_Q[1][0,2]";
    rep.eps = 1e-6;
    rep.threshold = 1e-5;
    rep.probes = 88;
    rep.passed = true;
    rep.config.seq_len = 6;
    rep.config.seed = 7;

    const ParsedLine parsed = parse_report_line(to_line(rep));
    CHECK(parsed.get("check") == "gradcheck");
    CHECK(parsed.get("worst") == "W_Q[1][0,2]");
    CHECK(parsed.get("probes") == "88");
    CHECK(same_bits(parse_double(parsed.get("eps")), 1e-6));
    CHECK(same_bits(parse_double(parsed.get("max_rel_err")), 3.25e-7));
}

TEST_CASE("line parsing flags malformed records") {
    CHECK_THROWS_AS(parse_report_line(""), IoError);
    CHECK_THROWS_AS(parse_report_line("   "), IoError);
    CHECK_THROWS_AS(parse_report_line("novalue"), IoError);
    CHECK_THROWS_AS(parse_report_line("=x"), IoError);
    const ParsedLine ok = parse_report_line("a=1 b=two\n");
    CHECK(ok.fields.size() == 2);
    CHECK(ok.get("b") == "two");
    CHECK_THROWS_AS(ok.get("missing"), IoError);
}

TEST_CASE("mode and scale names") {
    CHECK(std::string(mode_name(EquivMode::self)) == "self");
    CHECK(std::string(mode_name(EquivMode::cross)) == "cross");
    CHECK(std::string(mode_name(EquivMode::paper_restricted)) == "paper_restricted");
    CHECK(std::string(scale_name(ScaleVariant::dk)) == "dk");
    CHECK(std::string(scale_name(ScaleVariant::dv)) == "dv");
}
