#pragma once

// Machine-readable result lines: space-separated key=value pairs, one record
// per line. Floating-point fields use the shortest decimal rendering that
// round-trips the exact 64-bit value, so parsing a line recovers the numbers
// bit for bit.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sdnc/equivalence.hpp"
#include "sdnc/grad.hpp"

namespace sdnc {

// Shortest decimal string that parses back to exactly v.
std::string format_double(double v);
// Inverse of format_double; accepts any decimal/scientific rendering.
// Throws IoError if s is not exactly one floating-point value.
double parse_double(std::string_view s);

const char* mode_name(EquivMode mode);
const char* scale_name(ScaleVariant variant);

// `check=self_equivalence mode=... seed=... ... max_abs_diff=... passed=...`
// (cross mode adds S=). No trailing newline.
std::string to_line(const EquivalenceReport& rep);
// `check=gradcheck seed=... ... max_rel_err=... worst=... passed=...`
std::string to_line(const GradCheckReport& rep);

struct ParsedLine {
    std::vector<std::pair<std::string, std::string>> fields;  // in line order

    // Value for key, or throws IoError when the key is absent.
    const std::string& get(std::string_view key) const;
    bool has(std::string_view key) const;
};

// Splits a report line back into fields. Tolerates a trailing newline.
ParsedLine parse_report_line(std::string_view line);

}  // namespace sdnc
