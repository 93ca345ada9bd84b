#include "sdnc/report.hpp"

#include <charconv>
#include <system_error>

namespace sdnc {

std::string format_double(double v) {
    char buf[64];
    const std::to_chars_result res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const std::from_chars_result res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw IoError("not a floating-point value: '" + std::string(s) + "'");
    }
    return v;
}

const char* mode_name(EquivMode mode) {
    switch (mode) {
        case EquivMode::self: return "self";
        case EquivMode::cross: return "cross";
        case EquivMode::paper_restricted: return "paper_restricted";
    }
    return "?";
}

const char* scale_name(ScaleVariant variant) {
    return variant == ScaleVariant::dk ? "dk" : "dv";
}

namespace {

void append_field(std::string& out, std::string_view key, std::string_view value) {
    if (!out.empty()) out += ' ';
    out += key;
    out += '=';
    out += value;
}

void append_config(std::string& out, const EquivConfig& cfg, bool with_enc_len) {
    append_field(out, "mode", mode_name(cfg.mode));
    append_field(out, "seed", std::to_string(cfg.seed));
    append_field(out, "T", std::to_string(cfg.seq_len));
    if (with_enc_len) append_field(out, "S", std::to_string(cfg.enc_len));
    append_field(out, "d_model", std::to_string(cfg.d_model));
    append_field(out, "d_k", std::to_string(cfg.d_k));
    append_field(out, "d_v", std::to_string(cfg.d_v));
    append_field(out, "H", std::to_string(cfg.n_heads));
    append_field(out, "scale", scale_name(cfg.scale_variant));
}

}  // namespace

std::string to_line(const EquivalenceReport& rep) {
    const bool cross = rep.config.mode == EquivMode::cross;
    std::string out;
    append_field(out, "check", cross ? "cross_equivalence" : "self_equivalence");
    append_config(out, rep.config, cross);
    append_field(out, "tol", format_double(rep.config.tol));
    append_field(out, "max_abs_diff", format_double(rep.max_abs_diff));
    append_field(out, "passed", rep.passed ? "true" : "false");
    return out;
}

std::string to_line(const GradCheckReport& rep) {
    std::string out;
    append_field(out, "check", "gradcheck");
    append_config(out, rep.config, false);
    append_field(out, "eps", format_double(rep.eps));
    append_field(out, "threshold", format_double(rep.threshold));
    append_field(out, "probes", std::to_string(rep.probes));
    append_field(out, "max_rel_err", format_double(rep.max_rel_err));
    append_field(out, "worst", rep.worst_parameter);
    append_field(out, "passed", rep.passed ? "true" : "false");
    return out;
}

const std::string& ParsedLine::get(std::string_view key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) return v;
    }
    throw IoError("report line is missing field '" + std::string(key) + "'");
}

bool ParsedLine::has(std::string_view key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) return true;
    }
    return false;
}

ParsedLine parse_report_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
        line.remove_suffix(1);
    }
    ParsedLine parsed;
    std::size_t pos = 0;
    while (pos < line.size()) {
        std::size_t end = line.find(' ', pos);
        if (end == std::string_view::npos) end = line.size();
        const std::string_view token = line.substr(pos, end - pos);
        if (!token.empty()) {
            const std::size_t eq = token.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                throw IoError("malformed report token: '" + std::string(token) + "'");
            }
            parsed.fields.emplace_back(std::string(token.substr(0, eq)),
                                       std::string(token.substr(eq + 1)));
        }
        pos = end + 1;
    }
    if (parsed.fields.empty()) throw IoError("empty report line");
    return parsed;
}

}  // namespace sdnc
