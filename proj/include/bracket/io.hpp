#pragma once

// Text formats: fixed-precision numbers, angle expressions, CSV streams, JSON
// sidecars and the sweep dataset file.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bracket/error.hpp"
#include "bracket/simshot.hpp"

namespace bracket::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "bracketsim";
inline constexpr const char* kVersion = "1.0.0";

// 12 significant digits; -0 prints as 0 so output does not depend on the sign
// of a zero.
inline std::string format_number(double x) {
    if (x == 0.0) return "0";
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// Shortest representation that reads back to the same double.
inline std::string format_exact(double x) {
    if (x == 0.0) return "0";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::optional<double> try_parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

inline double parse_double(std::string_view s, const std::string& what) {
    auto v = try_parse_double(s);
    if (!v) throw domain_error("invalid number for " + what + ": '" + std::string(s) + "'");
    return *v;
}

// Radians, with pi shorthand: "pi/2", "3pi/4", "3*pi/4", "-pi", "2pi", "0.785".
inline double parse_angle(std::string_view text, const std::string& what = "angle") {
    std::string s;
    for (char c : trim(text)) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    const auto at = s.find("pi");
    if (at == std::string::npos) return parse_double(s, what);
    auto bad = [&] { return domain_error("invalid angle for " + what + ": '" + std::string(text) + "'"); };

    std::string_view head = std::string_view(s).substr(0, at);
    std::string_view tail = std::string_view(s).substr(at + 2);
    head = trim(head);
    if (!head.empty() && head.back() == '*') head = trim(head.substr(0, head.size() - 1));
    double coef = 1.0;
    if (head == "-") {
        coef = -1.0;
    } else if (head == "+" || head.empty()) {
        coef = 1.0;
    } else {
        auto v = try_parse_double(head);
        if (!v) throw bad();
        coef = *v;
    }
    tail = trim(tail);
    double den = 1.0;
    if (!tail.empty()) {
        if (tail.front() != '/') throw bad();
        auto v = try_parse_double(tail.substr(1));
        if (!v || *v == 0.0) throw bad();
        den = *v;
    }
    return coef * std::numbers::pi / den;
}

// Comma-separated list of angles; empty entries are rejected.
inline std::vector<double> parse_angle_list(std::string_view text, const std::string& what) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        if (trim(item).empty()) throw domain_error("empty entry in " + what + " list");
        out.push_back(parse_angle(item, what));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------
// Files

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw io_error("write failed for '" + path.string() + "'");
}

// Writes rows with "\n" line endings; numbers are formatted by the caller or
// with format_number.
class CsvWriter {
public:
    CsvWriter(std::filesystem::path path, std::initializer_list<std::string_view> header)
        : path_(std::move(path)), out_(open_output(path_)) {
        bool first = true;
        for (auto h : header) {
            if (!first) out_ << ',';
            out_ << h;
            first = false;
        }
        out_ << '\n';
    }

    CsvWriter& cell(std::string_view s) {
        if (!at_line_start_) out_ << ',';
        out_ << s;
        at_line_start_ = false;
        return *this;
    }
    CsvWriter& cell(double x) { return cell(format_number(x)); }
    CsvWriter& cell(std::uint64_t x) { return cell(std::to_string(x)); }
    CsvWriter& cell(std::uint32_t x) { return cell(static_cast<std::uint64_t>(x)); }

    void end_row() {
        out_ << '\n';
        at_line_start_ = true;
    }

    void close() { finish_output(out_, path_); }

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool at_line_start_ = true;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
    finish_output(out, path);
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw domain_error("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

// Provenance block: no timestamps or host data, so reruns are byte-identical.
inline json sidecar(const std::string& command, std::uint64_t seed, const json& config) {
    json doc;
    doc["tool"] = kToolName;
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["config"] = config;
    doc["config_hash"] = hex64(fnv1a64(config.dump()));
    return doc;
}

// ---------------------------------------------------------------------------
// Sweep configuration

namespace impl {

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& where) {
    if (!obj.is_object()) throw domain_error(where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw domain_error("unknown key '" + it.key() + "' in " + where);
        }
    }
}

inline double number_field(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    throw domain_error("'" + key + "' must be a number");
}

inline double angle_field(const json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_angle(v.get<std::string>(), key);
    throw domain_error("'" + key + "' must be a number or an angle string");
}

inline std::uint64_t count_field(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw domain_error("'" + key + "' must be a non-negative integer");
}

inline const char* kind_name(simshot::PhaseProfile::Kind k) {
    switch (k) {
    case simshot::PhaseProfile::Kind::distorted: return "distorted";
    case simshot::PhaseProfile::Kind::linear: return "linear";
    case simshot::PhaseProfile::Kind::table: return "table";
    }
    return "distorted";
}

}  // namespace impl

inline json to_json(const simshot::PhaseProfile& p) {
    json j;
    j["kind"] = impl::kind_name(p.kind);
    j["start"] = p.start;
    switch (p.kind) {
    case simshot::PhaseProfile::Kind::distorted:
        j["fringes"] = p.fringes;
        j["distortion"] = p.distortion;
        j["jitter"] = p.jitter;
        break;
    case simshot::PhaseProfile::Kind::linear:
        j["stop"] = p.stop;
        break;
    case simshot::PhaseProfile::Kind::table:
        j.erase("start");
        j["table"] = p.table;
        break;
    }
    return j;
}

inline json to_json(const simshot::SweepConfig& c) {
    json j;
    j["steps"] = c.steps;
    j["shots_per_step"] = c.shots_per_step;
    j["b"] = c.b;
    j["mag"] = c.mag;
    j["tau"] = c.tau;
    j["eta1"] = c.eta1;
    j["eta2"] = c.eta2;
    j["noise"] = c.noise;
    j["seed"] = c.seed;
    j["profile"] = to_json(c.profile);
    return j;
}

inline simshot::PhaseProfile profile_from_json(const json& j) {
    impl::reject_unknown(j, {"kind", "start", "stop", "fringes", "distortion", "jitter", "table"}, "profile");
    simshot::PhaseProfile p;
    const std::string kind = j.contains("kind") ? j.at("kind").get<std::string>() : "distorted";
    if (kind == "distorted") {
        p.kind = simshot::PhaseProfile::Kind::distorted;
    } else if (kind == "linear") {
        p.kind = simshot::PhaseProfile::Kind::linear;
        p.jitter = 0.0;
    } else if (kind == "table") {
        p.kind = simshot::PhaseProfile::Kind::table;
    } else {
        throw domain_error("profile kind must be distorted, linear or table (got '" + kind + "')");
    }
    if (j.contains("start")) p.start = impl::angle_field(j.at("start"), "start");
    if (j.contains("stop")) p.stop = impl::angle_field(j.at("stop"), "stop");
    if (j.contains("fringes")) p.fringes = impl::number_field(j.at("fringes"), "fringes");
    if (j.contains("distortion")) p.distortion = impl::number_field(j.at("distortion"), "distortion");
    if (j.contains("jitter")) p.jitter = impl::number_field(j.at("jitter"), "jitter");
    if (j.contains("table")) {
        if (!j.at("table").is_array()) throw domain_error("'table' must be an array");
        for (const auto& v : j.at("table")) p.table.push_back(impl::angle_field(v, "table"));
    }
    return p;
}

// Missing keys keep their defaults; unknown keys are errors.
inline simshot::SweepConfig sweep_config_from_json(const json& j) {
    impl::reject_unknown(j, {"steps", "shots_per_step", "b", "mag", "tau", "eta1", "eta2", "noise", "seed", "profile"},
                         "sweep config");
    simshot::SweepConfig c;
    if (j.contains("steps")) c.steps = impl::count_field(j.at("steps"), "steps");
    if (j.contains("shots_per_step")) c.shots_per_step = impl::count_field(j.at("shots_per_step"), "shots_per_step");
    if (j.contains("b")) c.b = impl::number_field(j.at("b"), "b");
    if (j.contains("mag")) c.mag = impl::number_field(j.at("mag"), "mag");
    if (j.contains("tau")) c.tau = impl::number_field(j.at("tau"), "tau");
    if (j.contains("eta1")) c.eta1 = impl::number_field(j.at("eta1"), "eta1");
    if (j.contains("eta2")) c.eta2 = impl::number_field(j.at("eta2"), "eta2");
    if (j.contains("noise")) c.noise = impl::number_field(j.at("noise"), "noise");
    if (j.contains("seed")) c.seed = impl::count_field(j.at("seed"), "seed");
    if (j.contains("profile")) c.profile = profile_from_json(j.at("profile"));
    return c;
}

// ---------------------------------------------------------------------------
// Sweep dataset: `step,phi_true,n1,n2`, one row per shot, steps ascending.
// phi_true is written in shortest round-trip form so reading restores the
// exact doubles.

inline void write_sweep_csv(const std::filesystem::path& path, const simshot::SweepDataset& ds) {
    auto out = open_output(path);
    std::string buf;
    buf.reserve(1 << 20);
    buf += "step,phi_true,n1,n2\n";
    const std::size_t per = ds.shots_per_step();
    for (std::size_t j = 0; j < ds.steps(); ++j) {
        const std::string prefix = std::to_string(j) + ',' + format_exact(ds.step_phase[j]) + ',';
        for (std::size_t s = 0; s < per; ++s) {
            const auto& c = ds.counts[j * per + s];
            buf += prefix;
            buf += std::to_string(c.n1);
            buf += ',';
            buf += std::to_string(c.n2);
            buf += '\n';
        }
        if (buf.size() > (1 << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    finish_output(out, path);
}

// Reads the shot table; the config comes from the sidecar when present and is
// otherwise default apart from steps and shots_per_step.
inline simshot::SweepDataset read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "step,phi_true,n1,n2") {
        throw io_error("'" + path.string() + "' does not start with the header step,phi_true,n1,n2");
    }
    simshot::SweepDataset ds;
    std::vector<std::size_t> per_step;
    std::size_t lineno = 1;
    auto fail = [&](const std::string& why) {
        return io_error(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view rest(line);
        std::string_view field[4];
        for (int k = 0; k < 4; ++k) {
            const auto comma = rest.find(',');
            if ((k < 3) == (comma == std::string_view::npos)) throw fail("expected 4 fields");
            field[k] = rest.substr(0, comma);
            rest = k < 3 ? rest.substr(comma + 1) : std::string_view{};
        }
        std::uint64_t step = 0;
        std::uint32_t n1 = 0, n2 = 0;
        auto parse_uint = [&](std::string_view s, auto& v) {
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size()) throw fail("bad integer '" + std::string(s) + "'");
        };
        parse_uint(field[0], step);
        parse_uint(field[2], n1);
        parse_uint(field[3], n2);
        const auto phi = try_parse_double(field[1]);
        if (!phi) throw fail("bad phase '" + std::string(field[1]) + "'");
        if (step == ds.step_phase.size()) {
            ds.step_phase.push_back(*phi);
            per_step.push_back(0);
        } else if (step + 1 != ds.step_phase.size()) {
            throw fail("steps must be contiguous and ascending");
        } else if (ds.step_phase.back() != *phi) {
            throw fail("phi_true changes within step " + std::to_string(step));
        }
        ++per_step.back();
        ds.counts.push_back({n1, n2});
    }
    if (ds.step_phase.empty()) throw io_error("'" + path.string() + "' has no shots");
    for (auto n : per_step) {
        if (n != per_step.front()) throw io_error("'" + path.string() + "' has unequal shots per step");
    }
    const auto side = sidecar_path(path);
    if (std::filesystem::exists(side)) {
        const json doc = read_json(side);
        if (!doc.contains("config")) throw io_error("sidecar '" + side.string() + "' has no config");
        ds.config = sweep_config_from_json(doc.at("config"));
    }
    ds.config.steps = ds.step_phase.size();
    ds.config.shots_per_step = per_step.front();
    return ds;
}

}  // namespace bracket::io
