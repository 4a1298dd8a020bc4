#pragma once

// Run configuration: strict JSON parsing (unknown keys rejected, every violation
// reported with its dotted path) and the inverse serialization.

#include "flexpath/beam.hpp"
#include "flexpath/beam_dynamics.hpp"
#include "flexpath/error.hpp"
#include "flexpath/plate.hpp"
#include "flexpath/safety.hpp"
#include "flexpath/trajectory.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace flexpath::cli {

using nlohmann::json;

struct SegmentConfig {
    std::vector<double> coefficients;  // ascending powers of local time [s]
    double duration = 0.0;

    bool operator==(const SegmentConfig&) const = default;
};

struct TrajectoryConfig {
    std::string generator = "quintic";  // cubic | quintic | piecewise
    double theta0 = 0.0;
    double theta1 = 0.0;
    double R = 0.0;
    double T = 1.0;
    std::vector<SegmentConfig> theta;  // piecewise only
    std::vector<SegmentConfig> r;      // piecewise only

    bool operator==(const TrajectoryConfig&) const = default;
};

struct SimConfig {
    double dt = 1e-3;
    int output_stride = 1;
    Backend backend = Backend::HermiteFEM;
    double gamma = 0.5;
    SimulationMode mode = SimulationMode::Dynamic;

    bool operator==(const SimConfig&) const = default;
};

struct PlateConfig {
    PlateModel model;
    double load = 0.0;  // uniform transverse load [Pa]

    bool operator==(const PlateConfig&) const = default;
};

struct MintimeConfig {
    double T_lo = 0.0;
    double T_hi = 0.0;
    int n_scan = 12;
    double relative_width = 1e-2;

    bool operator==(const MintimeConfig&) const = default;
};

struct SweepParameter {
    std::string path;  // dotted, e.g. "trajectory.T"
    std::vector<double> values;

    bool operator==(const SweepParameter&) const = default;
};

struct RunConfig {
    BeamModel beam;  // backend mirrors sim.backend
    std::optional<PlateConfig> plate;
    TrajectoryConfig trajectory;
    SimConfig sim;
    std::optional<SafetyLimits> limits;
    double gravity = 9.81;
    std::optional<double> scale_W;
    int n_modes = 4;
    std::optional<MintimeConfig> mintime;
    std::vector<SweepParameter> sweep;
    VonMisesForm von_mises = VonMisesForm::Printed;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b)
{
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

inline std::string join_path(const std::string& base, const std::string& key)
{
    return base.empty() ? key : base + "." + key;
}

inline std::string describe(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

/// Collects violations; parsing continues after an error so all are reported together.
class Diagnostics {
public:
    void add(const std::string& path, const std::string& message) { errors_.push_back(path + ": " + message); }
    [[nodiscard]] bool empty() const { return errors_.empty(); }

    void raise_if_any() const
    {
        if (errors_.empty()) {
            return;
        }
        std::string msg = "invalid configuration:";
        for (const auto& e : errors_) {
            msg += "\n  " + e;
        }
        throw ConfigError(msg);
    }

private:
    std::vector<std::string> errors_;
};

/// Reads fields of one JSON object, remembering which keys were consumed.
class ObjectReader {
public:
    ObjectReader(const json& obj, std::string path, Diagnostics& diag, std::vector<std::string> allowed)
        : obj_(obj), path_(std::move(path)), diag_(diag), allowed_(std::move(allowed))
    {
        if (!obj_.is_object()) {
            diag_.add(path_.empty() ? "(root)" : path_, "expected an object");
            valid_ = false;
            return;
        }
        for (const auto& [key, value] : obj_.items()) {
            if (std::find(allowed_.begin(), allowed_.end(), key) == allowed_.end()) {
                diag_.add(join_path(path_, key), "unknown key" + suggestion(key));
            }
        }
    }

    [[nodiscard]] bool valid() const { return valid_; }
    [[nodiscard]] bool has(const std::string& key) const { return valid_ && obj_.contains(key); }
    [[nodiscard]] const json& at(const std::string& key) const { return obj_.at(key); }
    [[nodiscard]] std::string path(const std::string& key) const { return join_path(path_, key); }

    bool number(const std::string& key, double& out, bool required)
    {
        if (!has(key)) {
            if (required && valid_) {
                diag_.add(path(key), "required number is missing");
            }
            return false;
        }
        const json& v = obj_.at(key);
        if (!v.is_number()) {
            diag_.add(path(key), "expected a number");
            return false;
        }
        out = v.get<double>();
        if (!std::isfinite(out)) {
            diag_.add(path(key), "must be finite");
            return false;
        }
        return true;
    }

    bool integer(const std::string& key, int& out, bool required)
    {
        if (!has(key)) {
            if (required && valid_) {
                diag_.add(path(key), "required integer is missing");
            }
            return false;
        }
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) {
            diag_.add(path(key), "expected an integer");
            return false;
        }
        out = v.get<int>();
        return true;
    }

    bool string(const std::string& key, std::string& out, bool required)
    {
        if (!has(key)) {
            if (required && valid_) {
                diag_.add(path(key), "required string is missing");
            }
            return false;
        }
        const json& v = obj_.at(key);
        if (!v.is_string()) {
            diag_.add(path(key), "expected a string");
            return false;
        }
        out = v.get<std::string>();
        return true;
    }

    void positive(const std::string& key, double& out, bool required)
    {
        if (number(key, out, required) && !(out > 0.0)) {
            diag_.add(path(key), "must be positive (got " + describe(out) + ")");
        }
    }

    void non_negative(const std::string& key, double& out, bool required)
    {
        if (number(key, out, required) && out < 0.0) {
            diag_.add(path(key), "must be non-negative (got " + describe(out) + ")");
        }
    }

    void at_least(const std::string& key, int& out, int minimum, bool required)
    {
        if (integer(key, out, required) && out < minimum) {
            diag_.add(path(key), "must be at least " + std::to_string(minimum) + " (got " +
                                     std::to_string(out) + ")");
        }
    }

private:
    [[nodiscard]] std::string suggestion(const std::string& key) const
    {
        std::string best;
        std::size_t best_d = std::max<std::size_t>(2, key.size() / 3) + 1;
        for (const auto& candidate : allowed_) {
            const std::size_t d = edit_distance(key, candidate);
            if (d < best_d) {
                best_d = d;
                best = candidate;
            }
        }
        return best.empty() ? "" : " (did you mean \"" + best + "\"?)";
    }

    const json& obj_;
    std::string path_;
    Diagnostics& diag_;
    std::vector<std::string> allowed_;
    bool valid_ = true;
};

inline std::vector<SegmentConfig> parse_segments(const json& v, const std::string& path, Diagnostics& diag)
{
    std::vector<SegmentConfig> out;
    if (!v.is_array() || v.empty()) {
        diag.add(path, "expected a non-empty array of segments");
        return out;
    }
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string p = path + "[" + std::to_string(k) + "]";
        ObjectReader seg(v[k], p, diag, {"coefficients", "duration"});
        SegmentConfig s;
        seg.positive("duration", s.duration, true);
        if (!seg.has("coefficients")) {
            if (seg.valid()) {
                diag.add(seg.path("coefficients"), "required array is missing");
            }
        } else {
            const json& c = seg.at("coefficients");
            if (!c.is_array() || c.empty() || c.size() > 8 ||
                !std::all_of(c.begin(), c.end(), [](const json& x) { return x.is_number(); })) {
                diag.add(seg.path("coefficients"), "expected 1 to 8 numbers");
            } else {
                for (const auto& x : c) {
                    s.coefficients.push_back(x.get<double>());
                }
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline json segments_json(const std::vector<SegmentConfig>& segs)
{
    json arr = json::array();
    for (const auto& s : segs) {
        arr.push_back({{"coefficients", s.coefficients}, {"duration", s.duration}});
    }
    return arr;
}

inline std::optional<Edge> edge_from_string(const std::string& s)
{
    for (Edge e : {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top}) {
        if (to_string(e) == s) {
            return e;
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Trajectory described by the config, with its duration replaced by T when given.
/// Piecewise trajectories are stretched uniformly in time.
inline Trajectory build_trajectory(const TrajectoryConfig& cfg, std::optional<double> T = std::nullopt)
{
    if (cfg.generator == "piecewise") {
        double T0 = 0.0;
        for (const auto& s : cfg.theta) {
            T0 += s.duration;
        }
        const double k = T ? *T / T0 : 1.0;
        auto scaled = [k](const std::vector<SegmentConfig>& segs) {
            std::vector<PolynomialSegment> out;
            for (const auto& s : segs) {
                std::vector<double> c = s.coefficients;
                for (std::size_t j = 0; j < c.size(); ++j) {
                    c[j] /= std::pow(k, static_cast<double>(j));
                }
                out.emplace_back(std::move(c), s.duration * k);
            }
            return PiecewisePolynomial(std::move(out));
        };
        return Trajectory(scaled(cfg.theta), scaled(cfg.r));
    }
    const Generator g = cfg.generator == "cubic" ? Generator::Cubic : Generator::Quintic;
    return make_rest_to_rest(g, cfg.theta0, cfg.theta1, cfg.R, T.value_or(cfg.T));
}

inline RunConfig parse_config_json(const json& root)
{
    using detail::ObjectReader;
    detail::Diagnostics diag;
    RunConfig cfg;
    ObjectReader top(root, "", diag,
                     {"beam", "plate", "trajectory", "sim", "limits", "gravity", "scales", "modal", "mintime",
                      "sweep", "von_mises"});
    if (!top.valid()) {
        diag.raise_if_any();
    }

    if (!top.has("beam")) {
        diag.add("beam", "required section is missing");
    } else {
        ObjectReader r(top.at("beam"), "beam", diag, {"E", "I", "rho", "L", "h", "sigma_yield", "n_nodes"});
        r.positive("E", cfg.beam.E, true);
        r.positive("I", cfg.beam.I, true);
        r.positive("rho", cfg.beam.rho, true);
        r.positive("L", cfg.beam.L, true);
        r.positive("h", cfg.beam.h, true);
        r.positive("sigma_yield", cfg.beam.sigma_yield, true);
        r.at_least("n_nodes", cfg.beam.n_nodes, 5, false);
    }

    if (top.has("sim")) {
        ObjectReader r(top.at("sim"), "sim", diag, {"dt", "output_stride", "backend", "gamma", "mode"});
        r.positive("dt", cfg.sim.dt, false);
        r.at_least("output_stride", cfg.sim.output_stride, 1, false);
        std::string backend;
        if (r.string("backend", backend, false)) {
            if (backend == "fd") {
                cfg.sim.backend = Backend::FiniteDifference;
            } else if (backend == "fem") {
                cfg.sim.backend = Backend::HermiteFEM;
            } else {
                diag.add("sim.backend", "expected \"fd\" or \"fem\" (got \"" + backend + "\")");
            }
        }
        if (r.number("gamma", cfg.sim.gamma, false) && cfg.sim.gamma < 0.5) {
            diag.add("sim.gamma", "must be at least 0.5");
        }
        std::string mode;
        if (r.string("mode", mode, false)) {
            if (mode == "dynamic") {
                cfg.sim.mode = SimulationMode::Dynamic;
            } else if (mode == "quasi_static") {
                cfg.sim.mode = SimulationMode::QuasiStatic;
            } else {
                diag.add("sim.mode", "expected \"dynamic\" or \"quasi_static\" (got \"" + mode + "\")");
            }
        }
    }
    cfg.beam.backend = cfg.sim.backend;

    if (!top.has("trajectory")) {
        diag.add("trajectory", "required section is missing");
    } else {
        const json& tj = top.at("trajectory");
        std::string generator = "quintic";
        if (tj.is_object() && tj.contains("generator") && tj.at("generator").is_string()) {
            generator = tj.at("generator").get<std::string>();
        }
        auto& t = cfg.trajectory;
        if (generator == "piecewise") {
            ObjectReader r(tj, "trajectory", diag, {"generator", "theta", "r"});
            r.string("generator", t.generator, true);
            for (const char* key : {"theta", "r"}) {
                if (!r.has(key)) {
                    if (r.valid()) {
                        diag.add(r.path(key), "required segment list is missing");
                    }
                    continue;
                }
                (std::string(key) == "theta" ? t.theta : t.r) = detail::parse_segments(r.at(key), r.path(key), diag);
            }
        } else {
            ObjectReader r(tj, "trajectory", diag, {"generator", "theta0", "theta1", "R", "T"});
            if (r.string("generator", t.generator, false) && t.generator != "cubic" && t.generator != "quintic") {
                diag.add("trajectory.generator",
                         "expected \"cubic\", \"quintic\" or \"piecewise\" (got \"" + t.generator + "\")");
            }
            r.number("theta0", t.theta0, true);
            r.number("theta1", t.theta1, true);
            r.non_negative("R", t.R, false);
            r.positive("T", t.T, true);
        }
    }

    if (top.has("plate")) {
        ObjectReader r(top.at("plate"), "plate", diag,
                       {"E", "nu", "h", "rho", "a", "b", "nx", "ny", "clamped_edges", "foundation_k", "load"});
        PlateConfig p;
        r.positive("E", p.model.E, true);
        if (r.number("nu", p.model.nu, false) && !(p.model.nu > 0.0 && p.model.nu < 0.5)) {
            diag.add("plate.nu", "must lie in (0, 0.5) (got " + detail::describe(p.model.nu) + ")");
        }
        r.positive("h", p.model.h, true);
        r.non_negative("rho", p.model.rho, false);
        r.positive("a", p.model.a, true);
        r.positive("b", p.model.b, true);
        r.at_least("nx", p.model.nx, 9, false);
        r.at_least("ny", p.model.ny, 9, false);
        r.non_negative("foundation_k", p.model.foundation_k, false);
        r.number("load", p.load, false);
        if (r.has("clamped_edges")) {
            const json& edges = r.at("clamped_edges");
            p.model.clamped_edges.clear();
            if (!edges.is_array() || edges.empty()) {
                diag.add("plate.clamped_edges", "expected a non-empty array of edge names");
            } else {
                for (std::size_t k = 0; k < edges.size(); ++k) {
                    const auto e = edges[k].is_string() ? detail::edge_from_string(edges[k].get<std::string>())
                                                        : std::nullopt;
                    if (!e) {
                        diag.add("plate.clamped_edges[" + std::to_string(k) + "]",
                                 "expected one of \"left\", \"right\", \"bottom\", \"top\"");
                    } else {
                        p.model.clamped_edges.insert(*e);
                    }
                }
            }
        }
        cfg.plate = p;
    }

    if (top.has("limits")) {
        ObjectReader r(top.at("limits"), "limits", diag,
                       {"sigma_max", "jerk_max_theta", "jerk_max_r", "resonance_gap_min"});
        SafetyLimits l;
        l.sigma_max = cfg.beam.sigma_yield;
        r.positive("sigma_max", l.sigma_max, false);
        r.positive("jerk_max_theta", l.jerk_max_theta, true);
        r.positive("jerk_max_r", l.jerk_max_r, true);
        r.positive("resonance_gap_min", l.resonance_gap_min, false);
        cfg.limits = l;
    }

    top.non_negative("gravity", cfg.gravity, false);

    if (top.has("scales")) {
        ObjectReader r(top.at("scales"), "scales", diag, {"W"});
        double W = 0.0;
        r.positive("W", W, true);
        cfg.scale_W = W;
    }

    if (top.has("modal")) {
        ObjectReader r(top.at("modal"), "modal", diag, {"n_modes"});
        r.at_least("n_modes", cfg.n_modes, 1, false);
        if (cfg.n_modes > 12) {
            diag.add("modal.n_modes", "at most 12 modes are supported");
        }
    }

    if (top.has("mintime")) {
        ObjectReader r(top.at("mintime"), "mintime", diag, {"T_lo", "T_hi", "n_scan", "relative_width"});
        MintimeConfig m;
        r.positive("T_lo", m.T_lo, true);
        r.positive("T_hi", m.T_hi, true);
        r.at_least("n_scan", m.n_scan, 2, false);
        r.positive("relative_width", m.relative_width, false);
        if (m.T_lo > 0.0 && m.T_hi > 0.0 && !(m.T_lo < m.T_hi)) {
            diag.add("mintime.T_hi", "must exceed mintime.T_lo");
        }
        cfg.mintime = m;
    }

    if (top.has("sweep")) {
        ObjectReader r(top.at("sweep"), "sweep", diag, {"parameters"});
        if (!r.has("parameters") || !r.at("parameters").is_array()) {
            if (r.valid()) {
                diag.add("sweep.parameters", "expected an array");
            }
        } else {
            const json& params = r.at("parameters");
            for (std::size_t k = 0; k < params.size(); ++k) {
                const std::string p = "sweep.parameters[" + std::to_string(k) + "]";
                ObjectReader pr(params[k], p, diag, {"path", "values"});
                SweepParameter sp;
                pr.string("path", sp.path, true);
                if (!pr.has("values") || !pr.at("values").is_array() || pr.at("values").empty() ||
                    !std::all_of(pr.at("values").begin(), pr.at("values").end(),
                                 [](const json& x) { return x.is_number(); })) {
                    if (pr.valid()) {
                        diag.add(pr.path("values"), "expected a non-empty array of numbers");
                    }
                } else {
                    for (const auto& x : pr.at("values")) {
                        sp.values.push_back(x.get<double>());
                    }
                }
                cfg.sweep.push_back(std::move(sp));
            }
        }
    }

    std::string vm;
    if (top.string("von_mises", vm, false)) {
        if (vm == "printed") {
            cfg.von_mises = VonMisesForm::Printed;
        } else if (vm == "classical") {
            cfg.von_mises = VonMisesForm::Classical;
        } else {
            diag.add("von_mises", "expected \"printed\" or \"classical\" (got \"" + vm + "\")");
        }
    }

    diag.raise_if_any();

    // Cross-field invariants, checked once the fields themselves are sound.
    auto check = [&](const std::string& path, auto&& fn) {
        try {
            fn();
        } catch (const InvalidArgument& e) {
            diag.add(path, e.what());
        }
    };
    check("beam", [&] { cfg.beam.validate(); });
    check("trajectory", [&] { (void)build_trajectory(cfg.trajectory); });
    if (cfg.plate) {
        check("plate", [&] { cfg.plate->model.validate(); });
    }
    if (cfg.limits) {
        check("limits", [&] { cfg.limits->validate(); });
    }
    diag.raise_if_any();
    return cfg;
}

inline RunConfig parse_config_string(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config_json(root);
}

inline RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_string(buffer.str());
}

inline json to_json(const RunConfig& cfg)
{
    json root;
    root["beam"] = {{"E", cfg.beam.E},   {"I", cfg.beam.I},
                    {"rho", cfg.beam.rho}, {"L", cfg.beam.L},
                    {"h", cfg.beam.h},   {"sigma_yield", cfg.beam.sigma_yield},
                    {"n_nodes", cfg.beam.n_nodes}};
    const auto& t = cfg.trajectory;
    if (t.generator == "piecewise") {
        root["trajectory"] = {{"generator", t.generator},
                              {"theta", detail::segments_json(t.theta)},
                              {"r", detail::segments_json(t.r)}};
    } else {
        root["trajectory"] = {{"generator", t.generator}, {"theta0", t.theta0}, {"theta1", t.theta1},
                              {"R", t.R},                 {"T", t.T}};
    }
    root["sim"] = {{"dt", cfg.sim.dt},
                   {"output_stride", cfg.sim.output_stride},
                   {"backend", cfg.sim.backend == Backend::FiniteDifference ? "fd" : "fem"},
                   {"gamma", cfg.sim.gamma},
                   {"mode", cfg.sim.mode == SimulationMode::Dynamic ? "dynamic" : "quasi_static"}};
    if (cfg.plate) {
        const PlateModel& p = cfg.plate->model;
        json edges = json::array();
        for (Edge e : p.clamped_edges) {
            edges.push_back(to_string(e));
        }
        root["plate"] = {{"E", p.E},   {"nu", p.nu}, {"h", p.h},   {"rho", p.rho},
                         {"a", p.a},   {"b", p.b},   {"nx", p.nx}, {"ny", p.ny},
                         {"clamped_edges", edges},   {"foundation_k", p.foundation_k},
                         {"load", cfg.plate->load}};
    }
    if (cfg.limits) {
        root["limits"] = {{"sigma_max", cfg.limits->sigma_max},
                          {"jerk_max_theta", cfg.limits->jerk_max_theta},
                          {"jerk_max_r", cfg.limits->jerk_max_r},
                          {"resonance_gap_min", cfg.limits->resonance_gap_min}};
    }
    root["gravity"] = cfg.gravity;
    if (cfg.scale_W) {
        root["scales"] = {{"W", *cfg.scale_W}};
    }
    root["modal"] = {{"n_modes", cfg.n_modes}};
    if (cfg.mintime) {
        root["mintime"] = {{"T_lo", cfg.mintime->T_lo},
                           {"T_hi", cfg.mintime->T_hi},
                           {"n_scan", cfg.mintime->n_scan},
                           {"relative_width", cfg.mintime->relative_width}};
    }
    if (!cfg.sweep.empty()) {
        json params = json::array();
        for (const auto& p : cfg.sweep) {
            params.push_back({{"path", p.path}, {"values", p.values}});
        }
        root["sweep"] = {{"parameters", params}};
    }
    root["von_mises"] = cfg.von_mises == VonMisesForm::Printed ? "printed" : "classical";
    return root;
}

inline std::string serialize(const RunConfig& cfg)
{
    return to_json(cfg).dump(2) + "\n";
}

/// Overwrite the number at a dotted path ("beam.L"), creating objects along the way.
inline void set_path(json& root, const std::string& path, double value)
{
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) {
            throw ConfigError("malformed parameter path '" + path + "'");
        }
        if (!node->is_object()) {
            throw ConfigError("parameter path '" + path + "' does not name an object member");
        }
        if (dot == std::string::npos) {
            json& slot = (*node)[key];
            const bool integral = slot.is_number_integer();
            if (integral && value == std::floor(value)) {
                slot = static_cast<long long>(value);
            } else {
                slot = value;
            }
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

} // namespace flexpath::cli
