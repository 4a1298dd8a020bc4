#pragma once

// Subcommands of the flexpath tool. Each writes its artifacts into an output
// directory under fixed names and returns the process exit code.

#include "flexpath/beam.hpp"
#include "flexpath/beam_dynamics.hpp"
#include "flexpath/beam_modal.hpp"
#include "flexpath/cli/config.hpp"
#include "flexpath/error.hpp"
#include "flexpath/kinematics.hpp"
#include "flexpath/parallel.hpp"
#include "flexpath/plate.hpp"
#include "flexpath/safety.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace flexpath::cli {

enum ExitCode : int {
    Success = 0,
    UsageError = 1,
    ConfigFailure = 2,
    SafetyFailure = 3,
    InfeasibleSearch = 4,
    NumericalError = 5
};

inline const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"simulate", "static", "modal", "plate", "check", "mintime",
                                                "sweep"};
    return names;
}

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool quiet = false;
};

namespace detail {

/// 17 significant digits, so every double round-trips.
inline std::string num(double v)
{
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary | std::ios::trunc)
    {
        if (!out_) {
            throw Error("cannot write '" + path.string() + "'");
        }
        for (std::size_t i = 0; i < header.size(); ++i) {
            out_ << (i ? "," : "") << header[i];
        }
        out_ << '\n';
    }

    void row(std::initializer_list<double> values)
    {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << num(v);
            first = false;
        }
        out_ << '\n';
    }

    void cells(const std::vector<std::string>& values)
    {
        for (std::size_t i = 0; i < values.size(); ++i) {
            out_ << (i ? "," : "") << values[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& value)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << value.dump(2) << '\n';
}

inline Trajectory trajectory_of(const RunConfig& cfg)
{
    return build_trajectory(cfg.trajectory);
}

inline SimulationOptions simulation_options(const RunConfig& cfg)
{
    SimulationOptions o;
    o.dt = cfg.sim.dt;
    o.output_stride = cfg.sim.output_stride;
    o.gravity = cfg.gravity;
    o.gamma = cfg.sim.gamma;
    o.mode = cfg.sim.mode;
    return o;
}

inline const SafetyLimits& require_limits(const RunConfig& cfg, const std::string& subcommand)
{
    if (!cfg.limits) {
        throw ConfigError("limits: section required by the " + subcommand + " subcommand");
    }
    return *cfg.limits;
}

inline json nondimensional_json(const RunConfig& cfg, double T)
{
    if (!cfg.scale_W || cfg.trajectory.R <= 0.0 || cfg.gravity <= 0.0) {
        return nullptr;
    }
    const auto g = nondimensional_groups(cfg.beam.E, cfg.beam.I, cfg.beam.rho, cfg.beam.L, T, *cfg.scale_W,
                                         cfg.trajectory.R, cfg.gravity);
    return {{"lambda", g.lambda}, {"Fr", g.Fr}, {"mu", g.mu}, {"nu", g.nu}};
}

inline json simulation_summary(const RunConfig& cfg, const Trajectory& traj, const SimulationResult& sim)
{
    double peak = 0.0;
    double peak_x = 0.0;
    double peak_t = 0.0;
    for (Eigen::Index k = 0; k < sim.sigma.rows(); ++k) {
        for (Eigen::Index i = 0; i < sim.sigma.cols(); ++i) {
            if (std::abs(sim.sigma(k, i)) > peak) {
                peak = std::abs(sim.sigma(k, i));
                peak_x = sim.x[i];
                peak_t = sim.times[k];
            }
        }
    }
    const Eigen::Index tip = sim.w.cols() - 1;
    Eigen::Index tip_row = 0;
    const double peak_tip = sim.w.col(tip).cwiseAbs().maxCoeff(&tip_row);
    return {{"backend", cfg.sim.backend == Backend::FiniteDifference ? "fd" : "fem"},
            {"mode", cfg.sim.mode == SimulationMode::Dynamic ? "dynamic" : "quasi_static"},
            {"total_time", traj.total_time()},
            {"dt", sim.dt},
            {"steps", sim.steps},
            {"samples", sim.times.size()},
            {"peak_stress", peak},
            {"peak_stress_x", peak_x},
            {"peak_stress_t", peak_t},
            {"peak_tip_deflection", peak_tip},
            {"peak_tip_t", sim.times[static_cast<std::size_t>(tip_row)]},
            {"final_tip_deflection", sim.w(sim.w.rows() - 1, tip)},
            {"hold_peak_stress", sim.hold_sigma.cwiseAbs().maxCoeff()},
            {"energy_drift", sim.energy_drift},
            {"nondimensional", nondimensional_json(cfg, traj.total_time())}};
}

inline json report_json(const SafetyReport& r)
{
    json resonance = json::array();
    for (std::size_t n = 0; n < r.resonance.size(); ++n) {
        resonance.push_back({{"mode", n + 1},
                             {"gap", r.resonance[n].gap},
                             {"time", r.resonance[n].time},
                             {"flagged", r.resonance[n].flagged}});
    }
    json out = {{"peak_stress", r.peak_stress},
                {"peak_stress_x", r.peak_stress_x},
                {"peak_stress_t", r.peak_stress_t},
                {"peak_in_hold", r.peak_in_hold},
                {"peak_on_plate", r.peak_on_plate},
                {"peak_theta_jerk", r.peak_theta_jerk.value},
                {"peak_theta_jerk_t", r.peak_theta_jerk.time},
                {"peak_r_jerk", r.peak_r_jerk.value},
                {"peak_r_jerk_t", r.peak_r_jerk.time},
                {"resonance", resonance},
                {"resonance_gap_min", r.resonance_gap_min},
                {"margins",
                 {{"stress", r.margins.stress},
                  {"theta_jerk", r.margins.theta_jerk},
                  {"r_jerk", r.margins.r_jerk}}},
                {"pass", r.pass}};
    if (r.peak_on_plate) {
        out["peak_stress_y"] = r.peak_stress_y;
    }
    return out;
}

inline json scan_json(const std::vector<ScanEntry>& scan)
{
    json arr = json::array();
    for (const auto& e : scan) {
        arr.push_back({{"T", e.T},
                       {"pass", e.pass},
                       {"refined", e.refined},
                       {"peak_stress", e.peak_stress},
                       {"peak_theta_jerk", e.peak_theta_jerk},
                       {"peak_r_jerk", e.peak_r_jerk},
                       {"min_resonance_gap", e.min_resonance_gap}});
    }
    return arr;
}

inline PlateSolution plate_solution(const RunConfig& cfg)
{
    if (!cfg.plate) {
        throw ConfigError("plate: section required by the plate subcommand");
    }
    const PlateModel& m = cfg.plate->model;
    return solve_plate_static(m, Grid::Constant(m.ny, m.nx, cfg.plate->load));
}

class Runner {
public:
    Runner(const RunConfig& cfg, RunOptions options) : cfg_(cfg), opt_(std::move(options)) {}

    int simulate()
    {
        const Trajectory traj = trajectory_of(cfg_);
        const SimulationResult sim = flexpath::simulate(cfg_.beam, traj, simulation_options(cfg_));
        CsvWriter csv(opt_.out_dir / "simulate.csv", {"t", "x", "w", "sigma"});
        for (std::size_t k = 0; k < sim.times.size(); ++k) {
            for (Eigen::Index i = 0; i < sim.x.size(); ++i) {
                const auto row = static_cast<Eigen::Index>(k);
                csv.row({sim.times[k], sim.x[i], sim.w(row, i), sim.sigma(row, i)});
            }
        }
        const json summary = simulation_summary(cfg_, traj, sim);
        write_json(opt_.out_dir / "simulate_summary.json", summary);
        log("simulate: " + std::to_string(sim.steps) + " steps, peak stress " + num(summary["peak_stress"].get<double>()) +
            " Pa, energy drift " + num(sim.energy_drift));
        return Success;
    }

    int static_pose()
    {
        const Trajectory traj = trajectory_of(cfg_);
        const TrajectorySample end = sample(traj, traj.total_time());
        const KinematicSample theta{end.theta.value, 0.0, 0.0, 0.0};
        const KinematicSample r{end.r.value, 0.0, 0.0, 0.0};
        const VectorXd x = cfg_.beam.node_positions();
        VectorXd q(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            q[i] = beam_load(x[i], 0.0, theta, r, cfg_.beam.rho, cfg_.gravity).total;
        }
        const Deflection d = solve_static(cfg_.beam, q);
        const VectorXd s = stress(cfg_.beam, d);
        CsvWriter csv(opt_.out_dir / "static.csv", {"x", "w", "sigma"});
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            csv.row({x[i], d.w[i], s[i]});
        }
        log("static: tip deflection " + num(d.w[d.w.size() - 1]) + " m, root stress " + num(s[0]) + " Pa");
        return Success;
    }

    int modal()
    {
        const ModalResult m = modal_analysis(cfg_.beam, cfg_.n_modes, cfg_.trajectory.T);
        json shapes = json::array();
        for (Eigen::Index n = 0; n < m.mode_shapes.rows(); ++n) {
            shapes.push_back(std::vector<double>(m.mode_shapes.row(n).begin(), m.mode_shapes.row(n).end()));
        }
        const VectorXd x = cfg_.beam.node_positions();
        std::vector<double> hz;
        for (double w : m.omega) {
            hz.push_back(w / (2.0 * std::numbers::pi));
        }
        const json out = {{"betas", m.betas},
                          {"residuals", m.residuals},
                          {"omega", m.omega},
                          {"frequency_hz", hz},
                          {"natural_rates", m.natural_rates},
                          {"time_scale", cfg_.trajectory.T},
                          {"discrete_omega", m.discrete_omega},
                          {"discrete_deviation", m.discrete_deviation},
                          {"x", std::vector<double>(x.begin(), x.end())},
                          {"mode_shapes", shapes}};
        write_json(opt_.out_dir / "modal.json", out);
        log("modal: omega_1 = " + num(m.omega.front()) + " rad/s");
        return Success;
    }

    int plate()
    {
        const PlateSolution sol = plate_solution(cfg_);
        const Grid vm = von_mises(sol.sigma_top, cfg_.von_mises);
        CsvWriter csv(opt_.out_dir / "plate.csv", {"x", "y", "w0", "M11", "M22", "M12", "sigma_vm_top"});
        for (Eigen::Index j = 0; j < sol.w0.rows(); ++j) {
            for (Eigen::Index i = 0; i < sol.w0.cols(); ++i) {
                csv.row({i * sol.hx, j * sol.hy, sol.w0(j, i), sol.M11(j, i), sol.M22(j, i), sol.M12(j, i),
                         vm(j, i)});
            }
        }
        Eigen::Index wj = 0;
        Eigen::Index wi = 0;
        const double w_max = sol.w0.cwiseAbs().maxCoeff(&wj, &wi);
        Eigen::Index sj = 0;
        Eigen::Index si = 0;
        const double vm_max = vm.maxCoeff(&sj, &si);
        const json out = {{"D", cfg_.plate->model.D()},
                          {"max_abs_w0", w_max},
                          {"max_abs_w0_x", wi * sol.hx},
                          {"max_abs_w0_y", wj * sol.hy},
                          {"peak_sigma_vm_top", vm_max},
                          {"peak_sigma_vm_top_x", si * sol.hx},
                          {"peak_sigma_vm_top_y", sj * sol.hy},
                          {"von_mises", cfg_.von_mises == VonMisesForm::Printed ? "printed" : "classical"}};
        write_json(opt_.out_dir / "plate_summary.json", out);
        log("plate: max |w0| " + num(w_max) + " m, peak von Mises " + num(vm_max) + " Pa");
        return Success;
    }

    int check()
    {
        const SafetyLimits& limits = require_limits(cfg_, "check");
        const Trajectory traj = trajectory_of(cfg_);
        const SimulationResult sim = flexpath::simulate(cfg_.beam, traj, simulation_options(cfg_));
        const ModalResult modal = modal_analysis(cfg_.beam, cfg_.n_modes);
        std::optional<PlateSolution> plate;
        if (cfg_.plate) {
            plate = plate_solution(cfg_);
        }
        EvaluateOptions eo;
        eo.von_mises_form = cfg_.von_mises;
        const SafetyReport report = evaluate(sim, traj, modal, limits, plate ? &*plate : nullptr, eo);
        write_json(opt_.out_dir / "check.json", report_json(report));
        log(std::string("check: ") + (report.pass ? "pass" : "FAIL") + ", peak stress " +
            num(report.peak_stress) + " Pa");
        return report.pass ? Success : SafetyFailure;
    }

    int mintime()
    {
        const SafetyLimits& limits = require_limits(cfg_, "mintime");
        if (!cfg_.mintime) {
            throw ConfigError("mintime: section required by the mintime subcommand");
        }
        const TrajectoryConfig tc = cfg_.trajectory;
        const TrajectoryFamily family = [tc](double T) { return build_trajectory(tc, T); };
        SearchOptions so;
        so.n_scan = cfg_.mintime->n_scan;
        so.relative_width = cfg_.mintime->relative_width;
        so.gravity = cfg_.gravity;
        so.gamma = cfg_.sim.gamma;
        so.mode = cfg_.sim.mode;
        so.n_modes = cfg_.n_modes;
        so.evaluate.von_mises_form = cfg_.von_mises;
        try {
            const SearchResult res =
                min_time_search(family, cfg_.beam, limits, cfg_.mintime->T_lo, cfg_.mintime->T_hi, so);
            json transitions = json::array();
            for (const auto& [lo, hi] : res.transitions) {
                transitions.push_back({{"T_fail", lo}, {"T_pass", hi}});
            }
            write_json(opt_.out_dir / "mintime.json", {{"feasible", true},
                                                       {"T_star", res.T_star},
                                                       {"transitions", transitions},
                                                       {"scan", scan_json(res.scan)}});
            log("mintime: T* = " + num(res.T_star) + " s");
            return Success;
        } catch (const Infeasible& e) {
            write_json(opt_.out_dir / "mintime.json",
                       {{"feasible", false}, {"T_star", nullptr}, {"transitions", json::array()},
                        {"scan", scan_json(e.scan())}});
            std::cerr << "flexpath: infeasible: " << e.what() << '\n';
            return InfeasibleSearch;
        }
    }

    int sweep()
    {
        if (cfg_.sweep.empty()) {
            throw ConfigError("sweep: section with at least one parameter required by the sweep subcommand");
        }
        // Cartesian product, last parameter varying fastest.
        std::vector<std::vector<double>> combos{{}};
        for (const auto& p : cfg_.sweep) {
            std::vector<std::vector<double>> next;
            for (const auto& c : combos) {
                for (double v : p.values) {
                    next.push_back(c);
                    next.back().push_back(v);
                }
            }
            combos = std::move(next);
        }
        const json base = to_json(cfg_);
        std::vector<RunConfig> runs;
        for (std::size_t k = 0; k < combos.size(); ++k) {
            json j = base;
            j.erase("sweep");
            for (std::size_t p = 0; p < cfg_.sweep.size(); ++p) {
                set_path(j, cfg_.sweep[p].path, combos[k][p]);
            }
            try {
                runs.push_back(parse_config_json(j));
            } catch (const ConfigError& e) {
                throw ConfigError("sweep run " + std::to_string(k) + ": " + e.what());
            }
        }

        struct Outcome {
            json summary;
            bool has_pass = false;
            bool pass = false;
        };
        const std::vector<Outcome> outcomes = parallel_map(static_cast<int>(runs.size()), [&](int k) {
            const RunConfig& rc = runs[static_cast<std::size_t>(k)];
            const Trajectory traj = trajectory_of(rc);
            const SimulationResult sim = flexpath::simulate(rc.beam, traj, simulation_options(rc));
            Outcome o;
            o.summary = simulation_summary(rc, traj, sim);
            if (rc.limits) {
                const ModalResult modal = modal_analysis(rc.beam, rc.n_modes);
                EvaluateOptions eo;
                eo.von_mises_form = rc.von_mises;
                const SafetyReport report = evaluate(sim, traj, modal, *rc.limits, nullptr, eo);
                o.summary["safety"] = report_json(report);
                o.has_pass = true;
                o.pass = report.pass;
            }
            return o;
        });

        std::vector<std::string> header{"run"};
        for (const auto& p : cfg_.sweep) {
            header.push_back(p.path);
        }
        for (const char* c : {"peak_stress", "peak_tip_deflection", "energy_drift", "pass"}) {
            header.emplace_back(c);
        }
        CsvWriter index(opt_.out_dir / "sweep.csv", header);
        for (std::size_t k = 0; k < runs.size(); ++k) {
            json summary = outcomes[k].summary;
            json params = json::object();
            for (std::size_t p = 0; p < cfg_.sweep.size(); ++p) {
                params[cfg_.sweep[p].path] = combos[k][p];
            }
            summary["parameters"] = params;
            write_json(opt_.out_dir / run_name(k), summary);
            std::vector<std::string> cells{std::to_string(k)};
            for (double v : combos[k]) {
                cells.push_back(num(v));
            }
            cells.push_back(num(summary["peak_stress"].get<double>()));
            cells.push_back(num(summary["peak_tip_deflection"].get<double>()));
            cells.push_back(num(summary["energy_drift"].get<double>()));
            cells.emplace_back(outcomes[k].has_pass ? (outcomes[k].pass ? "1" : "0") : "");
            index.cells(cells);
        }
        log("sweep: " + std::to_string(runs.size()) + " runs");
        return Success;
    }

    static std::string run_name(std::size_t k)
    {
        std::array<char, 32> buf{};
        std::snprintf(buf.data(), buf.size(), "sweep_%04zu.json", k);
        return buf.data();
    }

private:
    void log(const std::string& line) const
    {
        if (!opt_.quiet) {
            std::cout << line << '\n';
        }
    }

    const RunConfig& cfg_;
    RunOptions opt_;
};

} // namespace detail

/// Run one subcommand; failures are reported on stderr and mapped to exit codes.
inline int run(const std::string& subcommand, const RunConfig& cfg, const RunOptions& options = {})
{
    try {
        std::filesystem::create_directories(options.out_dir);
        detail::Runner runner(cfg, options);
        if (subcommand == "simulate") {
            return runner.simulate();
        }
        if (subcommand == "static") {
            return runner.static_pose();
        }
        if (subcommand == "modal") {
            return runner.modal();
        }
        if (subcommand == "plate") {
            return runner.plate();
        }
        if (subcommand == "check") {
            return runner.check();
        }
        if (subcommand == "mintime") {
            return runner.mintime();
        }
        if (subcommand == "sweep") {
            return runner.sweep();
        }
        std::cerr << "flexpath: unknown subcommand '" << subcommand << "'\n";
        return UsageError;
    } catch (const ConfigError& e) {
        std::cerr << "flexpath: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const NumericalFailure& e) {
        std::cerr << "flexpath: numerical failure: " << e.what() << '\n';
        return NumericalError;
    } catch (const InvalidArgument& e) {
        std::cerr << "flexpath: invalid input: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "flexpath: " << e.what() << '\n';
        return NumericalError;
    }
}

} // namespace flexpath::cli
