#pragma once

// Yield, jerk and resonance diagnostics of a simulated motion, and the search for
// the shortest admissible duration within a trajectory family.

#include "flexpath/beam.hpp"
#include "flexpath/beam_dynamics.hpp"
#include "flexpath/beam_modal.hpp"
#include "flexpath/error.hpp"
#include "flexpath/parallel.hpp"
#include "flexpath/plate.hpp"
#include "flexpath/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace flexpath {

enum class VonMisesForm {
    Printed,   // sqrt(3/2 (s11^2 + 2 s12^2 + s22^2) - 1/2 (s11^2 + s22^2))
    Classical  // sqrt(s11^2 - s11 s22 + s22^2 + 3 s12^2)
};

inline double von_mises(double s11, double s22, double s12, VonMisesForm form = VonMisesForm::Printed)
{
    if (form == VonMisesForm::Classical) {
        return std::sqrt(std::max(0.0, s11 * s11 - s11 * s22 + s22 * s22 + 3.0 * s12 * s12));
    }
    const double arg = 1.5 * (s11 * s11 + 2.0 * s12 * s12 + s22 * s22) - 0.5 * (s11 * s11 + s22 * s22);
    return std::sqrt(std::max(0.0, arg));
}

inline Grid von_mises(const StressGrids& s, VonMisesForm form = VonMisesForm::Printed)
{
    Grid out(s.s11.rows(), s.s11.cols());
    for (Eigen::Index j = 0; j < out.rows(); ++j) {
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
            out(j, i) = von_mises(s.s11(j, i), s.s22(j, i), s.s12(j, i), form);
        }
    }
    return out;
}

struct SafetyLimits {
    double sigma_max = 0.0;       // [Pa]
    double jerk_max_theta = 0.0;  // [rad/s^3]
    double jerk_max_r = 0.0;      // [m/s^3]
    double resonance_gap_min = 0.1;

    void validate() const
    {
        detail::require(sigma_max > 0.0 && jerk_max_theta > 0.0 && jerk_max_r > 0.0 &&
                            resonance_gap_min > 0.0,
                        "safety limits must be strictly positive");
    }

    bool operator==(const SafetyLimits&) const = default;
};

struct SafetyMargins {
    // limit / attained; +infinity when nothing is attained.
    double stress = std::numeric_limits<double>::infinity();
    double theta_jerk = std::numeric_limits<double>::infinity();
    double r_jerk = std::numeric_limits<double>::infinity();
};

struct SafetyReport {
    double peak_stress = 0.0;
    double peak_stress_x = 0.0;
    double peak_stress_y = 0.0;  // plate only
    double peak_stress_t = 0.0;
    bool peak_in_hold = false;  // attained by the final pose held at rest
    bool peak_on_plate = false;
    JerkPeak peak_theta_jerk;
    JerkPeak peak_r_jerk;
    std::vector<ResonanceGap> resonance;
    double resonance_gap_min = 0.1;
    SafetyMargins margins;
    bool pass = false;
};

struct EvaluateOptions {
    int jerk_samples = 1001;
    int resonance_samples = 2001;
    VonMisesForm von_mises_form = VonMisesForm::Printed;
};

namespace detail {

inline double margin(double limit, double attained)
{
    return attained > 0.0 ? limit / attained : std::numeric_limits<double>::infinity();
}

} // namespace detail

/// Compare a simulated motion against the limits. A plate solution, when given,
/// contributes its top-surface von Mises stress.
inline SafetyReport evaluate(const SimulationResult& sim, const Trajectory& traj, const ModalResult& modal,
                             const SafetyLimits& limits, const PlateSolution* plate = nullptr,
                             const EvaluateOptions& options = {})
{
    limits.validate();
    const double T = traj.total_time();
    detail::require(!sim.times.empty(), "simulation has no samples");
    if (std::abs(sim.times.front()) > 1e-12 * T || std::abs(sim.times.back() - T) > 1e-9 * T) {
        throw InvalidArgument("simulation spans [" + std::to_string(sim.times.front()) + ", " +
                              std::to_string(sim.times.back()) + "] but the trajectory lasts " +
                              std::to_string(T) + " s");
    }

    SafetyReport report;
    report.resonance_gap_min = limits.resonance_gap_min;
    for (Eigen::Index k = 0; k < sim.sigma.rows(); ++k) {
        for (Eigen::Index i = 0; i < sim.sigma.cols(); ++i) {
            const double s = std::abs(sim.sigma(k, i));
            if (s > report.peak_stress) {
                report.peak_stress = s;
                report.peak_stress_x = sim.x[i];
                report.peak_stress_t = sim.times[k];
            }
        }
    }
    for (Eigen::Index i = 0; i < sim.hold_sigma.size(); ++i) {
        const double s = std::abs(sim.hold_sigma[i]);
        if (s > report.peak_stress) {
            report.peak_stress = s;
            report.peak_stress_x = sim.x[i];
            report.peak_stress_t = T;
            report.peak_in_hold = true;
        }
    }
    if (plate != nullptr) {
        const Grid vm = von_mises(plate->sigma_top, options.von_mises_form);
        Eigen::Index j = 0;
        Eigen::Index i = 0;
        const double peak = vm.maxCoeff(&j, &i);
        if (peak > report.peak_stress) {
            report.peak_stress = peak;
            report.peak_stress_x = i * plate->hx;
            report.peak_stress_y = j * plate->hy;
            report.peak_stress_t = 0.0;
            report.peak_in_hold = false;
            report.peak_on_plate = true;
        }
    }

    const JerkMaxima jerk = max_jerk(traj, options.jerk_samples);
    report.peak_theta_jerk = jerk.theta;
    report.peak_r_jerk = jerk.r;
    report.resonance = resonance_proximity(traj, modal, limits.resonance_gap_min, options.resonance_samples);

    report.margins.stress = detail::margin(limits.sigma_max, report.peak_stress);
    report.margins.theta_jerk = detail::margin(limits.jerk_max_theta, jerk.theta.value);
    report.margins.r_jerk = detail::margin(limits.jerk_max_r, jerk.r.value);
    report.pass = report.margins.stress >= 1.0 && report.margins.theta_jerk >= 1.0 &&
                  report.margins.r_jerk >= 1.0 &&
                  std::all_of(report.resonance.begin(), report.resonance.end(),
                              [&](const ResonanceGap& g) { return g.gap >= limits.resonance_gap_min; });
    return report;
}

using TrajectoryFamily = std::function<Trajectory(double)>;

struct ScanEntry {
    double T = 0.0;
    bool pass = false;
    bool refined = false;  // produced by bisection rather than the log scan
    double peak_stress = 0.0;
    double peak_theta_jerk = 0.0;
    double peak_r_jerk = 0.0;
    double min_resonance_gap = 1.0;
};

struct SearchOptions {
    int n_scan = 12;
    double relative_width = 1e-2;
    double steps_per_period = 40.0;  // time steps per fundamental period
    int min_steps = 200;             // time steps per candidate at least
    double gravity = 9.81;
    double gamma = 0.5;
    SimulationMode mode = SimulationMode::Dynamic;
    int n_modes = 4;
    int threads = thread_limit();
    EvaluateOptions evaluate;
};

struct SearchResult {
    double T_star = 0.0;
    std::vector<ScanEntry> scan;                          // sorted by T
    std::vector<std::pair<double, double>> transitions;  // refined (last fail, first pass) brackets
};

class Infeasible : public Error {
public:
    Infeasible(const std::string& what, std::vector<ScanEntry> scan)
        : Error(what), scan_(std::move(scan))
    {
    }

    [[nodiscard]] const std::vector<ScanEntry>& scan() const { return scan_; }

private:
    std::vector<ScanEntry> scan_;
};

/// Simulate family(T) and judge it; dt resolves the fundamental period.
inline ScanEntry evaluate_duration(const TrajectoryFamily& family, const BeamModel& model,
                                   const ModalResult& modal, const SafetyLimits& limits, double T,
                                   const SearchOptions& options)
{
    const Trajectory traj = family(T);
    const double period = 2.0 * std::numbers::pi / modal.omega.front();
    SimulationOptions sim_options;
    sim_options.dt = std::min(traj.total_time() / options.min_steps, period / options.steps_per_period);
    sim_options.output_stride = 1;
    sim_options.gravity = options.gravity;
    sim_options.gamma = options.gamma;
    sim_options.mode = options.mode;
    const SimulationResult sim = simulate(model, traj, sim_options);
    const SafetyReport report = evaluate(sim, traj, modal, limits, nullptr, options.evaluate);

    ScanEntry entry;
    entry.T = T;
    entry.pass = report.pass;
    entry.peak_stress = report.peak_stress;
    entry.peak_theta_jerk = report.peak_theta_jerk.value;
    entry.peak_r_jerk = report.peak_r_jerk.value;
    for (const auto& g : report.resonance) {
        entry.min_resonance_gap = std::min(entry.min_resonance_gap, g.gap);
    }
    return entry;
}

/// Shortest passing duration in [T_lo, T_hi]. Monotonicity is not assumed: every
/// fail-to-pass step of the log scan is bisected, and the smallest passing T seen wins.
inline SearchResult min_time_search(const TrajectoryFamily& family, const BeamModel& model,
                                    const SafetyLimits& limits, double T_lo, double T_hi,
                                    const SearchOptions& options = {})
{
    model.validate();
    limits.validate();
    detail::require(T_lo > 0.0 && T_lo < T_hi, "need 0 < T_lo < T_hi");
    detail::require(options.n_scan >= 2, "scan needs at least two durations");
    detail::require(options.relative_width > 0.0, "refinement width must be positive");

    const ModalResult modal = modal_analysis(model, options.n_modes);
    std::vector<double> grid(static_cast<std::size_t>(options.n_scan));
    for (int i = 0; i < options.n_scan; ++i) {
        grid[i] = i == options.n_scan - 1
                      ? T_hi
                      : T_lo * std::pow(T_hi / T_lo, static_cast<double>(i) / (options.n_scan - 1));
    }
    std::vector<ScanEntry> scan = parallel_map(
        options.n_scan,
        [&](int i) { return evaluate_duration(family, model, modal, limits, grid[i], options); },
        options.threads);

    SearchResult result;
    std::vector<ScanEntry> refined;
    for (int i = 0; i + 1 < options.n_scan; ++i) {
        if (scan[i].pass || !scan[i + 1].pass) {
            continue;
        }
        double lo = scan[i].T;
        double hi = scan[i + 1].T;
        while (hi / lo - 1.0 > options.relative_width) {
            const double mid = std::sqrt(lo * hi);
            ScanEntry e = evaluate_duration(family, model, modal, limits, mid, options);
            e.refined = true;
            (e.pass ? hi : lo) = mid;
            refined.push_back(e);
        }
        result.transitions.emplace_back(lo, hi);
    }
    scan.insert(scan.end(), refined.begin(), refined.end());
    std::sort(scan.begin(), scan.end(), [](const ScanEntry& a, const ScanEntry& b) { return a.T < b.T; });

    const auto first_pass = std::find_if(scan.begin(), scan.end(), [](const ScanEntry& e) { return e.pass; });
    if (first_pass == scan.end()) {
        throw Infeasible("no duration in [" + std::to_string(T_lo) + ", " + std::to_string(T_hi) +
                             "] satisfies the limits",
                         std::move(scan));
    }
    result.T_star = first_pass->T;
    result.scan = std::move(scan);
    return result;
}

} // namespace flexpath
