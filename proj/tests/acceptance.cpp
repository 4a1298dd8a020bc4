// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "flexpath/beam.hpp"
#include "flexpath/beam_dynamics.hpp"
#include "flexpath/beam_modal.hpp"
#include "flexpath/cli/commands.hpp"
#include "flexpath/cli/config.hpp"
#include "flexpath/kinematics.hpp"
#include "flexpath/plate.hpp"
#include "flexpath/safety.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace flexpath;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
    std::array<char, 256> buf{};
    std::snprintf(buf.data(), buf.size(), f, a, b, c);
    return buf.data();
}

constexpr double pi = std::numbers::pi;

BeamModel unit_beam(int n_nodes, Backend backend)
{
    BeamModel m;
    m.E = 1.0;
    m.I = 1.0;
    m.rho = 1.0;
    m.L = 1.0;
    m.h = 0.01;
    m.sigma_yield = 1.0;
    m.n_nodes = n_nodes;
    m.backend = backend;
    return m;
}

BeamModel aluminium(int n_nodes = 31)
{
    BeamModel m;
    m.E = 70e9;
    m.I = 0.02 * std::pow(3e-3, 3) / 12.0;
    m.rho = 2700.0 * 0.02 * 3e-3;
    m.L = 0.5;
    m.h = 1.5e-3;
    m.sigma_yield = 200e6;
    m.n_nodes = n_nodes;
    m.backend = Backend::HermiteFEM;
    return m;
}

double first_period(const BeamModel& m)
{
    return 2.0 * pi / m.natural_frequency(characteristic_roots(1)[0].beta);
}

// Independent oracle: plain long-double bisection on the sign change of cos b cosh b + 1.
long double bisect_root(int k)
{
    auto f = [](long double b) { return std::cos(b) * std::cosh(b) + 1.0L; };
    const long double half_pi = std::numbers::pi_v<long double> / 2;
    long double lo = (k == 1 ? 1.0L : (2 * k - 2)) * half_pi;
    long double hi = 2 * k * half_pi;
    const long double mid = (2 * k - 1) * half_pi;
    if ((f(lo) < 0) != (f(mid) < 0)) {
        hi = mid;
    } else {
        lo = mid;
    }
    const bool lo_negative = f(lo) < 0;
    for (int i = 0; i < 200; ++i) {
        const long double m = 0.5L * (lo + hi);
        ((f(m) < 0) == lo_negative ? lo : hi) = m;
    }
    return 0.5L * (lo + hi);
}

Outcome characteristic_roots_match()
{
    const auto roots = characteristic_roots(6);
    double worst = 0.0;
    double worst_residual = 0.0;
    for (int k = 1; k <= 6; ++k) {
        worst = std::max(worst, std::abs(roots[k - 1].beta - static_cast<double>(bisect_root(k))));
        worst_residual = std::max(worst_residual, roots[k - 1].residual);
    }
    return {worst <= 1e-10 && worst_residual < 1e-10,
            fmt("max |beta - oracle| = %.2e, max residual = %.2e", worst, worst_residual)};
}

double simpson01(const std::function<double(double)>& f, int intervals)
{
    const double h = 1.0 / intervals;
    double sum = f(0.0) + f(1.0);
    for (int i = 1; i < intervals; ++i) {
        sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i * h);
    }
    return sum * h / 3.0;
}

Outcome mode_shape_conditions()
{
    const auto roots = characteristic_roots(5);
    const double b = roots[0].beta;
    auto phi = [&](double x) { return mode_shape(b, x); };
    const double h = 1e-4;
    const double value0 = std::abs(phi(0.0));
    const double slope0 = std::abs((-phi(2 * h) + 8 * phi(h) - 8 * phi(-h) + phi(-2 * h)) / (12 * h));
    const double hc = 1e-3;
    const double curv1 = std::abs(
        (-phi(1 + 2 * hc) + 16 * phi(1 + hc) - 30 * phi(1) + 16 * phi(1 - hc) - phi(1 - 2 * hc)) / (12 * hc * hc));
    auto third = [&](double ht) {
        return (phi(1 + 2 * ht) - 2 * phi(1 + ht) + 2 * phi(1 - ht) - phi(1 - 2 * ht)) / (2 * ht * ht * ht);
    };
    const double third1 = std::abs((4.0 * third(2e-3) - third(4e-3)) / 3.0);
    const double worst_bc = std::max({value0, slope0, curv1, third1});

    double worst_cross = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            auto pi_ = [&](double x) { return mode_shape(roots[i].beta, x); };
            auto pj = [&](double x) { return mode_shape(roots[j].beta, x); };
            const double c = simpson01([&](double x) { return pi_(x) * pj(x); }, 2000);
            const double n = std::sqrt(simpson01([&](double x) { return pi_(x) * pi_(x); }, 2000) *
                                       simpson01([&](double x) { return pj(x) * pj(x); }, 2000));
            worst_cross = std::max(worst_cross, std::abs(c) / n);
        }
    }
    return {worst_bc <= 1e-6 && worst_cross <= 1e-6,
            fmt("max boundary residual = %.2e, max normalized cross product = %.2e", worst_bc, worst_cross)};
}

Outcome static_oracles()
{
    const BeamModel m = unit_beam(201, Backend::FiniteDifference);
    const double q0 = -2.0;
    const Deflection d = solve_static(m, VectorXd::Constant(201, q0));
    const double exact = q0 / 8.0;
    const double fd_error = std::abs(d.w[200] - exact) / std::abs(exact);

    const double EI = 3.7;
    const double L = 1.9;
    const double P = -2.3;
    const FemMatrices one = assemble_fem_unconstrained(EI, 1.0, L, 1);
    const Eigen::Matrix2d K = MatrixXd(one.K).bottomRightCorner(2, 2);
    const Eigen::Vector2d u = K.ldlt().solve(Eigen::Vector2d(P, 0.0));
    const double point = P * L * L * L / (3.0 * EI);
    const double fem_error = std::abs(u[0] - point) / std::abs(point);
    return {fd_error <= 1e-3 && fem_error <= 1e-12,
            fmt("FD uniform-load tip error = %.2e, one-element tip-load error = %.2e", fd_error, fem_error)};
}

Outcome backend_agreement()
{
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const BeamModel fd = unit_beam(101, Backend::FiniteDifference);
    const BeamModel fem = unit_beam(101, Backend::HermiteFEM);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const double a0 = coef(rng), a1 = coef(rng), a2 = coef(rng), b1 = coef(rng), b2 = coef(rng);
        VectorXd q(101);
        for (int i = 0; i < 101; ++i) {
            const double x = fd.node_x(i);
            q[i] = a0 + a1 * std::sin(pi * x) + a2 * std::sin(2 * pi * x) + b1 * std::cos(pi * x) + b2 * x * x;
        }
        const VectorXd w_fd = solve_static(fd, q).w;
        const VectorXd w_fem = solve_static(fem, q).w;
        worst = std::max(worst, (w_fd - w_fem).norm() / w_fem.norm());
    }
    return {worst <= 1e-3, fmt("max relative L2 difference = %.2e", worst)};
}

Outcome newmark_energy_and_order()
{
    const BeamModel m = aluminium();
    const BeamSystem sys = assemble(m);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> eig{MatrixXd(sys.K), MatrixXd(sys.M)};
    const VectorXd mode = eig.eigenvectors().col(0);
    const double period = 2.0 * pi / std::sqrt(eig.eigenvalues()[0]);
    const VectorXd zero_q = VectorXd::Zero(m.n_nodes);
    const LoadProvider free = [&](double) { return LoadSample{zero_q, 0.0}; };
    NewmarkIntegrator integ(sys);
    BeamState s = integ.make_state(0.0, 1e-3 * mode / mode[sys.tip_dof()], VectorXd::Zero(sys.n_dofs()), free);
    const double e0 = integ.kinetic_energy(s) + integ.strain_energy(s);
    double drift = 0.0;
    for (int k = 0; k < 2000; ++k) {
        s = integ.step(s, period / 200.0, free);
        drift = std::max(drift, std::abs(integ.kinetic_energy(s) + integ.strain_energy(s) - e0) / e0);
    }

    const BeamModel mc = aluminium(21);
    const BeamSystem sc = assemble(mc);
    const double T = 3.0 * first_period(mc);
    const LoadProvider ramp = [&](double t) {
        const double r = std::sin(pi * t / (2.0 * T));
        return LoadSample{VectorXd::Constant(mc.n_nodes, -mc.rho * 9.81 * r * r), 0.0};
    };
    auto run = [&](int steps) {
        NewmarkIntegrator ig(sc);
        BeamState st = ig.rest_state(0.0, ramp);
        for (int k = 1; k <= steps; ++k) {
            st = ig.step_to(st, T * k / steps, ramp);
        }
        return st.u;
    };
    const int base = 480;
    const VectorXd ref = run(16 * base);
    const double order = std::log2((run(base) - ref).norm() / (run(2 * base) - ref).norm());
    return {drift <= 1e-6 && order >= 1.7 && order <= 2.3,
            fmt("energy drift over 10 periods = %.2e, temporal order = %.3f", drift, order)};
}

// Spin up from rest with a smoothstep rate ramp over one fundamental period, then hold
// the rate; returns the peak tip deflection during the last of `hold_periods` periods.
double sustained_rotation_peak(const BeamModel& m, double rate, int hold_periods)
{
    const BeamSystem sys = assemble(m);
    const double P = first_period(m);
    const VectorXd x = m.node_positions();
    auto theta_of = [&](double t) {
        KinematicSample k;
        if (t < P) {
            const double s = t / P;
            k.value = rate * P * (s * s * s - 0.5 * s * s * s * s);
            k.d1 = rate * (3.0 * s * s - 2.0 * s * s * s);
            k.d2 = rate / P * (6.0 * s - 6.0 * s * s);
            k.d3 = rate / (P * P) * (6.0 - 12.0 * s);
        } else {
            k.value = 0.5 * rate * P + rate * (t - P);
            k.d1 = rate;
        }
        return k;
    };
    const LoadProvider load = [&](double t) {
        const KinematicSample th = theta_of(t);
        LoadSample ls;
        ls.q.resize(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            ls.q[i] = beam_load(x[i], 0.0, th, KinematicSample{}, m.rho, 9.81).total;
        }
        ls.spin_rate_sq = th.d1 * th.d1;
        return ls;
    };
    NewmarkIntegrator integ(sys);
    BeamState s = integ.rest_state(0.0, load);
    const int per_period = 200;
    const int total = per_period * (1 + hold_periods);
    double peak = 0.0;
    for (int k = 1; k <= total; ++k) {
        s = integ.step_to(s, P * k / per_period, load);
        if (k > total - per_period) {
            peak = std::max(peak, std::abs(s.u[sys.tip_dof()]));
        }
    }
    return peak;
}

Outcome resonance_growth()
{
    const BeamModel m = aluminium();
    const double omega1 = m.natural_frequency(characteristic_roots(1)[0].beta);
    const double on = sustained_rotation_peak(m, omega1, 5);
    const double off = sustained_rotation_peak(m, 0.5 * omega1, 5);
    return {on >= 5.0 * off, fmt("tip amplitude at omega_1 / at omega_1/2 = %.2f", on / off)};
}

Outcome quasi_static_limit()
{
    const BeamModel m = aluminium();
    const double P = first_period(m);
    const Trajectory traj = make_rest_to_rest(Generator::Quintic, pi / 2, 0.0, 0.0, 20.0 * P);
    SimulationOptions opts;
    opts.dt = P / 50.0;
    const SimulationResult dyn = simulate(m, traj, opts);
    opts.mode = SimulationMode::QuasiStatic;
    const SimulationResult qs = simulate(m, traj, opts);
    const double diff = (dyn.w - qs.w).cwiseAbs().maxCoeff() / qs.w.cwiseAbs().maxCoeff();
    return {diff <= 0.05, fmt("max-norm difference / max-norm static = %.4f", diff)};
}

Outcome discrete_frequency()
{
    const ModalResult r = modal_analysis(unit_beam(51, Backend::HermiteFEM), 1);
    return {r.discrete_deviation[0] <= 1e-4, fmt("FEM omega_1 relative deviation = %.2e", r.discrete_deviation[0])};
}

double plate_centre_coefficient(int n)
{
    PlateModel p;
    p.E = 70e9;
    p.nu = 0.3;
    p.h = 1e-3;
    p.rho = 2700.0;
    p.a = 0.4;
    p.b = 0.4;
    p.nx = n;
    p.ny = n;
    p.clamped_edges = {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top};
    const double q = 10.0;
    const PlateSolution s = solve_plate_static(p, Grid::Constant(n, n, q));
    return -s.w0(n / 2, n / 2) * p.D() / (q * std::pow(p.a, 4));
}

Outcome plate_clamped_square()
{
    // Richardson extrapolation of the 65 and 129 grids, assuming second order; frozen.
    constexpr double oracle = 0.00126532;
    const double c33 = plate_centre_coefficient(33);
    const double c65 = plate_centre_coefficient(65);
    const double c129 = plate_centre_coefficient(129);
    const double order = std::log2((c33 - c65) / (c65 - c129));
    const double error = std::abs(c129 - oracle) / oracle;
    return {error <= 0.02 && order >= 1.7 && order <= 2.3,
            fmt("coefficient at 129 = %.8f, relative error = %.2e, order = %.3f", c129, error, order)};
}

Outcome von_mises_identities()
{
    bool ok = true;
    for (double s : {1.0, -2.0, 3.5, 0.25, 1024.0}) {
        ok = ok && von_mises(s, 0.0, 0.0) == std::abs(s);
        ok = ok && von_mises(0.0, 0.0, s) == std::sqrt(3.0) * std::abs(s);
    }
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1e8, 1e8);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng);
        const double v = von_mises(a, b, c);
        // Power-of-two scaling is exact in floating point.
        ok = ok && von_mises(4.0 * a, 4.0 * b, 4.0 * c) == 4.0 * v && von_mises(-a, -b, -c) == v;
        const double alpha = 0.5 + std::abs(u(rng)) * 1e-8;
        worst = std::max(worst, std::abs(von_mises(alpha * a, alpha * b, alpha * c) - alpha * v) / (alpha * v));
    }
    return {ok && worst <= 1e-15, fmt("exact identities hold: %.0f, homogeneity error = %.2e", ok ? 1.0 : 0.0, worst)};
}

Outcome kinematics_cases()
{
    double worst = 0.0;
    const Vec3 axes[] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    for (const Vec3& n : axes) {
        for (double rate : {-1.5, 0.5, 2.0}) {
            worst = std::max(worst, (angular_velocity(axis_rotation(n, 0.7, rate)).omega - rate * n).norm());
        }
    }
    const double Omega = 3.0;
    FrameMotion spin;
    spin.omega = Vec3(0.0, 0.0, Omega);
    const bool centripetal =
        inertial_acceleration(Vec3::Zero(), spin, Vec3::UnitX(), Vec3::Zero()) == Vec3(-Omega * Omega, 0.0, 0.0);
    const bool coriolis =
        inertial_acceleration(Vec3::Zero(), spin, Vec3::Zero(), Vec3::UnitX()) == Vec3(0.0, 2.0 * Omega, 0.0);
    return {worst <= 1e-10 && centripetal && coriolis,
            fmt("axis-rate error = %.2e, centripetal exact: %.0f, Coriolis exact: %.0f", worst, centripetal ? 1.0 : 0.0,
                coriolis ? 1.0 : 0.0)};
}

Outcome inverse_search()
{
    const BeamModel m = aluminium(21);
    const double sag = m.h * m.E * m.rho * 9.81 * m.L * m.L / (2.0 * m.EI());
    const TrajectoryFamily lower = [](double T) {
        return make_rest_to_rest(Generator::Quintic, pi / 2, 0.0, 0.0, T);
    };
    SafetyLimits limits{1.3 * sag, 1e30, 1e30, 0.1};
    SearchOptions opts;
    const SearchResult r = min_time_search(lower, m, limits, 0.05, 3.0, opts);
    const ModalResult modal = modal_analysis(m, opts.n_modes);
    const bool recheck = evaluate_duration(lower, m, modal, limits, r.T_star, opts).pass;
    bool consistent = true;
    for (const ScanEntry& e : r.scan) {
        consistent = consistent && (e.T < r.T_star ? !e.pass : e.pass);
    }

    bool infeasible = false;
    SafetyLimits tight = limits;
    tight.sigma_max = 0.9 * sag;
    SearchOptions quick = opts;
    quick.n_scan = 4;
    try {
        min_time_search(lower, m, tight, 0.5, 2.0, quick);
    } catch (const Infeasible& e) {
        infeasible = e.scan().size() == 4;
    }
    return {recheck && consistent && infeasible,
            fmt("T* = %.4f s, re-evaluation passes: %.0f, infeasible detected: %.0f", r.T_star, recheck ? 1.0 : 0.0,
                infeasible ? 1.0 : 0.0) +
                (consistent ? "" : ", scan inconsistent")};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome deterministic_simulate()
{
    const std::string text = R"({
      "beam": {"E": 70e9, "I": 4.5e-11, "rho": 0.162, "L": 0.5, "h": 1.5e-3, "sigma_yield": 2e8, "n_nodes": 31},
      "trajectory": {"theta0": 0.0, "theta1": 1.2, "R": 0.2, "T": 0.6},
      "sim": {"dt": 5e-4}
    })";
    const cli::RunConfig cfg = cli::parse_config_string(text);
    const fs::path root = fs::temp_directory_path() / ("flexpath_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const int a = cli::run("simulate", cfg, {root / "a", true});
    const int b = cli::run("simulate", cfg, {root / "b", true});
    bool same = a == 0 && b == 0;
    std::size_t files = 0;
    for (const char* name : {"simulate.csv", "simulate_summary.json"}) {
        const std::string x = slurp(root / "a" / name);
        same = same && !x.empty() && x == slurp(root / "b" / name);
        ++files;
    }
    fs::remove_all(root);
    return {same, fmt("%.0f output files compared", static_cast<double>(files))};
}

} // namespace

int main()
{
    struct Criterion {
        const char* description;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {"characteristic roots match bisection oracle", characteristic_roots_match},
        {"mode shapes satisfy clamped-free conditions and are orthogonal", mode_shape_conditions},
        {"static cantilever oracles", static_oracles},
        {"finite-difference and Hermite backends agree", backend_agreement},
        {"Newmark energy conservation and second-order convergence", newmark_energy_and_order},
        {"resonant rotation rate grows the tip amplitude", resonance_growth},
        {"slow rotation approaches the quasi-static solution", quasi_static_limit},
        {"discrete fundamental frequency", discrete_frequency},
        {"clamped square plate deflection and grid convergence", plate_clamped_square},
        {"von Mises identities", von_mises_identities},
        {"angular velocity and inertial acceleration", kinematics_cases},
        {"minimum-time search and infeasibility detection", inverse_search},
        {"repeated simulate runs are byte-identical", deterministic_simulate},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].description, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
