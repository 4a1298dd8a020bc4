#include "flexpath/safety.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace flexpath;

namespace {

BeamModel strip(int n_nodes = 41)
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

double sag_root_stress(const BeamModel& m, double g = 9.81)
{
    return m.h * m.E * m.rho * g * m.L * m.L / (2.0 * m.EI());
}

SafetyLimits generous()
{
    return {1e30, 1e30, 1e30, 0.1};
}

TrajectoryFamily quarter_turn()
{
    return [](double T) { return make_rest_to_rest(Generator::Quintic, 0.0, std::numbers::pi / 2, 0.0, T); };
}

} // namespace

TEST(VonMises, Examples)
{
    EXPECT_DOUBLE_EQ(von_mises(5.0, 0.0, 0.0), 5.0);
    EXPECT_DOUBLE_EQ(von_mises(0.0, -5.0, 0.0), 5.0);
    EXPECT_NEAR(von_mises(0.0, 0.0, 2.0), 2.0 * std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(von_mises(1.0, 1.0, 0.0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(von_mises(1.0, 1.0, 0.0, VonMisesForm::Classical), 1.0, 1e-15);
    EXPECT_NEAR(von_mises(1.0, -1.0, 0.0, VonMisesForm::Classical), std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(von_mises(0.0, 0.0, 2.0, VonMisesForm::Classical), 2.0 * std::sqrt(3.0), 1e-15);
}

TEST(VonMises, Properties)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1e8, 1e8);
    for (int k = 0; k < 200; ++k) {
        const double a = u(rng), b = u(rng), c = u(rng);
        for (VonMisesForm f : {VonMisesForm::Printed, VonMisesForm::Classical}) {
            const double v = von_mises(a, b, c, f);
            EXPECT_GE(v, 0.0);
            EXPECT_NEAR(von_mises(b, a, c, f), v, 1e-15 * v);
            EXPECT_NEAR(von_mises(a, b, -c, f), v, 1e-15 * v);
            EXPECT_NEAR(von_mises(-3.0 * a, -3.0 * b, -3.0 * c, f), 3.0 * v, 1e-14 * v);
        }
    }
}

TEST(VonMises, GridOverload)
{
    StressGrids s{Grid::Constant(3, 4, 1.0), Grid::Constant(3, 4, 1.0), Grid::Zero(3, 4)};
    s.s12(2, 3) = 1.0;
    const Grid vm = von_mises(s);
    EXPECT_NEAR(vm(0, 0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(vm(2, 3), std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(von_mises(s, VonMisesForm::Classical)(2, 3), 2.0, 1e-15);
}

TEST(SafetyLimits, Validation)
{
    EXPECT_NO_THROW(generous().validate());
    SafetyLimits bad = generous();
    bad.sigma_max = 0.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = generous();
    bad.resonance_gap_min = -0.1;
    EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Evaluate, UnloadedRodPassesWithInfiniteMargins)
{
    const BeamModel m = strip();
    const Trajectory traj = constant_trajectory(0.4, 1.0);
    SimulationOptions opts;
    opts.gravity = 0.0;
    opts.dt = 0.01;
    const SimulationResult sim = simulate(m, traj, opts);
    const SafetyReport r = evaluate(sim, traj, modal_analysis(m, 2), SafetyLimits{1.0, 1.0, 1.0, 0.1});
    EXPECT_EQ(r.peak_stress, 0.0);
    EXPECT_TRUE(std::isinf(r.margins.stress));
    EXPECT_TRUE(std::isinf(r.margins.theta_jerk));
    EXPECT_TRUE(std::isinf(r.margins.r_jerk));
    EXPECT_TRUE(r.pass);
}

TEST(Evaluate, HorizontalHoldReportsRootStress)
{
    const BeamModel m = strip(101);
    const Trajectory traj = constant_trajectory(0.0, 0.5);
    SimulationOptions opts;
    opts.mode = SimulationMode::QuasiStatic;
    opts.dt = 0.05;
    const SimulationResult sim = simulate(m, traj, opts);
    const SafetyReport r = evaluate(sim, traj, modal_analysis(m, 2), generous());
    const double expected = sag_root_stress(m);
    EXPECT_NEAR(r.peak_stress, expected, 1e-3 * expected);
    EXPECT_EQ(r.peak_stress_x, 0.0);
    EXPECT_EQ(r.peak_stress_t, 0.0);
    EXPECT_FALSE(r.peak_in_hold);
    EXPECT_TRUE(r.pass);
}

TEST(Evaluate, PassAgreesWithMargins)
{
    const BeamModel m = strip();
    const Trajectory traj = make_rest_to_rest(Generator::Quintic, 0.0, 1.0, 0.0, 1.5);
    SimulationOptions opts;
    opts.dt = 2e-3;
    const SimulationResult sim = simulate(m, traj, opts);
    const ModalResult modal = modal_analysis(m, 3);
    const SafetyReport base = evaluate(sim, traj, modal, generous());
    ASSERT_GT(base.peak_stress, 0.0);
    EXPECT_NEAR(base.peak_theta_jerk.value, 60.0 / std::pow(1.5, 3), 1e-9);

    SafetyLimits tight = generous();
    tight.sigma_max = 0.99 * base.peak_stress;
    SafetyReport r = evaluate(sim, traj, modal, tight);
    EXPECT_LT(r.margins.stress, 1.0);
    EXPECT_FALSE(r.pass);
    tight.sigma_max = base.peak_stress;
    r = evaluate(sim, traj, modal, tight);
    EXPECT_DOUBLE_EQ(r.margins.stress, 1.0);
    EXPECT_TRUE(r.pass);

    tight = generous();
    tight.jerk_max_theta = 0.5 * base.peak_theta_jerk.value;
    r = evaluate(sim, traj, modal, tight);
    EXPECT_NEAR(r.margins.theta_jerk, 0.5, 1e-12);
    EXPECT_FALSE(r.pass);

    // A gap threshold above every attained gap fails the resonance check alone.
    tight = generous();
    tight.resonance_gap_min = 1.0;
    r = evaluate(sim, traj, modal, tight);
    EXPECT_GE(r.margins.stress, 1.0);
    EXPECT_FALSE(r.pass);
}

TEST(Evaluate, PlateStressCanDominate)
{
    const BeamModel m = strip();
    const Trajectory traj = constant_trajectory(0.0, 0.2);
    SimulationOptions opts;
    opts.mode = SimulationMode::QuasiStatic;
    opts.dt = 0.1;
    const SimulationResult sim = simulate(m, traj, opts);
    PlateSolution plate;
    plate.hx = 0.1;
    plate.hy = 0.2;
    plate.sigma_top = {Grid::Zero(3, 3), Grid::Zero(3, 3), Grid::Zero(3, 3)};
    plate.sigma_top.s11(2, 1) = 1e9;
    const SafetyReport r = evaluate(sim, traj, modal_analysis(m, 1), generous(), &plate);
    EXPECT_TRUE(r.peak_on_plate);
    EXPECT_DOUBLE_EQ(r.peak_stress, 1e9);
    EXPECT_DOUBLE_EQ(r.peak_stress_x, 0.1);
    EXPECT_DOUBLE_EQ(r.peak_stress_y, 0.4);
}

TEST(Evaluate, RejectsMismatchedSpan)
{
    const BeamModel m = strip(11);
    SimulationOptions opts;
    opts.dt = 0.1;
    const SimulationResult sim = simulate(m, constant_trajectory(0.0, 1.0), opts);
    EXPECT_THROW(evaluate(sim, constant_trajectory(0.0, 2.0), modal_analysis(m, 1), generous()), InvalidArgument);
}

TEST(MinTimeSearch, GenerousLimitsReturnLowerBound)
{
    const SearchResult r = min_time_search(quarter_turn(), strip(21), generous(), 0.2, 2.0);
    EXPECT_DOUBLE_EQ(r.T_star, 0.2);
    EXPECT_TRUE(r.transitions.empty());
    EXPECT_EQ(r.scan.size(), 12u);
    EXPECT_TRUE(std::is_sorted(r.scan.begin(), r.scan.end(),
                               [](const ScanEntry& a, const ScanEntry& b) { return a.T < b.T; }));
}

TEST(MinTimeSearch, JerkLimitedDuration)
{
    // With stress unconstrained, the quintic's peak jerk 60 delta / T^3 sets the answer.
    SafetyLimits limits = generous();
    limits.jerk_max_theta = 100.0;
    const double exact = std::cbrt(60.0 * (std::numbers::pi / 2) / limits.jerk_max_theta);
    SearchOptions opts;
    opts.relative_width = 1e-3;
    const SearchResult r = min_time_search(quarter_turn(), strip(21), limits, 0.1, 5.0, opts);
    EXPECT_GE(r.T_star, exact);
    EXPECT_LE(r.T_star, exact * (1.0 + opts.relative_width));
    ASSERT_EQ(r.transitions.size(), 1u);
    EXPECT_LE(r.transitions[0].second / r.transitions[0].first - 1.0, opts.relative_width);
}

TEST(MinTimeSearch, InfeasibleWhenHoldExceedsLimit)
{
    const BeamModel m = strip(21);
    SafetyLimits limits = generous();
    limits.sigma_max = 0.5 * sag_root_stress(m);
    const auto family = [](double T) { return make_rest_to_rest(Generator::Quintic, 0.3, 0.0, 0.0, T); };
    SearchOptions opts;
    opts.n_scan = 4;
    try {
        min_time_search(family, m, limits, 0.5, 2.0, opts);
        FAIL() << "expected Infeasible";
    } catch (const Infeasible& e) {
        ASSERT_EQ(e.scan().size(), 4u);
        for (const auto& entry : e.scan()) {
            EXPECT_FALSE(entry.pass);
            EXPECT_GT(entry.peak_stress, limits.sigma_max);
        }
    }
}

TEST(MinTimeSearch, LooserStressLimitNeverLengthensMotion)
{
    const BeamModel m = strip(21);
    const auto family = [](double T) {
        return make_rest_to_rest(Generator::Quintic, std::numbers::pi / 2, 0.0, 0.0, T);
    };
    SafetyLimits limits = generous();
    limits.sigma_max = 1.3 * sag_root_stress(m);
    SearchOptions opts;
    const SearchResult tight = min_time_search(family, m, limits, 0.05, 3.0, opts);
    SafetyLimits loose = limits;
    loose.sigma_max *= 2.0;
    const SearchResult relaxed = min_time_search(family, m, loose, 0.05, 3.0, opts);
    EXPECT_LE(relaxed.T_star, tight.T_star);

    const ModalResult modal = modal_analysis(m, opts.n_modes);
    EXPECT_TRUE(evaluate_duration(family, m, modal, limits, tight.T_star, opts).pass);
    const double shorter = tight.T_star / (1.0 + opts.relative_width);
    if (shorter >= 0.05) {
        EXPECT_FALSE(evaluate_duration(family, m, modal, limits, shorter, opts).pass);
    }
}

TEST(MinTimeSearch, RejectsBadBounds)
{
    EXPECT_THROW(min_time_search(quarter_turn(), strip(21), generous(), 2.0, 1.0), InvalidArgument);
    EXPECT_THROW(min_time_search(quarter_turn(), strip(21), generous(), 0.0, 1.0), InvalidArgument);
}
