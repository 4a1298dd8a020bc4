#pragma once

// Natural modes of the clamped-free rod and resonance proximity of a rotation profile.

#include "flexpath/beam.hpp"
#include "flexpath/error.hpp"
#include "flexpath/quadrature.hpp"
#include "flexpath/trajectory.hpp"

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>
#include <vector>

namespace flexpath {

struct CharacteristicRoot {
    double beta = 0.0;
    double residual = 0.0;  // |cos b cosh b + 1| at the extended-precision root
};

/// First n positive roots of cos(b) cosh(b) + 1 = 0, 1 <= n <= 12.
///
/// Root k is bracketed by [(2k-1)pi/2, k pi] for odd k and [(k-1) pi, (2k-1)pi/2] for even k
/// (the function is 1 at the odd multiples of pi/2). Bisection runs in quad precision:
/// cosh(b) reaches 1e16 at b = 37, far beyond what a double-rounded root can satisfy.
inline std::vector<CharacteristicRoot> characteristic_roots(int n)
{
    detail::require(n >= 1 && n <= 12, "characteristic_roots supports 1..12 roots");
    using quad = boost::multiprecision::cpp_bin_float_quad;
    const quad pi = boost::math::constants::pi<quad>();
    auto f = [](const quad& b) { return cos(b) * cosh(b) + 1; };
    auto df = [](const quad& b) { return -sin(b) * cosh(b) + cos(b) * sinh(b); };

    std::vector<CharacteristicRoot> roots;
    for (int k = 1; k <= n; ++k) {
        const quad mid = (2 * k - 1) * pi / 2;
        quad lo = k % 2 == 1 ? mid : (k - 1) * pi;
        quad hi = k % 2 == 1 ? k * pi : mid;
        quad f_lo = f(lo);
        quad b = (lo + hi) / 2;
        for (int iter = 0; iter < 400; ++iter) {
            b = (lo + hi) / 2;
            const quad fb = f(b);
            if (abs(fb) < quad(1e-12)) {
                break;
            }
            if ((fb < 0) == (f_lo < 0)) {
                lo = b;
                f_lo = fb;
            } else {
                hi = b;
            }
        }
        b -= f(b) / df(b);
        roots.push_back({static_cast<double>(b), static_cast<double>(abs(f(b)))});
    }
    return roots;
}

enum class ModeNormalization { Unnormalized, UnitTip };

/// Clamped-free mode shape at dimensionless x in [0, 1].
///
/// Evaluated as e^{-bx} - cos bx + c sin bx + (1 - c) sinh bx with
/// c = (cosh b + cos b)/(sin b + sinh b); identical to
/// cosh bx - cos bx + c (sin bx - sinh bx) without the cancellation of cosh - c sinh.
inline double mode_shape(double beta, double x, ModeNormalization norm = ModeNormalization::UnitTip)
{
    detail::require(beta > 0.0, "beta must be positive");
    const double denom = std::sin(beta) + std::sinh(beta);
    const double c = (std::cosh(beta) + std::cos(beta)) / denom;
    const double one_minus_c = (std::sin(beta) - std::cos(beta) - std::exp(-beta)) / denom;
    auto raw = [&](double s) {
        return std::exp(-beta * s) - std::cos(beta * s) + c * std::sin(beta * s) +
               one_minus_c * std::sinh(beta * s);
    };
    const double value = raw(x);
    return norm == ModeNormalization::UnitTip ? value / raw(1.0) : value;
}

struct ModalResult {
    std::vector<double> betas;
    std::vector<double> residuals;
    MatrixXd mode_shapes;                    // n_modes x n_nodes, unit tip displacement
    std::vector<double> natural_rates;       // dimensionless, omega_n * time_scale = sqrt(lambda) b^2
    std::vector<double> omega;               // [rad/s], b^2 sqrt(EI / (rho L^4))
    std::vector<double> discrete_omega;      // from the assembled (K, M) pair
    std::vector<double> discrete_deviation;  // |discrete - analytic| / analytic
};

/// Generalized eigenvalues of K v = omega^2 M v, ascending, as angular frequencies.
inline std::vector<double> discrete_frequencies(const BeamSystem& sys, int count)
{
    const MatrixXd K(sys.K);
    const MatrixXd M(sys.M);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(K, M, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("generalized eigen-solve failed");
    }
    std::vector<double> out;
    for (int i = 0; i < count && i < solver.eigenvalues().size(); ++i) {
        out.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()[i])));
    }
    return out;
}

/// time_scale is the T used by the non-dimensional rates (theta_dot_n = sqrt(lambda) b_n^2).
inline ModalResult modal_analysis(const BeamModel& model, int n_modes, double time_scale = 1.0)
{
    model.validate();
    detail::require(n_modes >= 1, "need at least one mode");
    detail::require(time_scale > 0.0, "time scale must be positive");
    const BeamSystem sys = assemble(model);
    detail::require(n_modes <= sys.n_dofs(), "more modes requested than degrees of freedom");

    ModalResult out;
    const auto roots = characteristic_roots(n_modes);
    const std::vector<double> discrete = discrete_frequencies(sys, n_modes);
    out.mode_shapes.resize(n_modes, model.n_nodes);
    for (int m = 0; m < n_modes; ++m) {
        const double beta = roots[m].beta;
        out.betas.push_back(beta);
        out.residuals.push_back(roots[m].residual);
        for (int i = 0; i < model.n_nodes; ++i) {
            out.mode_shapes(m, i) = mode_shape(beta, model.node_x(i) / model.L);
        }
        const double omega = model.natural_frequency(beta);
        out.omega.push_back(omega);
        out.natural_rates.push_back(omega * time_scale);
        out.discrete_omega.push_back(discrete[m]);
        out.discrete_deviation.push_back(std::abs(discrete[m] - omega) / omega);
    }
    return out;
}

struct ResonanceGap {
    double gap = 1.0;   // min over t of | |theta_dot| - omega_n | / omega_n
    double time = 0.0;
    bool flagged = false;
};

/// Closest approach of the rotation rate to each natural frequency.
inline std::vector<ResonanceGap> resonance_proximity(const Trajectory& traj, const ModalResult& modal,
                                                     double flag_below = 0.1, int n_samples = 2001)
{
    detail::require(!modal.omega.empty(), "modal result has no modes");
    detail::require(n_samples >= 2, "need at least two samples");
    const double T = traj.total_time();
    auto rate = [&](double t) { return std::abs(traj.theta().sample(std::clamp(t, 0.0, T)).d1); };
    const double step = T / (n_samples - 1);

    std::vector<ResonanceGap> out;
    for (double omega : modal.omega) {
        auto gap = [&](double t) { return std::abs(rate(t) - omega) / omega; };
        ResonanceGap best{gap(0.0), 0.0, false};
        int best_index = 0;
        double prev_sign = rate(0.0) - omega;
        for (int i = 1; i < n_samples; ++i) {
            const double t = i == n_samples - 1 ? T : i * step;
            const double diff = rate(t) - omega;
            if (diff == 0.0 || (diff < 0.0) != (prev_sign < 0.0)) {
                // The rate crosses omega inside [t - step, t]: locate the crossing.
                double lo = t - step;
                double hi = t;
                const bool lo_negative = prev_sign < 0.0;
                for (int k = 0; k < 200 && hi - lo > 1e-14 * T; ++k) {
                    const double mid = 0.5 * (lo + hi);
                    if ((rate(mid) - omega < 0.0) == lo_negative) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                const double tc = 0.5 * (lo + hi);
                if (gap(tc) < best.gap) {
                    best = {gap(tc), tc, false};
                    best_index = -1;
                }
            }
            if (gap(t) < best.gap) {
                best = {gap(t), t, false};
                best_index = i;
            }
            prev_sign = diff;
        }
        if (best_index >= 0) {
            const double lo = std::max(0, best_index - 1) * step;
            const double hi = std::min(T, (best_index + 1) * step);
            const double t = golden_section_maximize([&](double s) { return -gap(s); }, lo, hi, 1e-12 * T);
            if (gap(t) < best.gap) {
                best = {gap(t), t, false};
            }
        }
        best.flagged = best.gap < flag_below;
        out.push_back(best);
    }
    return out;
}

} // namespace flexpath
