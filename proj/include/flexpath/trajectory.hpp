#pragma once

#include "flexpath/error.hpp"
#include "flexpath/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace flexpath {

/// Value and first three time derivatives of a scalar coordinate.
struct KinematicSample {
    double value = 0.0;
    double d1 = 0.0;  // velocity
    double d2 = 0.0;  // acceleration
    double d3 = 0.0;  // jerk
};

/// Polynomial in local time tau in [0, duration], coefficients in ascending degree.
class PolynomialSegment {
public:
    static constexpr int max_degree = 7;

    PolynomialSegment(std::vector<double> coefficients, double duration)
        : coefficients_(std::move(coefficients)), duration_(duration)
    {
        detail::require(duration_ > 0.0 && std::isfinite(duration_),
                        "segment duration must be positive");
        detail::require(!coefficients_.empty(), "segment needs at least one coefficient");
        detail::require(static_cast<int>(coefficients_.size()) <= max_degree + 1,
                        "segment degree must not exceed 7");
        for (double c : coefficients_) {
            detail::require(std::isfinite(c), "segment coefficients must be finite");
        }
        derivatives_[0] = coefficients_;
        for (int k = 1; k < 4; ++k) {
            const auto& prev = derivatives_[k - 1];
            auto& next = derivatives_[k];
            for (std::size_t i = 1; i < prev.size(); ++i) {
                next.push_back(prev[i] * static_cast<double>(i));
            }
        }
    }

    [[nodiscard]] const std::vector<double>& coefficients() const { return coefficients_; }
    [[nodiscard]] double duration() const { return duration_; }
    [[nodiscard]] int degree() const { return static_cast<int>(coefficients_.size()) - 1; }

    /// order-th derivative at local time tau (order 0..3), Horner evaluation.
    [[nodiscard]] double derivative(int order, double tau) const
    {
        const auto& c = derivatives_[order];
        double acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            acc = acc * tau + *it;
        }
        return acc;
    }

    [[nodiscard]] KinematicSample sample(double tau) const
    {
        return {derivative(0, tau), derivative(1, tau), derivative(2, tau), derivative(3, tau)};
    }

private:
    std::vector<double> coefficients_;
    double duration_;
    std::vector<double> derivatives_[4];
};

/// Consecutive segments; segment k starts where segment k-1 ends.
class PiecewisePolynomial {
public:
    explicit PiecewisePolynomial(PolynomialSegment segment) : segments_{std::move(segment)} {}

    explicit PiecewisePolynomial(std::vector<PolynomialSegment> segments)
        : segments_(std::move(segments))
    {
        detail::require(!segments_.empty(), "piecewise polynomial needs at least one segment");
    }

    [[nodiscard]] const std::vector<PolynomialSegment>& segments() const { return segments_; }

    [[nodiscard]] double duration() const
    {
        double total = 0.0;
        for (const auto& s : segments_) {
            total += s.duration();
        }
        return total;
    }

    /// Sample at global time t in [0, duration()]. Breakpoints belong to the later segment.
    [[nodiscard]] KinematicSample sample(double t) const
    {
        double start = 0.0;
        for (std::size_t k = 0; k + 1 < segments_.size(); ++k) {
            if (t < start + segments_[k].duration()) {
                return segments_[k].sample(t - start);
            }
            start += segments_[k].duration();
        }
        return segments_.back().sample(t - start);
    }

    [[nodiscard]] std::vector<double> breakpoints() const
    {
        std::vector<double> out{0.0};
        for (const auto& s : segments_) {
            out.push_back(out.back() + s.duration());
        }
        return out;
    }

private:
    std::vector<PolynomialSegment> segments_;
};

/// s(t) = q0 + (q1 - q0)(3 tau^2 - 2 tau^3), tau = t/T.
inline PolynomialSegment cubic_rest_to_rest(double q0, double q1, double T)
{
    detail::require(T > 0.0 && std::isfinite(T), "rest-to-rest duration must be positive");
    const double delta = q1 - q0;
    return PolynomialSegment({q0, 0.0, 3.0 * delta / (T * T), -2.0 * delta / (T * T * T)}, T);
}

/// s(t) = q0 + (q1 - q0)(10 tau^3 - 15 tau^4 + 6 tau^5): zero velocity and acceleration at both ends.
inline PolynomialSegment quintic_rest_to_rest(double q0, double q1, double T)
{
    detail::require(T > 0.0 && std::isfinite(T), "rest-to-rest duration must be positive");
    const double delta = q1 - q0;
    const double T3 = T * T * T;
    return PolynomialSegment(
        {q0, 0.0, 0.0, 10.0 * delta / T3, -15.0 * delta / (T3 * T), 6.0 * delta / (T3 * T * T)}, T);
}

enum class Generator { Cubic, Quintic };

/// Arm rotation theta(t) [rad] and extension r(t) [m] over [0, T], at rest at both ends.
class Trajectory {
public:
    static constexpr double endpoint_tolerance = 1e-12;

    Trajectory(PiecewisePolynomial theta, PiecewisePolynomial r)
        : theta_(std::move(theta)), r_(std::move(r))
    {
        total_time_ = theta_.duration();
        const double mismatch = std::abs(r_.duration() - total_time_);
        detail::require(mismatch <= endpoint_tolerance * total_time_,
                        "theta and r must span the same duration");
        check_rest("theta", theta_);
        check_rest("r", r_);
        const double r0 = r_.sample(0.0).value;
        const double r_scale = std::max(1.0, std::abs(r_.sample(total_time_).value));
        detail::require(std::abs(r0) <= endpoint_tolerance * r_scale, "r(0) must be 0");
        check_continuity("theta", theta_);
        check_continuity("r", r_);
    }

    [[nodiscard]] const PiecewisePolynomial& theta() const { return theta_; }
    [[nodiscard]] const PiecewisePolynomial& r() const { return r_; }
    [[nodiscard]] double total_time() const { return total_time_; }

private:
    void check_rest(const std::string& name, const PiecewisePolynomial& p) const
    {
        const KinematicSample a = p.sample(0.0);
        const KinematicSample b = p.sample(total_time_);
        const double scale = std::max({1.0, std::abs(a.value), std::abs(b.value)}) / total_time_;
        detail::require(std::abs(a.d1) <= endpoint_tolerance * scale &&
                            std::abs(b.d1) <= endpoint_tolerance * scale,
                        name + " must start and end at rest");
    }

    // Position and velocity must be continuous across breakpoints.
    static void check_continuity(const std::string& name, const PiecewisePolynomial& p)
    {
        const auto& segs = p.segments();
        for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
            const KinematicSample end = segs[k].sample(segs[k].duration());
            const KinematicSample next = segs[k + 1].sample(0.0);
            const double scale = std::max({1.0, std::abs(end.value), std::abs(end.d1)});
            detail::require(std::abs(end.value - next.value) <= 1e-9 * scale &&
                                std::abs(end.d1 - next.d1) <= 1e-9 * scale,
                            name + " segments must join with continuous value and velocity");
        }
    }

    PiecewisePolynomial theta_;
    PiecewisePolynomial r_;
    double total_time_ = 0.0;
};

inline Trajectory make_rest_to_rest(Generator generator, double theta0, double theta1, double R,
                                    double T)
{
    auto make = generator == Generator::Cubic ? cubic_rest_to_rest : quintic_rest_to_rest;
    return Trajectory(PiecewisePolynomial(make(theta0, theta1, T)),
                      PiecewisePolynomial(make(0.0, R, T)));
}

/// Held pose: theta = theta0 and r = 0 for the whole duration.
inline Trajectory constant_trajectory(double theta0, double T)
{
    return Trajectory(PiecewisePolynomial(PolynomialSegment({theta0}, T)),
                      PiecewisePolynomial(PolynomialSegment({0.0}, T)));
}

struct TrajectorySample {
    KinematicSample theta;
    KinematicSample r;
};

inline TrajectorySample sample(const Trajectory& traj, double t)
{
    const double T = traj.total_time();
    const double slack = 1e-12 * T;
    if (!(t >= -slack && t <= T + slack)) {
        throw OutOfRange("sample time " + std::to_string(t) + " outside [0, " +
                         std::to_string(T) + "]");
    }
    t = std::clamp(t, 0.0, T);
    return {traj.theta().sample(t), traj.r().sample(t)};
}

struct JerkPeak {
    double value = 0.0;  // max |d3|
    double time = 0.0;
};

struct JerkMaxima {
    JerkPeak theta;
    JerkPeak r;
};

namespace detail {

inline JerkPeak peak_abs_jerk(const PiecewisePolynomial& p, int n_samples)
{
    const double T = p.duration();
    auto jerk = [&](double t) { return std::abs(p.sample(std::clamp(t, 0.0, T)).d3); };
    const double step = T / (n_samples - 1);
    JerkPeak best{jerk(0.0), 0.0};
    int best_index = 0;
    for (int i = 1; i < n_samples; ++i) {
        const double t = i == n_samples - 1 ? T : i * step;
        const double v = jerk(t);
        if (v > best.value) {
            best = {v, t};
            best_index = i;
        }
    }
    const double lo = std::max(0, best_index - 1) * step;
    const double hi = std::min(T, (best_index + 1) * step);
    const double t_refined = golden_section_maximize(jerk, lo, hi, 1e-10 * T);
    const double v_refined = jerk(t_refined);
    if (v_refined > best.value) {
        best = {v_refined, t_refined};
    }
    return best;
}

} // namespace detail

/// Peak |jerk| of theta and r: uniform scan refined by golden-section search.
inline JerkMaxima max_jerk(const Trajectory& traj, int n_samples)
{
    detail::require(n_samples >= 2, "max_jerk needs at least two samples");
    return {detail::peak_abs_jerk(traj.theta(), n_samples), detail::peak_abs_jerk(traj.r(), n_samples)};
}

} // namespace flexpath
