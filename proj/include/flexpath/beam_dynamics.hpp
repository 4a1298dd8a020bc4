#pragma once

// Time integration of the rotating rod: Newmark average acceleration with the
// centrifugal term carried implicitly in the stiffness.

#include "flexpath/beam.hpp"
#include "flexpath/error.hpp"
#include "flexpath/kinematics.hpp"
#include "flexpath/trajectory.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace flexpath {

struct NewmarkParams {
    double gamma = 0.5;  // > 1/2 adds numerical dissipation

    [[nodiscard]] double beta() const { return 0.25 * (gamma + 0.5) * (gamma + 0.5); }
};

/// Load at an instant: nodal q without the centrifugal part, and theta_dot^2.
struct LoadSample {
    VectorXd q;
    double spin_rate_sq = 0.0;
};

using LoadProvider = std::function<LoadSample(double)>;

/// Reduced-DOF state (clamped entries eliminated); expand through BeamSystem::expand.
struct BeamState {
    double t = 0.0;
    VectorXd u;
    VectorXd v;
    VectorXd a;
};

class NewmarkIntegrator {
public:
    explicit NewmarkIntegrator(BeamSystem sys, NewmarkParams params = {})
        : sys_(std::move(sys)), params_(params)
    {
        detail::require(params_.gamma >= 0.5, "Newmark gamma must be at least 1/2");
        mass_.compute(sys_.M);
        if (mass_.info() != Eigen::Success) {
            throw NumericalFailure("mass matrix factorization failed");
        }
    }

    [[nodiscard]] const BeamSystem& system() const { return sys_; }
    [[nodiscard]] int factorization_count() const { return factorizations_; }

    /// State with the given displacement and velocity and the acceleration they imply.
    [[nodiscard]] BeamState make_state(double t, VectorXd u, VectorXd v, const LoadProvider& load) const
    {
        const LoadSample ls = load(t);
        BeamState s{t, std::move(u), std::move(v), VectorXd()};
        const VectorXd rhs = sys_.load_map * ls.q - sys_.K * s.u + ls.spin_rate_sq * (sys_.M * s.u);
        s.a = mass_.solve(rhs);
        return s;
    }

    [[nodiscard]] BeamState rest_state(double t, const LoadProvider& load) const
    {
        const int n = sys_.n_dofs();
        return make_state(t, VectorXd::Zero(n), VectorXd::Zero(n), load);
    }

    BeamState step(const BeamState& s, double dt, const LoadProvider& load)
    {
        return step_to(s, s.t + dt, load);
    }

    BeamState step_to(const BeamState& s, double t_next, const LoadProvider& load)
    {
        const double dt = t_next - s.t;
        detail::require(dt > 0.0, "time step must be positive");
        const LoadSample ls = load(t_next);
        refresh(dt, ls.spin_rate_sq);

        const double beta = params_.beta();
        const double gamma = params_.gamma;
        const double c0 = 1.0 / (beta * dt * dt);
        const double c1 = 1.0 / (beta * dt);
        const double c2 = 0.5 / beta - 1.0;
        const VectorXd history = c0 * s.u + c1 * s.v + c2 * s.a;
        const VectorXd rhs = sys_.load_map * ls.q + sys_.M * history;

        BeamState next;
        next.t = t_next;
        next.u = lu_.solve(rhs);
        if (lu_.info() != Eigen::Success || !next.u.allFinite()) {
            throw NumericalFailure("Newmark solve failed at t = " + std::to_string(t_next));
        }
        next.a = c0 * (next.u - s.u) - c1 * s.v - c2 * s.a;
        next.v = s.v + dt * ((1.0 - gamma) * s.a + gamma * next.a);
        return next;
    }

    [[nodiscard]] double kinetic_energy(const BeamState& s) const { return 0.5 * s.v.dot(sys_.M * s.v); }
    [[nodiscard]] double strain_energy(const BeamState& s) const { return 0.5 * s.u.dot(sys_.K * s.u); }

private:
    // Effective matrix K - theta_dot^2 M + M / (beta dt^2); refactored when dt or the spin changes.
    void refresh(double dt, double spin_sq)
    {
        const bool same_dt = dt_ == dt ||
                             std::abs(dt - dt_) <= 1e-14 * std::max(std::abs(dt), std::abs(dt_));
        const bool same_spin = spin_sq == spin_sq_ ||
                               std::abs(spin_sq - spin_sq_) <=
                                   1e-12 * std::max(std::abs(spin_sq), std::abs(spin_sq_));
        if (factorizations_ > 0 && same_dt && same_spin) {
            return;
        }
        SparseMatrix A = sys_.K + (1.0 / (params_.beta() * dt * dt) - spin_sq) * sys_.M;
        lu_.compute(A);
        if (lu_.info() != Eigen::Success) {
            throw NumericalFailure("Newmark effective matrix is singular");
        }
        dt_ = dt;
        spin_sq_ = spin_sq;
        ++factorizations_;
    }

    BeamSystem sys_;
    NewmarkParams params_;
    Eigen::SimplicialLDLT<SparseMatrix> mass_;
    Eigen::SparseLU<SparseMatrix> lu_;
    double dt_ = 0.0;
    double spin_sq_ = 0.0;
    int factorizations_ = 0;
};

/// One Newmark step from `state`.
inline BeamState step_newmark(const BeamSystem& sys, const BeamState& state, double dt,
                              const LoadProvider& load, NewmarkParams params = {})
{
    detail::require(dt > 0.0, "time step must be positive");
    NewmarkIntegrator integrator(sys, params);
    return integrator.step(state, dt, load);
}

/// Nodal load of the rotating rod, centrifugal part split off as theta_dot^2.
inline LoadProvider trajectory_load(const BeamModel& model, const Trajectory& traj, double gravity)
{
    const VectorXd x = model.node_positions();
    const double rho = model.rho;
    return [x, rho, traj, gravity](double t) {
        const TrajectorySample s = sample(traj, std::clamp(t, 0.0, traj.total_time()));
        LoadSample ls;
        ls.q.resize(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            ls.q[i] = beam_load(x[i], 0.0, s.theta, s.r, rho, gravity).total;
        }
        ls.spin_rate_sq = s.theta.d1 * s.theta.d1;
        return ls;
    };
}

enum class SimulationMode { Dynamic, QuasiStatic };

struct SimulationOptions {
    double dt = 1e-3;
    int output_stride = 1;
    double gravity = 9.81;
    double gamma = 0.5;
    SimulationMode mode = SimulationMode::Dynamic;
};

struct EnergySample {
    double kinetic = 0.0;
    double strain = 0.0;
    double work = 0.0;     // accumulated work of the external and centrifugal loads
    double balance = 0.0;  // kinetic + strain - initial - work
};

struct SimulationResult {
    std::vector<double> times;
    VectorXd x;
    MatrixXd w;      // times x nodes
    MatrixXd sigma;  // times x nodes [Pa]
    std::vector<EnergySample> energy;
    double energy_drift = 0.0;  // max |balance| / max total energy, over every step
    double dt = 0.0;            // step actually used, T / ceil(T / requested dt)
    int steps = 0;
    VectorXd hold_sigma;        // final pose held at rest, static stress
};

namespace detail {

inline void record(SimulationResult& out, const BeamModel& model, double t, const Deflection& d)
{
    const auto row = static_cast<Eigen::Index>(out.times.size());
    out.times.push_back(t);
    if (out.w.rows() <= row) {
        out.w.conservativeResize(std::max<Eigen::Index>(2 * row, 16), model.n_nodes);
        out.sigma.conservativeResize(out.w.rows(), model.n_nodes);
    }
    out.w.row(row) = d.w.transpose();
    out.sigma.row(row) = stress(model, d).transpose();
}

} // namespace detail

/// March the rod from rest over [0, T] under the trajectory's load.
inline SimulationResult simulate(const BeamModel& model, const Trajectory& traj,
                                 const SimulationOptions& options)
{
    model.validate();
    detail::require(options.dt > 0.0, "time step must be positive");
    detail::require(options.output_stride >= 1, "output stride must be at least 1");
    detail::require(options.gravity >= 0.0, "gravity must be non-negative");

    const double T = traj.total_time();
    const int steps = std::max(1, static_cast<int>(std::ceil(T / options.dt - 1e-9)));
    const double dt = T / steps;
    const BeamSystem sys = assemble(model);
    const LoadProvider load = trajectory_load(model, traj, options.gravity);

    SimulationResult out;
    out.x = model.node_positions();
    out.dt = dt;
    out.steps = steps;

    auto time_of = [&](int k) { return k == steps ? T : k * dt; };
    auto keep = [&](int k) { return k % options.output_stride == 0 || k == steps; };

    if (options.mode == SimulationMode::QuasiStatic) {
        for (int k = 0; k <= steps; ++k) {
            if (!keep(k)) {
                continue;
            }
            const LoadSample ls = load(time_of(k));
            detail::record(out, model, time_of(k), solve_static(sys, ls.q, ls.spin_rate_sq));
            out.energy.push_back({});
        }
    } else {
        NewmarkIntegrator integrator(sys, NewmarkParams{options.gamma});
        BeamState state = integrator.rest_state(0.0, load);
        LoadSample ls = load(0.0);
        auto force = [&](const LoadSample& l, const VectorXd& u) -> VectorXd {
            return sys.load_map * l.q + l.spin_rate_sq * (sys.M * u);
        };
        VectorXd f_prev = force(ls, state.u);
        const double e0 = integrator.kinetic_energy(state) + integrator.strain_energy(state);
        double work = 0.0;
        double max_energy = std::abs(e0);
        double max_balance = 0.0;

        detail::record(out, model, 0.0, sys.expand(state.u));
        out.energy.push_back({integrator.kinetic_energy(state), integrator.strain_energy(state), 0.0, 0.0});
        for (int k = 1; k <= steps; ++k) {
            BeamState next = integrator.step_to(state, time_of(k), load);
            ls = load(next.t);
            const VectorXd f_next = force(ls, next.u);
            work += 0.5 * (f_prev + f_next).dot(next.u - state.u);
            const EnergySample e{integrator.kinetic_energy(next), integrator.strain_energy(next), work,
                                 0.0};
            const double total = e.kinetic + e.strain;
            const double balance = total - e0 - work;
            max_energy = std::max(max_energy, std::abs(total));
            max_balance = std::max(max_balance, std::abs(balance));
            if (keep(k)) {
                detail::record(out, model, next.t, sys.expand(next.u));
                out.energy.push_back({e.kinetic, e.strain, e.work, balance});
            }
            state = std::move(next);
            f_prev = f_next;
        }
        out.energy_drift = max_energy > 0.0 ? max_balance / max_energy : 0.0;
    }
    out.w.conservativeResize(static_cast<Eigen::Index>(out.times.size()), model.n_nodes);
    out.sigma.conservativeResize(static_cast<Eigen::Index>(out.times.size()), model.n_nodes);

    const TrajectorySample end = sample(traj, T);
    const KinematicSample theta_hold{end.theta.value, 0.0, 0.0, 0.0};
    const KinematicSample r_hold{end.r.value, 0.0, 0.0, 0.0};
    VectorXd q_hold(model.n_nodes);
    for (int i = 0; i < model.n_nodes; ++i) {
        q_hold[i] = beam_load(out.x[i], 0.0, theta_hold, r_hold, model.rho, options.gravity).total;
    }
    out.hold_sigma = stress(model, solve_static(sys, q_hold));
    return out;
}

} // namespace flexpath
