#pragma once

// Rotating cantilever rod: model, spatial discretization (finite differences or
// Hermite-cubic finite elements), static solves and stress recovery.

#include "flexpath/error.hpp"
#include "flexpath/quadrature.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace flexpath {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Backend { FiniteDifference, HermiteFEM };

inline std::string to_string(Backend b)
{
    return b == Backend::FiniteDifference ? "fd" : "fem";
}

struct BeamModel {
    double E = 0.0;            // Young modulus [Pa]
    double I = 0.0;            // second moment of area [m^4]
    double rho = 0.0;          // mass per unit length [kg/m]
    double L = 0.0;            // length [m]
    double h = 0.0;            // half-thickness [m]
    double sigma_yield = 0.0;  // [Pa]
    int n_nodes = 51;
    Backend backend = Backend::HermiteFEM;

    void validate() const
    {
        const std::initializer_list<std::pair<double, const char*>> fields{
            {E, "E"}, {I, "I"}, {rho, "rho"}, {L, "L"}, {h, "h"}, {sigma_yield, "sigma_yield"}};
        for (const auto& [v, name] : fields) {
            detail::require(v > 0.0 && std::isfinite(v), std::string("beam ") + name + " must be positive");
        }
        detail::require(n_nodes >= 5, "beam needs at least 5 nodes");
    }

    [[nodiscard]] double EI() const { return E * I; }
    [[nodiscard]] double spacing() const { return L / (n_nodes - 1); }
    [[nodiscard]] double node_x(int i) const { return i * spacing(); }

    [[nodiscard]] VectorXd node_positions() const
    {
        return VectorXd::LinSpaced(n_nodes, 0.0, L);
    }

    /// Natural frequency of the n-th clamped-free mode for characteristic root beta [rad/s].
    [[nodiscard]] double natural_frequency(double beta) const
    {
        return beta * beta * std::sqrt(EI() / (rho * L * L * L * L));
    }

    bool operator==(const BeamModel&) const = default;
};

/// Nodal transverse displacement; `slope` is populated by the Hermite backend only.
struct Deflection {
    VectorXd w;
    VectorXd slope;
};

/// Discrete operator with the clamped degrees of freedom eliminated.
/// Equations: M u'' + (K - theta_dot^2 M) u = load_map * q.
struct BeamSystem {
    Backend backend = Backend::HermiteFEM;
    int n_nodes = 0;
    double length = 0.0;
    SparseMatrix K;
    SparseMatrix M;
    SparseMatrix load_map;  // n_dofs x n_nodes

    [[nodiscard]] int n_dofs() const { return static_cast<int>(K.rows()); }
    [[nodiscard]] double spacing() const { return length / (n_nodes - 1); }

    /// Position of node i's transverse displacement in the reduced vector.
    [[nodiscard]] int w_dof(int node) const
    {
        return backend == Backend::FiniteDifference ? node - 1 : 2 * (node - 1);
    }

    [[nodiscard]] int tip_dof() const { return w_dof(n_nodes - 1); }

    [[nodiscard]] Deflection expand(const VectorXd& u) const
    {
        Deflection d;
        d.w = VectorXd::Zero(n_nodes);
        if (backend == Backend::FiniteDifference) {
            d.w.tail(n_nodes - 1) = u;
            return d;
        }
        d.slope = VectorXd::Zero(n_nodes);
        for (int i = 1; i < n_nodes; ++i) {
            d.w[i] = u[2 * (i - 1)];
            d.slope[i] = u[2 * (i - 1) + 1];
        }
        return d;
    }

    [[nodiscard]] VectorXd reduce(const Deflection& d) const
    {
        VectorXd u(n_dofs());
        for (int i = 1; i < n_nodes; ++i) {
            u[w_dof(i)] = d.w[i];
            if (backend == Backend::HermiteFEM) {
                u[w_dof(i) + 1] = d.slope[i];
            }
        }
        return u;
    }
};

namespace detail {

struct HermiteBasis {
    std::array<double, 4> N;    // values
    std::array<double, 4> Nxx;  // second x-derivatives
};

// Two-node Hermite cubic on an element of length he, local coordinate s in [0, 1].
inline HermiteBasis hermite_basis(double s, double he)
{
    const double s2 = s * s;
    const double s3 = s2 * s;
    HermiteBasis b;
    b.N = {1.0 - 3.0 * s2 + 2.0 * s3, he * (s - 2.0 * s2 + s3), 3.0 * s2 - 2.0 * s3, he * (s3 - s2)};
    const double inv = 1.0 / (he * he);
    b.Nxx = {(12.0 * s - 6.0) * inv, he * (6.0 * s - 4.0) * inv, (6.0 - 12.0 * s) * inv,
             he * (6.0 * s - 2.0) * inv};
    return b;
}

inline SparseMatrix drop_leading(const SparseMatrix& A, int rows, int cols)
{
    return A.bottomRightCorner(A.rows() - rows, A.cols() - cols);
}

} // namespace detail

/// Global Hermite-cubic matrices before any boundary condition is applied.
struct FemMatrices {
    SparseMatrix K;         // 2 n_nodes square, dofs (w_i, w'_i) interleaved
    SparseMatrix M;
    SparseMatrix load_map;  // 2 n_nodes x n_nodes, q linear between nodes
};

inline FemMatrices assemble_fem_unconstrained(double EI, double rho, double L, int n_elements)
{
    detail::require(n_elements >= 1, "need at least one element");
    detail::require(EI > 0.0 && rho > 0.0 && L > 0.0, "EI, rho and L must be positive");
    const int n_nodes = n_elements + 1;
    const int n = 2 * n_nodes;
    const double he = L / n_elements;
    const QuadratureRule gauss = gauss_legendre(4);  // degree 7: exact for N N and N q

    Eigen::Matrix4d ke = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d me = Eigen::Matrix4d::Zero();
    Eigen::Matrix<double, 4, 2> qe = Eigen::Matrix<double, 4, 2>::Zero();
    for (std::size_t g = 0; g < gauss.points.size(); ++g) {
        const double s = 0.5 * (gauss.points[g] + 1.0);
        const double wq = 0.5 * gauss.weights[g] * he;
        const auto b = detail::hermite_basis(s, he);
        for (int a = 0; a < 4; ++a) {
            for (int c = 0; c < 4; ++c) {
                ke(a, c) += EI * b.Nxx[a] * b.Nxx[c] * wq;
                me(a, c) += rho * b.N[a] * b.N[c] * wq;
            }
            qe(a, 0) += b.N[a] * (1.0 - s) * wq;
            qe(a, 1) += b.N[a] * s * wq;
        }
    }

    std::vector<Eigen::Triplet<double>> tk, tm, tq;
    for (int e = 0; e < n_elements; ++e) {
        const int base = 2 * e;
        for (int a = 0; a < 4; ++a) {
            for (int c = 0; c < 4; ++c) {
                tk.emplace_back(base + a, base + c, ke(a, c));
                tm.emplace_back(base + a, base + c, me(a, c));
            }
            tq.emplace_back(base + a, e, qe(a, 0));
            tq.emplace_back(base + a, e + 1, qe(a, 1));
        }
    }
    FemMatrices out;
    out.K.resize(n, n);
    out.M.resize(n, n);
    out.load_map.resize(n, n_nodes);
    out.K.setFromTriplets(tk.begin(), tk.end());
    out.M.setFromTriplets(tm.begin(), tm.end());
    out.load_map.setFromTriplets(tq.begin(), tq.end());
    return out;
}

/// Hermite FEM operator with the root displacement and slope eliminated.
inline BeamSystem assemble_fem(const BeamModel& model)
{
    model.validate();
    const FemMatrices full = assemble_fem_unconstrained(model.EI(), model.rho, model.L, model.n_nodes - 1);
    BeamSystem sys;
    sys.backend = Backend::HermiteFEM;
    sys.n_nodes = model.n_nodes;
    sys.length = model.L;
    sys.K = detail::drop_leading(full.K, 2, 2);
    sys.M = detail::drop_leading(full.M, 2, 2);
    sys.load_map = full.load_map.bottomRows(full.load_map.rows() - 2);
    return sys;
}

/// Uniform-grid finite differences with the 5-point fourth-derivative stencil.
/// Root: w_0 = 0 and ghost w_{-1} = w_1. Tip: ghosts from w'' = 0 and w''' = 0 (central).
/// The tip row is halved so K is symmetric; M and the load weights follow.
inline BeamSystem assemble_fd(const BeamModel& model)
{
    model.validate();
    const int N = model.n_nodes - 1;
    const double hx = model.spacing();
    const double stiff = model.EI() / (hx * hx * hx);

    // Ghost elimination, expressed on node indices.
    auto add = [&](std::vector<Eigen::Triplet<double>>& t, int row, int node, double v) {
        if (node == -1) {
            node = 1;
        }
        if (node == 0) {
            return;
        }
        if (node == N + 1) {  // w_{N+1} = 2 w_N - w_{N-1}
            t.emplace_back(row, N - 1, 2.0 * v);
            t.emplace_back(row, N - 2, -v);
            return;
        }
        if (node == N + 2) {  // w_{N+2} = 4 w_N - 4 w_{N-1} + w_{N-2}
            t.emplace_back(row, N - 1, 4.0 * v);
            t.emplace_back(row, N - 2, -4.0 * v);
            t.emplace_back(row, N - 3, v);
            return;
        }
        t.emplace_back(row, node - 1, v);
    };

    static constexpr std::array<double, 5> stencil{1.0, -4.0, 6.0, -4.0, 1.0};
    std::vector<Eigen::Triplet<double>> tk, tm, tq;
    for (int i = 1; i <= N; ++i) {
        const double weight = i == N ? 0.5 : 1.0;
        for (int k = 0; k < 5; ++k) {
            add(tk, i - 1, i - 2 + k, weight * stiff * stencil[k]);
        }
        tm.emplace_back(i - 1, i - 1, weight * model.rho * hx);
        tq.emplace_back(i - 1, i, weight * hx);
    }
    BeamSystem sys;
    sys.backend = Backend::FiniteDifference;
    sys.n_nodes = model.n_nodes;
    sys.length = model.L;
    sys.K.resize(N, N);
    sys.M.resize(N, N);
    sys.load_map.resize(N, model.n_nodes);
    sys.K.setFromTriplets(tk.begin(), tk.end());
    sys.M.setFromTriplets(tm.begin(), tm.end());
    sys.load_map.setFromTriplets(tq.begin(), tq.end());
    return sys;
}

inline BeamSystem assemble(const BeamModel& model)
{
    return model.backend == Backend::FiniteDifference ? assemble_fd(model) : assemble_fem(model);
}

namespace detail {

inline VectorXd sparse_solve(const SparseMatrix& A, const VectorXd& b)
{
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
        throw NumericalFailure("sparse factorization failed: " + lu.lastErrorMessage());
    }
    VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw NumericalFailure("sparse solve failed");
    }
    return x;
}

} // namespace detail

/// EI w'''' = q + theta_dot^2 rho w, clamped at x = 0 and free at x = L.
inline Deflection solve_static(const BeamSystem& sys, const VectorXd& q, double spin_rate_sq = 0.0)
{
    detail::require(q.size() == sys.n_nodes, "load must have one entry per node");
    SparseMatrix A = sys.K;
    if (spin_rate_sq != 0.0) {
        A -= spin_rate_sq * sys.M;
    }
    return sys.expand(detail::sparse_solve(A, sys.load_map * q));
}

inline Deflection solve_static(const BeamModel& model, const VectorXd& q, double spin_rate_sq = 0.0)
{
    return solve_static(assemble(model), q, spin_rate_sq);
}

/// Nodal curvature w''. FD: central differences inside, second-order one-sided at the ends.
/// FEM: exact Hermite curvature, averaged over the two elements sharing an interior node.
inline VectorXd curvature(const BeamModel& model, const Deflection& d)
{
    const int n = model.n_nodes;
    detail::require(d.w.size() == n, "deflection must have one entry per node");
    const double hx = model.spacing();
    VectorXd kappa(n);
    if (model.backend == Backend::FiniteDifference) {
        const VectorXd& w = d.w;
        const double inv = 1.0 / (hx * hx);
        kappa[0] = (2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) * inv;
        for (int i = 1; i + 1 < n; ++i) {
            kappa[i] = (w[i + 1] - 2.0 * w[i] + w[i - 1]) * inv;
        }
        kappa[n - 1] = (2.0 * w[n - 1] - 5.0 * w[n - 2] + 4.0 * w[n - 3] - w[n - 4]) * inv;
        return kappa;
    }
    detail::require(d.slope.size() == n, "the Hermite backend needs nodal slopes");
    const auto left = detail::hermite_basis(0.0, hx);
    const auto right = detail::hermite_basis(1.0, hx);
    auto element_curvature = [&](int e, const detail::HermiteBasis& b) {
        return b.Nxx[0] * d.w[e] + b.Nxx[1] * d.slope[e] + b.Nxx[2] * d.w[e + 1] +
               b.Nxx[3] * d.slope[e + 1];
    };
    kappa[0] = element_curvature(0, left);
    kappa[n - 1] = element_curvature(n - 2, right);
    for (int i = 1; i + 1 < n; ++i) {
        kappa[i] = 0.5 * (element_curvature(i - 1, right) + element_curvature(i, left));
    }
    return kappa;
}

/// Bending stress at the outer fibre, sigma = -h E w''.
inline VectorXd stress(const BeamModel& model, const Deflection& d)
{
    return -model.h * model.E * curvature(model, d);
}

} // namespace flexpath
