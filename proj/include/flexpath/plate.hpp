#pragma once

// Quasi-static Kirchhoff-Love plate on a rectangle: 13-point biharmonic finite
// differences with ghost nodes for the edge conditions, plus strain, stress and
// moment recovery.

#include "flexpath/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

namespace flexpath {

/// Grids are stored rows = y index j, columns = x index i.
using Grid = Eigen::MatrixXd;

enum class Edge { Left, Right, Bottom, Top };

inline std::string to_string(Edge e)
{
    switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
    }
    return "?";
}

/// D = 2 h^3 E / (3 (1 - nu^2)), h the half-thickness.
inline double bending_stiffness(double E, double nu, double h)
{
    detail::require(nu >= 0.0 && nu < 0.5, "Poisson ratio must lie in [0, 0.5)");
    detail::require(E > 0.0 && h > 0.0, "E and h must be positive");
    return 2.0 * h * h * h * E / (3.0 * (1.0 - nu * nu));
}

struct PlateModel {
    double E = 0.0;
    double nu = 0.3;
    double h = 0.0;    // half-thickness [m]
    double rho = 0.0;  // volumetric density [kg/m^3]
    double a = 0.0;    // extent in x [m]
    double b = 0.0;    // extent in y [m]
    int nx = 33;
    int ny = 33;
    std::set<Edge> clamped_edges{Edge::Left};
    double foundation_k = 0.0;  // uniform spring constant, D lap^2 w + k w = -q

    void validate() const
    {
        detail::require(nu > 0.0 && nu < 0.5, "plate nu must lie in (0, 0.5)");
        detail::require(E > 0.0 && h > 0.0 && a > 0.0 && b > 0.0, "plate E, h, a, b must be positive");
        detail::require(rho >= 0.0, "plate rho must be non-negative");
        detail::require(nx >= 9 && ny >= 9, "plate grid needs at least 9 points per side");
        detail::require(!clamped_edges.empty(), "at least one plate edge must be clamped");
        detail::require(foundation_k >= 0.0, "foundation stiffness must be non-negative");
    }

    [[nodiscard]] double hx() const { return a / (nx - 1); }
    [[nodiscard]] double hy() const { return b / (ny - 1); }
    [[nodiscard]] double D() const { return bending_stiffness(E, nu, h); }
    [[nodiscard]] bool clamped(Edge e) const { return clamped_edges.count(e) != 0; }

    bool operator==(const PlateModel&) const = default;
};

struct StressGrids {
    Grid s11;
    Grid s22;
    Grid s12;
};

struct StrainGrids {
    Grid e11;
    Grid e22;
    Grid e12;
};

struct MomentGrids {
    Grid M11;
    Grid M22;
    Grid M12;
};

struct PlateSolution {
    Grid w0;
    Grid M11;
    Grid M22;
    Grid M12;
    StressGrids sigma_top;  // z = +h
    double hx = 0.0;
    double hy = 0.0;
};

namespace detail {

struct GridDerivatives {
    Grid wx, wy, wxx, wyy, wxy;
};

// Second-order differences: central inside, one-sided (three/four point) on the boundary.
inline GridDerivatives grid_derivatives(const Grid& w, double hx, double hy)
{
    const Eigen::Index ny = w.rows();
    const Eigen::Index nx = w.cols();
    GridDerivatives d{Grid(ny, nx), Grid(ny, nx), Grid(ny, nx), Grid(ny, nx), Grid(ny, nx)};

    auto first = [](auto&& f, Eigen::Index k, Eigen::Index n, double step) {
        if (k == 0) {
            return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * step);
        }
        if (k == n - 1) {
            return (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * step);
        }
        return (f(k + 1) - f(k - 1)) / (2.0 * step);
    };
    auto second = [](auto&& f, Eigen::Index k, Eigen::Index n, double step) {
        if (k == 0) {
            return (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / (step * step);
        }
        if (k == n - 1) {
            return (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / (step * step);
        }
        return (f(k + 1) - 2.0 * f(k) + f(k - 1)) / (step * step);
    };

    for (Eigen::Index j = 0; j < ny; ++j) {
        for (Eigen::Index i = 0; i < nx; ++i) {
            auto along_x = [&](Eigen::Index k) { return w(j, k); };
            auto along_y = [&](Eigen::Index k) { return w(k, i); };
            d.wx(j, i) = first(along_x, i, nx, hx);
            d.wy(j, i) = first(along_y, j, ny, hy);
            d.wxx(j, i) = second(along_x, i, nx, hx);
            d.wyy(j, i) = second(along_y, j, ny, hy);
        }
    }
    for (Eigen::Index j = 0; j < ny; ++j) {
        for (Eigen::Index i = 0; i < nx; ++i) {
            auto wx_along_y = [&](Eigen::Index k) { return d.wx(k, i); };
            d.wxy(j, i) = first(wx_along_y, j, ny, hy);
        }
    }
    return d;
}

} // namespace detail

/// Membrane-plus-bending strains at height z, |z| <= h. Out-of-plane components vanish.
inline StrainGrids plate_strains(const Grid& w0, double z, double h, double hx, double hy)
{
    if (std::abs(z) > h) {
        throw OutOfRange("z = " + std::to_string(z) + " outside [-h, h]");
    }
    detail::require(w0.rows() >= 4 && w0.cols() >= 4, "strain recovery needs at least 4x4 grid");
    const auto d = detail::grid_derivatives(w0, hx, hy);
    StrainGrids e;
    e.e11 = 0.5 * d.wx.array().square() - z * d.wxx.array();
    e.e22 = 0.5 * d.wy.array().square() - z * d.wyy.array();
    e.e12 = 0.5 * (d.wx.array() * d.wy.array() - 2.0 * z * d.wxy.array());
    return e;
}

inline StrainGrids plate_strains(const PlateModel& model, const Grid& w0, double z)
{
    return plate_strains(w0, z, model.h, model.hx(), model.hy());
}

/// Plane-stress map E/(1 - nu^2) [[1, nu, 0], [nu, 1, 0], [0, 0, 1 - nu]] applied to (e11, e22, e12).
inline StressGrids plate_stresses(const StrainGrids& e, double E, double nu)
{
    detail::require(nu >= 0.0 && nu < 0.5, "Poisson ratio must lie in [0, 0.5)");
    const double c = E / (1.0 - nu * nu);
    return {c * (e.e11 + nu * e.e22), c * (e.e22 + nu * e.e11), c * (1.0 - nu) * e.e12};
}

/// Moment resultants integrated analytically through the thickness.
inline MomentGrids moments(const PlateModel& model, const Grid& w0)
{
    const auto d = detail::grid_derivatives(w0, model.hx(), model.hy());
    const double Dt = bending_stiffness(model.E, model.nu, model.h);
    return {-Dt * (d.wxx + model.nu * d.wyy), -Dt * (d.wyy + model.nu * d.wxx),
            -Dt * (1.0 - model.nu) * d.wxy};
}

/// Solve D lap^2 w0 + k w0 = -q on the grid.
///
/// Clamped edges: w0 = 0 and zero normal slope (mirror ghost). Free edges:
/// lap w0 = 0 and d/dn lap w0 = 0 through two ghost layers; where two free edges
/// meet, w_nn = 0 in each direction and the corner ghost carries zero twist.
/// Ghosts along the extension of a clamped edge are held at zero.
/// residual_tolerance bounds ||A u - b|| / ||b|| of the discrete system after one refinement
/// step. Inconsistent boundary data (free edges carrying the printed conditions) leave a
/// residual far above it, so the default turns them into NumericalFailure.
inline PlateSolution solve_plate_static(const PlateModel& model, const Grid& q, double residual_tolerance = 1e-8)
{
    model.validate();
    const int nx = model.nx;
    const int ny = model.ny;
    detail::require(q.rows() == ny && q.cols() == nx, "load grid must be ny x nx");

    constexpr int G = 2;
    const int W = nx + 2 * G;
    const int H = ny + 2 * G;
    const double hx = model.hx();
    const double hy = model.hy();
    const double D = model.D();
    auto idx = [&](int i, int j) { return (j + G) * W + (i + G); };

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(W) * H * 13);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(W * H);
    auto add = [&](int row, int i, int j, double v) { t.emplace_back(row, idx(i, j), v); };
    auto laplacian = [&](int row, int i, int j, double s) {
        add(row, i - 1, j, s / (hx * hx));
        add(row, i + 1, j, s / (hx * hx));
        add(row, i, j - 1, s / (hy * hy));
        add(row, i, j + 1, s / (hy * hy));
        add(row, i, j, -2.0 * s / (hx * hx) - 2.0 * s / (hy * hy));
    };
    auto on_clamped = [&](int i, int j) {
        return (model.clamped(Edge::Left) && i == 0) || (model.clamped(Edge::Right) && i == nx - 1) ||
               (model.clamped(Edge::Bottom) && j == 0) || (model.clamped(Edge::Top) && j == ny - 1);
    };

    const double x4 = 1.0 / (hx * hx * hx * hx);
    const double y4 = 1.0 / (hy * hy * hy * hy);
    const double xy = 1.0 / (hx * hx * hy * hy);
    const std::array<std::array<double, 3>, 13> stencil{{
        {0, 0, 6.0 * x4 + 6.0 * y4 + 8.0 * xy},
        {1, 0, -4.0 * x4 - 4.0 * xy}, {-1, 0, -4.0 * x4 - 4.0 * xy},
        {0, 1, -4.0 * y4 - 4.0 * xy}, {0, -1, -4.0 * y4 - 4.0 * xy},
        {2, 0, x4}, {-2, 0, x4}, {0, 2, y4}, {0, -2, y4},
        {1, 1, 2.0 * xy}, {1, -1, 2.0 * xy}, {-1, 1, 2.0 * xy}, {-1, -1, 2.0 * xy},
    }};

    for (int j = -G; j < ny + G; ++j) {
        for (int i = -G; i < nx + G; ++i) {
            const int row = idx(i, j);
            const int ox = i < 0 ? -i : (i > nx - 1 ? i - (nx - 1) : 0);
            const int oy = j < 0 ? -j : (j > ny - 1 ? j - (ny - 1) : 0);

            if (ox == 0 && oy == 0) {
                if (on_clamped(i, j)) {
                    add(row, i, j, 1.0);
                    continue;
                }
                for (const auto& [di, dj, c] : stencil) {
                    add(row, i + static_cast<int>(di), j + static_cast<int>(dj), c);
                }
                add(row, i, j, model.foundation_k / D);
                rhs[row] = -q(j, i) / D;
                continue;
            }

            if (ox != 0 && oy != 0) {
                // Corner ghost: zero twist where two free edges meet, otherwise unused.
                const Edge ex = i < 0 ? Edge::Left : Edge::Right;
                const Edge ey = j < 0 ? Edge::Bottom : Edge::Top;
                if (ox == 1 && oy == 1 && !model.clamped(ex) && !model.clamped(ey)) {
                    const int ei = i < 0 ? 0 : nx - 1;
                    const int ej = j < 0 ? 0 : ny - 1;
                    const int si = i < 0 ? -1 : 1;
                    const int sj = j < 0 ? -1 : 1;
                    add(row, ei + si, ej + sj, 1.0);
                    add(row, ei - si, ej + sj, -1.0);
                    add(row, ei + si, ej - sj, -1.0);
                    add(row, ei - si, ej - sj, 1.0);
                } else {
                    add(row, i, j, 1.0);
                }
                continue;
            }

            // Ghost beyond exactly one edge, at depth d.
            const bool across_x = ox != 0;
            const int d = across_x ? ox : oy;
            const int sgn = across_x ? (i < 0 ? -1 : 1) : (j < 0 ? -1 : 1);
            const Edge edge = across_x ? (i < 0 ? Edge::Left : Edge::Right) : (j < 0 ? Edge::Bottom : Edge::Top);
            const int ei = across_x ? (i < 0 ? 0 : nx - 1) : i;
            const int ej = across_x ? j : (j < 0 ? 0 : ny - 1);

            if (model.clamped(edge)) {
                add(row, i, j, 1.0);
                if (d == 1) {  // zero normal slope
                    if (across_x) {
                        add(row, ei - sgn, ej, -1.0);
                    } else {
                        add(row, ei, ej - sgn, -1.0);
                    }
                }
                continue;
            }
            if (on_clamped(ei, ej)) {
                add(row, i, j, 1.0);
                continue;
            }
            const bool free_corner = across_x ? (ej == 0 || ej == ny - 1) : (ei == 0 || ei == nx - 1);
            if (d == 1) {
                if (free_corner) {
                    if (across_x) {
                        add(row, ei - 1, ej, 1.0);
                        add(row, ei, ej, -2.0);
                        add(row, ei + 1, ej, 1.0);
                    } else {
                        add(row, ei, ej - 1, 1.0);
                        add(row, ei, ej, -2.0);
                        add(row, ei, ej + 1, 1.0);
                    }
                } else {
                    laplacian(row, ei, ej, 1.0);
                }
            } else {
                // Central difference of the Laplacian across the edge.
                if (across_x) {
                    laplacian(row, ei + sgn, ej, 1.0);
                    laplacian(row, ei - sgn, ej, -1.0);
                } else {
                    laplacian(row, ei, ej + sgn, 1.0);
                    laplacian(row, ei, ej - sgn, -1.0);
                }
            }
        }
    }

    Eigen::SparseMatrix<double> A(W * H, W * H);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
        throw NumericalFailure("plate system is singular: " + lu.lastErrorMessage());
    }
    Eigen::VectorXd u = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !u.allFinite()) {
        throw NumericalFailure("plate solve failed");
    }
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        u.setZero();
    } else {
        u += lu.solve(rhs - A * u);
        const double residual = (A * u - rhs).norm() / rhs_norm;
        if (!u.allFinite() || !(residual <= residual_tolerance)) {
            std::array<char, 160> msg{};
            std::snprintf(msg.data(), msg.size(),
                          "plate system is singular or its boundary data inconsistent (relative residual %.3g)",
                          residual);
            throw NumericalFailure(msg.data());
        }
    }

    PlateSolution sol;
    sol.hx = hx;
    sol.hy = hy;
    sol.w0.resize(ny, nx);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            sol.w0(j, i) = on_clamped(i, j) ? 0.0 : u[idx(i, j)];
        }
    }
    const MomentGrids m = moments(model, sol.w0);
    sol.M11 = m.M11;
    sol.M22 = m.M22;
    sol.M12 = m.M12;
    sol.sigma_top = plate_stresses(plate_strains(model, sol.w0, model.h), model.E, model.nu);
    return sol;
}

} // namespace flexpath
