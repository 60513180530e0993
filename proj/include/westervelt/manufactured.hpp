#pragma once

// Smooth test problem on (0, 1/2) with exact inviscid solution
//   u(x, t) = sin(4 pi x) cos(4 pi t)
// and the source that makes it solve the undamped Westervelt equation.

#include "westervelt/diagnostics.hpp"
#include "westervelt/newmark.hpp"

#include <cmath>
#include <numbers>

namespace westervelt {

struct ManufacturedCase {
    double c = 1500.0;
    double k = -3e-9;
    double length = 0.5;

    static constexpr double omega = 4.0 * std::numbers::pi;

    [[nodiscard]] double u(double x, double t) const { return std::sin(omega * x) * std::cos(omega * t); }
    [[nodiscard]] double u_t(double x, double t) const { return -omega * std::sin(omega * x) * std::sin(omega * t); }
    [[nodiscard]] double u_tt(double x, double t) const { return -omega * omega * u(x, t); }
    [[nodiscard]] double u_x(double x, double t) const { return omega * std::cos(omega * x) * std::cos(omega * t); }
    [[nodiscard]] double u_xx(double x, double t) const { return -omega * omega * u(x, t); }

    /// f = (1 + k u) u_tt + k u_t^2 - c^2 u_xx
    [[nodiscard]] double source(double x, double t) const
    {
        const double ut = u_t(x, t);
        return (1.0 + k * u(x, t)) * u_tt(x, t) + k * ut * ut - c * c * u_xx(x, t);
    }

    /// Pointwise residual of ((1 + k u) u_t)_t - c^2 u_xx - f, written out independently of source().
    [[nodiscard]] double residual(double x, double t) const
    {
        const double s = std::sin(omega * x), ct = std::cos(omega * t), st = std::sin(omega * t);
        const double w2 = omega * omega;
        const double uu = s * ct;
        const double lhs = -(1.0 + k * uu) * w2 * uu + k * w2 * s * s * st * st + c * c * w2 * uu;
        return lhs - source(x, t);
    }

    /// Simulation setup on a uniform mesh of the given cell count.
    [[nodiscard]] SimConfig config(int n_cells, double dt, double eps, const KernelSpec& kernel,
                                   double final_time = 0.25) const
    {
        SimConfig cfg;
        cfg.c = c;
        cfg.k = k;
        cfg.eps = eps;
        cfg.kernel = kernel;
        cfg.final_time = final_time;
        cfg.dt = dt;
        cfg.mesh = IntervalMeshSpec{0.0, length, n_cells};
        cfg.u0 = InitialDatum{[mc = *this](const Point& p) { return mc.u(p[0], 0.0); },
                              [mc = *this](const Point& p) { return Gradient{mc.u_x(p[0], 0.0), 0.0}; }};
        cfg.u1.reset();
        cfg.source = [mc = *this](const Point& p, double t) { return mc.source(p[0], t); };
        return cfg;
    }

    [[nodiscard]] ExactFn exact() const
    {
        return [mc = *this](const Point& p, double t) { return mc.u(p[0], t); };
    }
};

}  // namespace westervelt
