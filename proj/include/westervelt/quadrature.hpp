#pragma once

#include "westervelt/errors.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <utility>

namespace westervelt::quad {

/// Gauss-Legendre points on the reference interval [0, 1]; weights sum to 1.
struct Rule1D {
    std::array<double, 5> x{};
    std::array<double, 5> w{};
    int n = 0;
};

/// 3-point rule, exact for degree 5.
inline constexpr Rule1D gauss3 = [] {
    Rule1D r;
    r.n = 3;
    const double s = 0.7745966692414833770358531;  // sqrt(3/5)
    r.x = {0.5 * (1.0 - s), 0.5, 0.5 * (1.0 + s), 0.0, 0.0};
    r.w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0, 0.0, 0.0};
    return r;
}();

/// 5-point rule, exact for degree 9.
inline constexpr Rule1D gauss5 = [] {
    Rule1D r;
    r.n = 5;
    const double a = 0.9061798459386639927976269;
    const double b = 0.5384693101056830910363144;
    const double wa = 0.2369268850561890875142640;
    const double wb = 0.4786286704993664680412915;
    const double w0 = 0.5688888888888888888888889;
    r.x = {0.5 * (1.0 - a), 0.5 * (1.0 - b), 0.5, 0.5 * (1.0 + b), 0.5 * (1.0 + a)};
    r.w = {0.5 * wa, 0.5 * wb, 0.5 * w0, 0.5 * wb, 0.5 * wa};
    return r;
}();

/// Triangle rule in barycentric coordinates; weights sum to 1 (multiply by area).
struct RuleTri {
    std::array<std::array<double, 3>, 7> bary{};
    std::array<double, 7> w{};
    int n = 0;
};

/// Strang-Fix 4-point rule, exact for degree 3 (one negative weight).
inline constexpr RuleTri tri4 = [] {
    RuleTri r;
    r.n = 4;
    r.bary[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    r.bary[1] = {0.6, 0.2, 0.2};
    r.bary[2] = {0.2, 0.6, 0.2};
    r.bary[3] = {0.2, 0.2, 0.6};
    r.w = {-27.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 25.0 / 48.0, 0.0, 0.0, 0.0};
    return r;
}();

/// 7-point rule, exact for degree 5.
inline constexpr RuleTri tri7 = [] {
    RuleTri r;
    r.n = 7;
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    r.bary[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    r.bary[1] = {a1, b1, b1};
    r.bary[2] = {b1, a1, b1};
    r.bary[3] = {b1, b1, a1};
    r.bary[4] = {a2, b2, b2};
    r.bary[5] = {b2, a2, b2};
    r.bary[6] = {b2, b2, a2};
    r.w = {0.225, w1, w1, w1, w2, w2, w2};
    return r;
}();

namespace detail {

inline constexpr std::array<double, 8> gk_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> gk_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> g7_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(F&& f, double a, double b)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * gk_w[7];
    double g = fc * g7_w[3];
    for (int i = 0; i < 7; ++i) {
        const double f1 = f(c - h * gk_x[i]);
        const double f2 = f(c + h * gk_x[i]);
        k += gk_w[i] * (f1 + f2);
        if (i % 2 == 1) g += g7_w[i / 2] * (f1 + f2);
    }
    return {k * h, std::abs((k - g) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b]: the
/// subinterval with the largest error estimate is bisected until the summed
/// estimate drops below tol. Endpoints are never evaluated, so integrable
/// endpoint singularities are fine.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12, int max_intervals = 4000)
{
    struct Piece {
        double a, b, value, error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    std::priority_queue<Piece> heap;
    const auto [v0, e0] = detail::gk15(f, a, b);
    heap.push({a, b, v0, e0});
    double value = v0, error = e0;
    while (error > tol) {
        if (static_cast<int>(heap.size()) >= max_intervals) {
            throw SolverError("adaptive quadrature: interval budget exhausted");
        }
        const Piece p = heap.top();
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        const auto [lv, le] = detail::gk15(f, p.a, m);
        const auto [rv, re] = detail::gk15(f, m, p.b);
        value += lv + rv - p.value;
        error += le + re - p.error;
        heap.push({p.a, m, lv, le});
        heap.push({m, p.b, rv, re});
    }
    return value;
}

}  // namespace westervelt::quad
