#pragma once

#include "westervelt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace westervelt {

namespace detail {

/// 1/Gamma(x), zero at the poles.
inline double rgamma(double x)
{
    if (x <= 0.0 && x == std::floor(x)) return 0.0;
    if (x < 170.0) return 1.0 / std::tgamma(x);
    return std::exp(-std::lgamma(x));
}

struct SeriesResult {
    double value;
    double max_term;  // largest |term| seen; measures cancellation for z < 0
};

/// Power series sum_k z^k / Gamma(alpha k + beta) with Kahan summation.
inline SeriesResult ml_series(double alpha, double beta, double z, int max_terms)
{
    double sum = 0.0, comp = 0.0, max_term = 0.0;
    const double logz = z != 0.0 ? std::log(std::abs(z)) : 0.0;
    int small_run = 0;
    for (int k = 0; k < max_terms; ++k) {
        const double arg = alpha * k + beta;
        double term;
        if (k == 0) {
            term = rgamma(beta);
        } else if (z == 0.0) {
            break;
        } else if (arg > 0.0) {
            term = std::exp(k * logz - std::lgamma(arg));
            if ((k % 2 == 1) && z < 0.0) term = -term;
        } else {
            term = std::pow(z, k) * rgamma(arg);
        }
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        max_term = std::max(max_term, std::abs(term));
        // Stop once terms are negligible and past the peak of |term|.
        if (std::abs(term) <= 1e-17 * std::abs(sum) && std::abs(term) < max_term) {
            if (++small_run >= 3) return {sum, max_term};
        } else {
            small_run = 0;
        }
    }
    if (z == 0.0) return {sum, max_term};
    throw SolverError("mittag_leffler: series did not converge within the term cap");
}

/// Inverse Laplace transform of s^(alpha-beta) / (s^alpha - z) at t = 1 on the
/// optimised Talbot contour s(th) = N(0.5017 th cot(0.6407 th) - 0.6122 + 0.2645 i th).
/// Valid when s^alpha = z has no root on the principal sheet: alpha < 1, z < 0.
inline double ml_talbot(double alpha, double beta, double z, int n_nodes)
{
    using cd = std::complex<double>;
    const double pi = std::numbers::pi;
    const double N = n_nodes;
    cd acc{0.0, 0.0};
    for (int k = 0; k < n_nodes; ++k) {
        const double th = -pi + (k + 0.5) * 2.0 * pi / N;
        const double a = 0.6407 * th;
        const double cot = std::cos(a) / std::sin(a);
        const cd s = N * cd(0.5017 * th * cot - 0.6122, 0.2645 * th);
        const double dcot = 0.5017 * cot - 0.5017 * a / (std::sin(a) * std::sin(a));
        const cd ds = N * cd(dcot, 0.2645);
        const cd sa = std::pow(s, alpha);
        const cd f = std::pow(s, alpha - beta) / (sa - z);
        acc += std::exp(s) * f * ds;
    }
    return (acc / cd(0.0, N)).real();
}

}  // namespace detail

/// Generalized Mittag-Leffler function E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
///
/// The power series is used whenever it does not suffer from cancellation
/// (always for z >= 0). For negative z where the series loses more than three
/// digits, alpha < 1 switches to a Talbot-contour Laplace inversion and
/// alpha = 1 with integer beta uses exp and the recurrence
/// E_{1,b+1}(z) = (E_{1,b}(z) - 1/Gamma(b)) / z.
inline double mittag_leffler(double alpha, double beta, double z)
{
    if (!(alpha > 0.0)) throw ConfigError("mittag_leffler: alpha must be positive");
    if (!std::isfinite(beta) || !std::isfinite(z)) throw ConfigError("mittag_leffler: non-finite argument");
    if (std::abs(z) > 50.0) throw ConfigError("mittag_leffler: |z| must not exceed 50");

    if (z >= 0.0) return detail::ml_series(alpha, beta, z, 20000).value;

    double series_value = std::numeric_limits<double>::quiet_NaN();
    try {
        const auto s = detail::ml_series(alpha, beta, z, 20000);
        if (s.max_term <= 1e3 * std::abs(s.value)) return s.value;
        series_value = s.value;
    } catch (const SolverError&) {
        // fall through to the cancellation-free branches
    }

    if (alpha < 1.0) return detail::ml_talbot(alpha, beta, z, 28);
    if (alpha == 1.0 && beta >= 1.0 && beta == std::floor(beta)) {
        double e = std::exp(z);
        for (int b = 1; b < static_cast<int>(beta); ++b) e = (e - detail::rgamma(b)) / z;
        return e;
    }
    // alpha > 1: oscillatory, the series carries an absolute (not relative) error
    // of about 1e-16 times its largest term.
    if (std::isfinite(series_value)) return series_value;
    throw SolverError("mittag_leffler: no accurate method for alpha=" + std::to_string(alpha) +
                      ", beta=" + std::to_string(beta) + " at z=" + std::to_string(z));
}

}  // namespace westervelt
