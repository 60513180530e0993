#pragma once

// Post-processing of trajectories: L-infinity-in-time error norms, the
// epsilon-difference error, quantities of interest, EOC tables and fits.

#include "westervelt/errors.hpp"
#include "westervelt/fe.hpp"
#include "westervelt/trajectory.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace westervelt {

/// How ||u - u_h|| is measured against a known function.
enum class ErrorMetric {
    Quadrature,        // true L2 distance by high-order quadrature
    NodalInterpolant,  // ||I_h u - u_h|| through the mass matrix
};

inline const char* to_string(ErrorMetric m)
{
    return m == ErrorMetric::Quadrature ? "quadrature" : "nodal-interpolant";
}

using ExactFn = std::function<double(const Point&, double)>;

namespace detail {

inline const std::vector<FieldsAt>& require_fields(const Trajectory& tr, const char* who)
{
    if (!tr.space) throw ConfigError(std::string(who) + ": trajectory has no space");
    if (tr.fields.size() != tr.records.size()) {
        throw ConfigError(std::string(who) + ": trajectory was run without keeping fields");
    }
    return tr.fields;
}

inline double distance_at(const FeSpace& space, std::span<const double> d, double t, const ExactFn& exact,
                          ErrorMetric metric)
{
    if (metric == ErrorMetric::Quadrature) {
        return space.l2_error(d, [&](const Point& p) { return exact(p, t); });
    }
    std::vector<double> e = space.interpolate([&](const Point& p) { return exact(p, t); });
    for (std::size_t i = 0; i < e.size(); ++i) e[i] -= d[i];
    return l2_norm(space, e);
}

}  // namespace detail

/// max_n ||u(t_n) - d_n||_{L2}.
inline double error_linf_l2(const Trajectory& tr, const ExactFn& exact, ErrorMetric metric = ErrorMetric::Quadrature)
{
    const auto& fields = detail::require_fields(tr, "error_linf_l2");
    double m = 0.0;
    for (const auto& f : fields) m = std::max(m, detail::distance_at(*tr.space, f.d, f.t, exact, metric));
    return m;
}

struct EpsDifference {
    double e_eps = 0.0;      // | ||u - u_h^eps|| - ||u - u_h^0|| |
    double err_eps = 0.0;    // ||u - u_h^eps||_{Linf(L2)}
    double err_zero = 0.0;   // ||u - u_h^0||_{Linf(L2)}
    double dist_u = 0.0;     // ||u_h^eps - u_h^0||_{Linf(L2)}
    double dist_ut = 0.0;    // ||u_ht^eps - u_ht^0||_{Linf(L2)}
    double dist_grad = 0.0;  // ||grad(u_h^eps - u_h^0)||_{Linf(L2)}

    [[nodiscard]] double distance() const { return dist_u + dist_ut + dist_grad; }
};

inline void check_same_grid(const Trajectory& a, const Trajectory& b)
{
    if (a.space->mesh().num_vertices() != b.space->mesh().num_vertices() ||
        a.space->mesh().num_cells() != b.space->mesh().num_cells()) {
        throw ConfigError("trajectories live on different meshes");
    }
    if (a.records.size() != b.records.size() || std::abs(a.dt - b.dt) > 1e-15 * std::max(a.dt, b.dt)) {
        throw ConfigError("trajectories use different time grids");
    }
}

inline EpsDifference eps_difference_error(const Trajectory& eps, const Trajectory& zero, const ExactFn& exact,
                                          ErrorMetric metric = ErrorMetric::Quadrature)
{
    const auto& fe = detail::require_fields(eps, "eps_difference_error");
    const auto& f0 = detail::require_fields(zero, "eps_difference_error");
    check_same_grid(eps, zero);
    EpsDifference r;
    r.err_eps = error_linf_l2(eps, exact, metric);
    r.err_zero = error_linf_l2(zero, exact, metric);
    r.e_eps = std::abs(r.err_eps - r.err_zero);

    const FeSpace& space = *eps.space;
    std::vector<double> dd(space.size()), dv(space.size());
    for (std::size_t n = 0; n < fe.size(); ++n) {
        for (std::size_t i = 0; i < dd.size(); ++i) {
            dd[i] = fe[n].d[i] - f0[n].d[i];
            dv[i] = fe[n].v[i] - f0[n].v[i];
        }
        r.dist_u = std::max(r.dist_u, l2_norm(space, dd));
        r.dist_ut = std::max(r.dist_ut, l2_norm(space, dv));
        r.dist_grad = std::max(r.dist_grad, h1_seminorm(space, dd));
    }
    return r;
}

/// max_n ||d_n||_{L2}; needs only the per-step records.
inline double qoi_linf_l2(const Trajectory& tr)
{
    double m = 0.0;
    for (const auto& r : tr.records) m = std::max(m, r.l2_d);
    return m;
}

/// max_n (E0 + E1)
inline double max_energy(const Trajectory& tr)
{
    double m = 0.0;
    for (const auto& r : tr.records) m = std::max(m, r.energy.e0 + r.energy.e1);
    return m;
}

/// Range of the nodal coefficient 1 + k u_h over the whole run.
inline std::pair<double, double> coefficient_range(const Trajectory& tr)
{
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : tr.records) {
        lo = std::min(lo, r.energy.min_coeff);
        hi = std::max(hi, r.energy.max_coeff);
    }
    return {lo, hi};
}

struct EocLevel {
    double param = 0.0;
    double error = 0.0;
};

struct EocTable {
    std::vector<EocLevel> levels;
    std::vector<double> eoc;       // NaN where undefined
    std::vector<bool> defined;

    [[nodiscard]] bool all_defined() const { return std::all_of(defined.begin(), defined.end(), [](bool b) { return b; }); }

    [[nodiscard]] bool all_within(double lo, double hi) const
    {
        for (std::size_t i = 0; i < eoc.size(); ++i) {
            if (!defined[i] || eoc[i] < lo || eoc[i] > hi) return false;
        }
        return !eoc.empty();
    }
};

/// eoc[i] = log(err_i / err_{i+1}) / log(p_i / p_{i+1}).
/// Parameters must not increase; a repeated parameter or a non-positive error
/// yields an undefined entry.
inline EocTable eoc(std::vector<EocLevel> levels)
{
    if (levels.size() < 2) throw ConfigError("eoc: at least two levels are required");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i].param > 0.0)) throw ConfigError("eoc: parameters must be positive");
        if (i > 0 && levels[i].param > levels[i - 1].param) {
            throw ConfigError("eoc: parameters must be non-increasing");
        }
    }
    EocTable t;
    t.levels = std::move(levels);
    for (std::size_t i = 0; i + 1 < t.levels.size(); ++i) {
        const auto& a = t.levels[i];
        const auto& b = t.levels[i + 1];
        const bool ok = a.param != b.param && a.error > 0.0 && b.error > 0.0 && std::isfinite(a.error) &&
                        std::isfinite(b.error);
        t.defined.push_back(ok);
        t.eoc.push_back(ok ? std::log(a.error / b.error) / std::log(a.param / b.param)
                           : std::numeric_limits<double>::quiet_NaN());
    }
    return t;
}

inline void write_csv(std::ostream& os, const EocTable& t)
{
    os.precision(17);
    os << "param,error,eoc\n";
    for (std::size_t i = 0; i < t.levels.size(); ++i) {
        os << t.levels[i].param << ',' << t.levels[i].error << ',';
        if (i > 0) {
            if (t.defined[i - 1]) {
                os << t.eoc[i - 1];
            } else {
                os << "undefined";
            }
        }
        os << '\n';
    }
}

inline nlohmann::json to_json(const EocTable& t)
{
    nlohmann::json j;
    j["levels"] = nlohmann::json::array();
    for (const auto& l : t.levels) j["levels"].push_back({{"param", l.param}, {"error", l.error}});
    j["eoc"] = nlohmann::json::array();
    for (std::size_t i = 0; i < t.eoc.size(); ++i) {
        j["eoc"].push_back(t.defined[i] ? nlohmann::json(t.eoc[i]) : nlohmann::json(nullptr));
    }
    return j;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares line y = slope x + intercept with its coefficient of determination.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("linear_fit: need at least two matching samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("linear_fit: abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

/// Slope of log y against log x.
inline LinearFit loglog_fit(std::span<const double> x, std::span<const double> y)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ConfigError("loglog_fit: samples must be positive");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return linear_fit(lx, ly);
}

}  // namespace westervelt
