#pragma once

// Newmark predictor-corrector integration (acceleration form) of
//
//   M_{1+k u} u'' + M_{k u'} u' + c^2 K u + eps K (K * u') = b(t)
//
// with a fixed-point loop on the solution-dependent mass matrices and L1
// evaluation of the memory term.

#include "westervelt/errors.hpp"
#include "westervelt/fe.hpp"
#include "westervelt/kernels.hpp"
#include "westervelt/mesh.hpp"
#include "westervelt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace westervelt {

struct NewmarkParams {
    double beta = 0.25;
    double gamma = 0.5;

    void validate() const
    {
        if (!(beta >= 0.0 && beta <= 0.5)) throw ConfigError("newmark.beta must lie in [0, 1/2]");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("newmark.gamma must lie in [0, 1]");
    }
};

struct IntervalMeshSpec {
    double a = 0.0;
    double b = 0.5;
    int n_cells = 64;
};

struct RectMeshSpec {
    double lx = 0.3;
    double ly = 0.3;
    int nx = 120;
    int ny = 120;
    BoundarySegment neumann{Side::Left, 0.21, 0.3};
    OuterBoundary outer = OuterBoundary::HomogeneousNeumann;
};

using MeshSpec = std::variant<IntervalMeshSpec, RectMeshSpec>;

inline std::shared_ptr<const Mesh> build_mesh(const MeshSpec& spec)
{
    if (const auto* iv = std::get_if<IntervalMeshSpec>(&spec)) {
        return std::make_shared<const Mesh>(build_interval_mesh(iv->a, iv->b, iv->n_cells));
    }
    const auto& r = std::get<RectMeshSpec>(spec);
    return std::make_shared<const Mesh>(build_rect_tri_mesh(r.lx, r.ly, r.nx, r.ny, r.neumann, r.outer));
}

using ScalarFn = std::function<double(const Point&)>;
using GradientFn = std::function<Gradient(const Point&)>;
using SourceFn = std::function<double(const Point&, double)>;

/// Initial datum given by value and gradient (the gradient drives the Ritz projection).
struct InitialDatum {
    ScalarFn value;
    GradientFn gradient;
};

struct SimConfig {
    double c = 1500.0;
    double k = -3e-9;
    double eps = 0.0;
    KernelSpec kernel = KernelSpec::delta();
    double final_time = 0.25;
    double dt = 1e-3;
    NewmarkParams newmark;
    double fp_tol = 1e-8;
    int fp_max_iter = 50;
    MeshSpec mesh = IntervalMeshSpec{};
    std::optional<InitialDatum> u0;  // absent: zero
    std::optional<InitialDatum> u1;  // absent: zero
    SourceFn source;                 // absent: zero
    SourceFn neumann;                // boundary datum g(x, t) on the tagged segment; absent: none

    void validate() const
    {
        if (!(c > 0.0)) throw ConfigError("c must be positive");
        if (!std::isfinite(k)) throw ConfigError("k must be finite");
        if (!(eps >= 0.0)) throw ConfigError("eps must be non-negative");
        if (!(dt > 0.0)) throw ConfigError("dt must be positive");
        if (!(final_time >= 0.0)) throw ConfigError("T must be non-negative");
        if (!(fp_tol > 0.0)) throw ConfigError("fp_tol must be positive");
        if (fp_max_iter < 1) throw ConfigError("fp_max_iter must be at least 1");
        newmark.validate();
        kernel.validate();
        (void)n_steps();
    }

    /// Number of steps N with N dt = T; T must be an integer multiple of dt.
    [[nodiscard]] std::size_t n_steps() const
    {
        const double r = std::round(final_time / dt);
        if (std::abs(final_time - r * dt) > 1e-12 * std::max(final_time, dt)) {
            throw ConfigError("T must be an integer multiple of dt");
        }
        return static_cast<std::size_t>(r);
    }
};

/// Time level n: coefficients plus the velocity history for the memory term.
template <class Real>
struct BasicState {
    std::size_t step = 0;
    double t = 0.0;
    std::vector<Real> d, v, a;
    std::vector<std::vector<Real>> history;  // v_0..v_n; empty for the delta kernel
    int fp_iterations = 0;
};

/// Effective matrix and right-hand side of one fixed-point iteration.
template <class Real>
struct BasicStepSystem {
    SparseSym matrix;
    std::vector<Real> rhs;
};

template <class Real>
struct BasicRunOptions {
    bool keep_fields = true;
    std::vector<double> snapshot_times;
    std::function<void(const BasicState<Real>&)> observer;
    std::ostream* checkpoint = nullptr;  // CSV rows step,t,vertex,d,v,a
};

/// Integrator over state vectors of type Real. Matrices and loads stay in
/// double; the state, the right-hand sides and the solves use Real. The wide
/// type matters when comparing runs that differ by tiny damping: with c^2 of
/// order 1e6, rounding in c^2 K d alone perturbs the velocity at the 1e-10 level.
template <class Real>
class BasicSimulator {
public:
    using State = BasicState<Real>;
    using StepSystem = BasicStepSystem<Real>;
    using RunOptions = BasicRunOptions<Real>;
    using Vec = std::vector<Real>;

    explicit BasicSimulator(SimConfig cfg)
        : cfg_(std::move(cfg))
    {
        cfg_.validate();
        space_ = std::make_shared<const FeSpace>(build_mesh(cfg_.mesh));
        n_steps_ = cfg_.n_steps();
        weights_ = std::make_unique<ConvWeights>(l1_weights(cfg_.kernel, cfg_.dt, n_steps_));
        if ((cfg_.u0 || cfg_.u1) && !space_->mesh().has_dirichlet()) {
            throw ConfigError("non-zero initial data need a Dirichlet boundary for the Ritz projection");
        }
    }

    [[nodiscard]] const SimConfig& config() const { return cfg_; }
    [[nodiscard]] const FeSpace& space() const { return *space_; }
    [[nodiscard]] const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
    [[nodiscard]] const ConvWeights& weights() const { return *weights_; }
    [[nodiscard]] std::size_t n_steps() const { return n_steps_; }

    /// b(t) = (f(t), phi_j) + c^2 (g(t), phi_j)_{Gamma_N}
    [[nodiscard]] std::vector<double> load(double t) const
    {
        std::vector<double> b(space_->size(), 0.0);
        if (cfg_.source) b = space_->load([&](const Point& p) { return cfg_.source(p, t); });
        if (cfg_.neumann) {
            const auto g = space_->neumann_load([&](const Point& p) { return cfg_.neumann(p, t); }, cfg_.c * cfg_.c);
            for (std::size_t i = 0; i < b.size(); ++i) b[i] += g[i];
        }
        return b;
    }

    /// Solves M_{1+k u0h} a0 = b(0) - c^2 K u0h - eps K u1h - M_{k u1h} u1h, where
    /// the damping term is present only for the delta kernel ((K * grad u_t)(0) = 0 otherwise).
    [[nodiscard]] Vec initial_acceleration(const Vec& u0h, const Vec& u1h) const
    {
        check_coefficient(u0h, "initial data");
        const std::size_t n = space_->size();
        const SparseSym& K = space_->stiffness();
        const std::vector<double> b = load(0.0);
        Vec rhs(b.begin(), b.end()), tmp(n);
        K.multiply(u0h, tmp);
        for (std::size_t i = 0; i < n; ++i) rhs[i] -= cfg_.c * cfg_.c * tmp[i];
        if (cfg_.eps > 0.0 && cfg_.kernel.kind == KernelKind::Delta) {
            K.multiply(u1h, tmp);
            for (std::size_t i = 0; i < n; ++i) rhs[i] -= cfg_.eps * tmp[i];
        }
        const SparseSym mkv = space_->weighted_mass(scaled(u1h, cfg_.k, 0.0));
        mkv.multiply(u1h, tmp);
        for (std::size_t i = 0; i < n; ++i) rhs[i] -= tmp[i];

        SparseSym m = space_->weighted_mass(scaled(u0h, cfg_.k, 1.0));
        m.constrain(space_->fixed());
        constrain(rhs);
        Vec a(n, 0);
        solve_spd<Real>(m, rhs, a, solve_opts());
        return a;
    }

    /// Ritz projections of u0, u1 and the consistent initial acceleration.
    [[nodiscard]] State initial_state() const
    {
        State s;
        const std::size_t n = space_->size();
        s.d = cfg_.u0 ? widen(space_->ritz(cfg_.u0->gradient)) : Vec(n, 0);
        s.v = cfg_.u1 ? widen(space_->ritz(cfg_.u1->gradient)) : Vec(n, 0);
        s.a = initial_acceleration(s.d, s.v);
        if (cfg_.kernel.kind != KernelKind::Delta) s.history.push_back(s.v);
        return s;
    }

    /// Velocity-history part of (K * v)(t_{n+1}): sum_{i<=n} w[n+1][i] v_i.
    [[nodiscard]] Vec history_sum(const State& s) const
    {
        Vec h(space_->size(), 0);
        if (cfg_.kernel.kind == KernelKind::Delta) return h;
        const std::size_t next = s.step + 1;
        for (std::size_t i = 0; i < s.history.size(); ++i) {
            const Real w = weights_->weight(next, i);
            const auto& vi = s.history[i];
            for (std::size_t j = 0; j < h.size(); ++j) h[j] += w * vi[j];
        }
        return h;
    }

    /// Linear system for a_{n+1} given the current fixed-point iterate.
    [[nodiscard]] StepSystem step_system(const State& s, const Vec& a_iter, const Vec& hist) const
    {
        const std::size_t n = space_->size();
        const double dt = cfg_.dt, beta = cfg_.newmark.beta, gamma = cfg_.newmark.gamma;
        const double c2 = cfg_.c * cfg_.c;
        const SparseSym& K = space_->stiffness();

        Vec dp(n), vp(n), dn(n), vn(n);
        predict(s, dp, vp);
        for (std::size_t i = 0; i < n; ++i) {
            dn[i] = dp[i] + beta * dt * dt * a_iter[i];
            vn[i] = vp[i] + gamma * dt * a_iter[i];
        }
        check_coefficient(dn, "t = " + std::to_string(s.t + dt));

        const SparseSym mkv = space_->weighted_mass(scaled(vn, cfg_.k, 0.0));
        const std::vector<double> b = load(s.t + dt);
        StepSystem sys{space_->weighted_mass(scaled(dn, cfg_.k, 1.0)), Vec(b.begin(), b.end())};
        sys.matrix.add_scaled(gamma * dt, mkv);
        sys.matrix.add_scaled(beta * dt * dt * c2, K);

        Vec tmp(n);
        K.multiply(dp, tmp);
        for (std::size_t i = 0; i < n; ++i) sys.rhs[i] -= c2 * tmp[i];
        mkv.multiply(vp, tmp);
        for (std::size_t i = 0; i < n; ++i) sys.rhs[i] -= tmp[i];

        if (cfg_.eps > 0.0) {
            const double w0 = weights_->current(s.step + 1);
            sys.matrix.add_scaled(gamma * dt * cfg_.eps * w0, K);
            Vec mem(n);
            for (std::size_t i = 0; i < n; ++i) mem[i] = hist[i] + w0 * vp[i];
            K.multiply(mem, tmp);
            for (std::size_t i = 0; i < n; ++i) sys.rhs[i] -= cfg_.eps * tmp[i];
        }
        sys.matrix.constrain(space_->fixed());
        constrain(sys.rhs);
        return sys;
    }

    /// Advances the state by one step in place.
    void step(State& s) const
    {
        using std::sqrt;
        if (s.step >= n_steps_) throw ConfigError("step: already at the final time");
        const std::size_t n = space_->size();
        const double dt = cfg_.dt, beta = cfg_.newmark.beta, gamma = cfg_.newmark.gamma;
        const Vec hist = history_sum(s);
        const SparseSym& M = space_->mass();

        Vec a_iter = s.a, a_next(n), diff(n);
        int it = 1;
        for (;; ++it) {
            const StepSystem sys = step_system(s, a_iter, hist);
            a_next = a_iter;
            solve_spd<Real>(sys.matrix, sys.rhs, a_next, solve_opts());
            for (std::size_t i = 0; i < n; ++i) diff[i] = a_next[i] - a_iter[i];
            const Real inc = sqrt(std::max(Real(0), M.quadratic_form(diff)));
            const Real ref = sqrt(std::max(Real(0), M.quadratic_form(a_iter)));
            a_iter.swap(a_next);
            if (inc <= cfg_.fp_tol * std::max(Real(1), ref)) break;
            if (it >= cfg_.fp_max_iter) {
                throw SolverError("fixed-point iteration did not converge within " +
                                  std::to_string(cfg_.fp_max_iter) + " iterations at t = " +
                                  std::to_string(s.t + dt));
            }
        }

        Vec dp(n), vp(n);
        predict(s, dp, vp);
        for (std::size_t i = 0; i < n; ++i) {
            s.d[i] = dp[i] + beta * dt * dt * a_iter[i];
            s.v[i] = vp[i] + gamma * dt * a_iter[i];
        }
        s.a = std::move(a_iter);
        s.step += 1;
        s.t = static_cast<double>(s.step) * dt;
        s.fp_iterations = it;
        if (cfg_.kernel.kind != KernelKind::Delta) s.history.push_back(s.v);
    }

    [[nodiscard]] StepRecord record(const State& s) const
    {
        const SparseSym& M = space_->mass();
        const SparseSym& K = space_->stiffness();
        StepRecord r;
        r.t = s.t;
        const double vmv = static_cast<double>(M.quadratic_form(s.v));
        const double dkd = static_cast<double>(K.quadratic_form(s.d));
        r.energy.t = s.t;
        r.energy.e0 = vmv + dkd;
        r.energy.e1 = static_cast<double>(M.quadratic_form(s.a) + K.quadratic_form(s.v));
        const auto [lo, hi] = coefficient_range(s.d);
        r.energy.min_coeff = lo;
        r.energy.max_coeff = hi;
        r.l2_d = std::sqrt(std::max(0.0, static_cast<double>(M.quadratic_form(s.d))));
        r.discrete_energy = 0.5 * vmv + 0.5 * cfg_.c * cfg_.c * dkd;
        r.fp_iterations = s.fp_iterations;
        return r;
    }

    [[nodiscard]] Trajectory run(const RunOptions& opts = {}) const
    {
        Trajectory traj;
        traj.space = space_;
        traj.dt = cfg_.dt;
        traj.records.reserve(n_steps_ + 1);

        std::vector<std::size_t> snap_steps;
        for (double ts : opts.snapshot_times) {
            const double clamped = std::clamp(ts, 0.0, cfg_.final_time);
            snap_steps.push_back(static_cast<std::size_t>(std::llround(clamped / cfg_.dt)));
        }

        State s = initial_state();
        auto visit = [&](const State& st) {
            traj.records.push_back(record(st));
            if (opts.keep_fields) traj.fields.push_back(narrow(st));
            for (std::size_t k = 0; k < snap_steps.size(); ++k) {
                if (snap_steps[k] == st.step) traj.snapshots.push_back(narrow(st));
            }
            if (opts.checkpoint) write_checkpoint(*opts.checkpoint, st);
            if (opts.observer) opts.observer(st);
        };
        if (opts.checkpoint) {
            opts.checkpoint->precision(17);
            *opts.checkpoint << "step,t,vertex,d,v,a\n";
        }
        visit(s);
        while (s.step < n_steps_) {
            step(s);
            visit(s);
        }
        return traj;
    }

private:
    [[nodiscard]] static Vec widen(const std::vector<double>& x) { return Vec(x.begin(), x.end()); }

    [[nodiscard]] static std::vector<double> to_double(const Vec& x) { return std::vector<double>(x.begin(), x.end()); }

    [[nodiscard]] static FieldsAt narrow(const State& s) { return {s.t, to_double(s.d), to_double(s.v), to_double(s.a)}; }

    [[nodiscard]] static std::vector<double> scaled(const Vec& x, double k, double shift)
    {
        std::vector<double> w(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) w[i] = static_cast<double>(shift + k * x[i]);
        return w;
    }

    void constrain(Vec& b) const
    {
        const auto& fixed = space_->fixed();
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (fixed[i]) b[i] = 0;
        }
    }

    [[nodiscard]] std::pair<double, double> coefficient_range(const Vec& d) const
    {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const Real& x : d) {
            const double a = static_cast<double>(1.0 + cfg_.k * x);
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        return {lo, hi};
    }

    /// Leading coefficient must stay inside [1/2, 3/2] at every node.
    void check_coefficient(const Vec& d, const std::string& where) const
    {
        const auto [lo, hi] = coefficient_range(d);
        if (lo < 0.5 || hi > 1.5) {
            throw DegeneracyError("1 + k u left [1/2, 3/2] at " + where + " (range [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "])");
        }
    }

    void predict(const State& s, Vec& dp, Vec& vp) const
    {
        const double dt = cfg_.dt, beta = cfg_.newmark.beta, gamma = cfg_.newmark.gamma;
        for (std::size_t i = 0; i < s.d.size(); ++i) {
            dp[i] = s.d[i] + dt * s.v[i] + 0.5 * dt * dt * (1.0 - 2.0 * beta) * s.a[i];
            vp[i] = s.v[i] + dt * (1.0 - gamma) * s.a[i];
        }
    }

    static void write_checkpoint(std::ostream& os, const State& s)
    {
        for (std::size_t i = 0; i < s.d.size(); ++i) {
            os << s.step << ',' << s.t << ',' << i << ',' << static_cast<double>(s.d[i]) << ','
               << static_cast<double>(s.v[i]) << ',' << static_cast<double>(s.a[i]) << '\n';
        }
    }

    [[nodiscard]] static SolveOptions solve_opts() { return {1e-14, 20000}; }

    SimConfig cfg_;
    std::shared_ptr<const FeSpace> space_;
    std::size_t n_steps_ = 0;
    std::unique_ptr<ConvWeights> weights_;
};

/// Default integrator: extended-precision state.
using Simulator = BasicSimulator<long double>;
using State = Simulator::State;
using StepSystem = Simulator::StepSystem;
using RunOptions = Simulator::RunOptions;

inline Trajectory run(const SimConfig& cfg, const RunOptions& opts = {}) { return Simulator(cfg).run(opts); }

}  // namespace westervelt
