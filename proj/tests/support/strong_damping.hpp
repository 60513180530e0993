#pragma once

// Stand-alone 1D Newmark solver for the strongly damped Westervelt equation
//   ((1 + k u) u_t)_t - c^2 u_xx - eps u_txx = f   on (a, b), u = 0 at both ends.
// Written without the library's assembly or kernel machinery so that it can
// serve as a reference for the delta-kernel path.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Tridiag {
    std::vector<double> lo, di, up;  // lo[i] couples i to i-1, up[i] couples i to i+1

    explicit Tridiag(std::size_t n) : lo(n, 0.0), di(n, 0.0), up(n, 0.0) {}

    [[nodiscard]] std::vector<double> apply(const std::vector<double>& x) const
    {
        const std::size_t n = di.size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = di[i] * x[i];
            if (i > 0) y[i] += lo[i] * x[i - 1];
            if (i + 1 < n) y[i] += up[i] * x[i + 1];
        }
        return y;
    }

    void axpy(double s, const Tridiag& o)
    {
        for (std::size_t i = 0; i < di.size(); ++i) {
            lo[i] += s * o.lo[i];
            di[i] += s * o.di[i];
            up[i] += s * o.up[i];
        }
    }

    // identity rows and columns at both end points
    void pin_ends()
    {
        const std::size_t n = di.size();
        di[0] = di[n - 1] = 1.0;
        up[0] = lo[1] = 0.0;
        lo[n - 1] = up[n - 2] = 0.0;
    }

    [[nodiscard]] std::vector<double> solve(std::vector<double> b) const
    {
        const std::size_t n = di.size();
        std::vector<double> c(n), x(n);
        c[0] = up[0] / di[0];
        b[0] /= di[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double m = di[i] - lo[i] * c[i - 1];
            c[i] = up[i] / m;
            b[i] = (b[i] - lo[i] * b[i - 1]) / m;
        }
        x[n - 1] = b[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = b[i] - c[i] * x[i + 1];
        return x;
    }
};

struct Problem {
    double a = 0.0, b = 0.5;
    int cells = 64;
    double c = 1500.0, k = 0.0, eps = 0.0;
    double dt = 1e-3;
    int steps = 100;
    double tol = 1e-8;
    std::function<double(double)> u0;
    std::function<double(double, double)> f;
};

class StrongDamping {
public:
    explicit StrongDamping(Problem p) : p_(std::move(p)), n_(static_cast<std::size_t>(p_.cells) + 1), h_((p_.b - p_.a) / p_.cells), K_(n_), M_(n_)
    {
        for (int e = 0; e < p_.cells; ++e) {
            const std::size_t i = static_cast<std::size_t>(e);
            K_.di[i] += 1.0 / h_;
            K_.di[i + 1] += 1.0 / h_;
            K_.up[i] -= 1.0 / h_;
            K_.lo[i + 1] -= 1.0 / h_;
        }
        M_ = weighted_mass(std::vector<double>(n_, 1.0));
    }

    [[nodiscard]] double x(std::size_t i) const { return p_.a + static_cast<double>(i) * h_; }

    /// int w phi_i phi_j for piecewise-linear w.
    [[nodiscard]] Tridiag weighted_mass(const std::vector<double>& w) const
    {
        Tridiag m(n_);
        for (std::size_t e = 0; e + 1 < n_; ++e) {
            const double w0 = w[e], w1 = w[e + 1];
            m.di[e] += h_ * (3.0 * w0 + w1) / 12.0;
            m.di[e + 1] += h_ * (w0 + 3.0 * w1) / 12.0;
            const double off = h_ * (w0 + w1) / 12.0;
            m.up[e] += off;
            m.lo[e + 1] += off;
        }
        return m;
    }

    [[nodiscard]] std::vector<double> load(double t) const
    {
        std::vector<double> r(n_, 0.0);
        if (!p_.f) return r;
        const double s = std::sqrt(0.6);
        const double xs[3] = {0.5 * (1 - s), 0.5, 0.5 * (1 + s)};
        const double ws[3] = {5.0 / 18, 8.0 / 18, 5.0 / 18};
        for (std::size_t e = 0; e + 1 < n_; ++e) {
            for (int q = 0; q < 3; ++q) {
                const double fq = p_.f(x(e) + h_ * xs[q], t) * ws[q] * h_;
                r[e] += fq * (1 - xs[q]);
                r[e + 1] += fq * xs[q];
            }
        }
        return r;
    }

    [[nodiscard]] double mass_norm(const std::vector<double>& z) const
    {
        const auto mz = M_.apply(z);
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += z[i] * mz[i];
        return std::sqrt(std::max(0.0, s));
    }

    /// Displacements d_0..d_steps.
    [[nodiscard]] std::vector<std::vector<double>> solve() const
    {
        std::vector<double> d(n_, 0.0), v(n_, 0.0), a(n_, 0.0);
        if (p_.u0) {
            for (std::size_t i = 1; i + 1 < n_; ++i) d[i] = p_.u0(x(i));
        }
        {
            Tridiag m = weighted_mass(coeff(d));
            m.pin_ends();
            auto rhs = load(0.0);
            const auto kd = K_.apply(d);
            for (std::size_t i = 0; i < n_; ++i) rhs[i] -= p_.c * p_.c * kd[i];
            pin(rhs);
            a = m.solve(rhs);
        }
        std::vector<std::vector<double>> out{d};
        const double dt = p_.dt;
        for (int s = 0; s < p_.steps; ++s) {
            std::vector<double> dp(n_), vp(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                dp[i] = d[i] + dt * v[i] + 0.25 * dt * dt * a[i];
                vp[i] = v[i] + 0.5 * dt * a[i];
            }
            const auto b = load((s + 1) * dt);
            std::vector<double> an = a;
            for (int it = 0;; ++it) {
                if (it == 50) throw std::runtime_error("oracle: fixed point did not converge");
                std::vector<double> dn(n_), vn(n_), kv(n_);
                for (std::size_t i = 0; i < n_; ++i) {
                    dn[i] = dp[i] + 0.25 * dt * dt * an[i];
                    vn[i] = vp[i] + 0.5 * dt * an[i];
                    kv[i] = p_.k * vn[i];
                }
                // (M_{1+kd} + dt/2 (M_{kv} + eps K) + dt^2/4 c^2 K) a = b - (M_{kv} + eps K) vp - c^2 K dp
                Tridiag damp = weighted_mass(kv);
                damp.axpy(p_.eps, K_);
                Tridiag lhs = weighted_mass(coeff(dn));
                lhs.axpy(0.5 * dt, damp);
                lhs.axpy(0.25 * dt * dt * p_.c * p_.c, K_);
                lhs.pin_ends();
                auto rhs = b;
                const auto cv = damp.apply(vp);
                const auto kd = K_.apply(dp);
                for (std::size_t i = 0; i < n_; ++i) rhs[i] -= cv[i] + p_.c * p_.c * kd[i];
                pin(rhs);
                const auto next = lhs.solve(rhs);
                std::vector<double> diff(n_);
                for (std::size_t i = 0; i < n_; ++i) diff[i] = next[i] - an[i];
                const double inc = mass_norm(diff), ref = mass_norm(an);
                an = next;
                if (inc <= p_.tol * std::max(1.0, ref)) break;
            }
            for (std::size_t i = 0; i < n_; ++i) {
                d[i] = dp[i] + 0.25 * dt * dt * an[i];
                v[i] = vp[i] + 0.5 * dt * an[i];
            }
            a = an;
            out.push_back(d);
        }
        return out;
    }

private:
    [[nodiscard]] std::vector<double> coeff(const std::vector<double>& d) const
    {
        std::vector<double> w(n_);
        for (std::size_t i = 0; i < n_; ++i) w[i] = 1.0 + p_.k * d[i];
        return w;
    }

    void pin(std::vector<double>& r) const { r.front() = r.back() = 0.0; }

    Problem p_;
    std::size_t n_;
    double h_;
    Tridiag K_, M_;
};

}  // namespace oracle
