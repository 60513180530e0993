#pragma once

#include "westervelt/errors.hpp"
#include "westervelt/quadrature.hpp"
#include "westervelt/special.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace westervelt {

enum class KernelKind { Delta, Abel, MittagLeffler };

/// Which beta accompanies alpha in t^(beta-1) E_{alpha,beta}(-t^alpha).
enum class MlBeta { One, Alpha, TwoAlphaMinusOne };

/// Memory kernel of the damping term: Dirac delta, Abel or Mittag-Leffler type.
struct KernelSpec {
    KernelKind kind = KernelKind::Delta;
    double alpha = 0.0;
    MlBeta beta_variant = MlBeta::One;

    static KernelSpec delta() { return {}; }
    static KernelSpec abel(double alpha)
    {
        KernelSpec k{KernelKind::Abel, alpha, MlBeta::One};
        k.validate();
        return k;
    }
    static KernelSpec mittag_leffler(double alpha, MlBeta variant)
    {
        KernelSpec k{KernelKind::MittagLeffler, alpha, variant};
        k.validate();
        return k;
    }

    void validate() const
    {
        switch (kind) {
            case KernelKind::Delta: return;
            case KernelKind::Abel:
                if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("Abel kernel: alpha must lie in (0,1)");
                return;
            case KernelKind::MittagLeffler:
                if (!(alpha > 0.0 && alpha <= 1.0)) {
                    throw ConfigError("Mittag-Leffler kernel: alpha must lie in (0,1]");
                }
                if (beta_variant == MlBeta::TwoAlphaMinusOne && !(alpha > 0.5)) {
                    throw ConfigError("Mittag-Leffler kernel: beta = 2 alpha - 1 requires alpha > 1/2");
                }
                return;
        }
    }

    /// 0 for the Dirac delta, 1 for every L1 kernel.
    [[nodiscard]] int eta() const { return kind == KernelKind::Delta ? 0 : 1; }

    [[nodiscard]] double beta() const
    {
        switch (beta_variant) {
            case MlBeta::One: return 1.0;
            case MlBeta::Alpha: return alpha;
            case MlBeta::TwoAlphaMinusOne: return 2.0 * alpha - 1.0;
        }
        return 1.0;
    }

    bool operator==(const KernelSpec&) const = default;

    [[nodiscard]] std::string name() const
    {
        switch (kind) {
            case KernelKind::Delta: return "delta";
            case KernelKind::Abel: return "abel(" + std::to_string(alpha) + ")";
            case KernelKind::MittagLeffler: {
                const char* b = beta_variant == MlBeta::One ? "1" : beta_variant == MlBeta::Alpha ? "alpha" : "2alpha-1";
                return "mittag-leffler(" + std::to_string(alpha) + ", beta=" + b + ")";
            }
        }
        return "?";
    }
};

/// Pointwise kernel value for t > 0 (the delta has none).
inline double kernel_value(const KernelSpec& k, double t)
{
    if (k.kind == KernelKind::Delta) throw ConfigError("kernel_value: the Dirac delta has no pointwise value");
    if (!(t > 0.0)) throw ConfigError("kernel_value: t must be positive");
    if (k.kind == KernelKind::Abel) return std::pow(t, -k.alpha) * detail::rgamma(1.0 - k.alpha);
    const double b = k.beta();
    return std::pow(t, b - 1.0) * mittag_leffler(k.alpha, b, -std::pow(t, k.alpha));
}

/// Primitive int_0^t K(s) ds. The delta integrates to 1 for every t > 0.
/// Mittag-Leffler: int_0^t s^(b-1) E_{a,b}(-s^a) ds = t^b E_{a,b+1}(-t^a).
inline double kernel_integral(const KernelSpec& k, double t)
{
    if (t < 0.0) throw ConfigError("kernel_integral: t must be non-negative");
    if (t == 0.0) return 0.0;
    switch (k.kind) {
        case KernelKind::Delta: return 1.0;
        case KernelKind::Abel: return std::pow(t, 1.0 - k.alpha) * detail::rgamma(2.0 - k.alpha);
        case KernelKind::MittagLeffler: {
            const double b = k.beta();
            return std::pow(t, b) * mittag_leffler(k.alpha, b + 1.0, -std::pow(t, k.alpha));
        }
    }
    return 0.0;
}

/// Same primitive by adaptive quadrature of kernel_value; validation only.
inline double kernel_integral_quadrature(const KernelSpec& k, double a, double b, double tol = 1e-13)
{
    return quad::integrate([&](double s) { return kernel_value(k, s); }, a, b, tol);
}

/// ||K||_{M(0,T)}: 1 for the delta, the L1 norm otherwise.
inline double kernel_norm(const KernelSpec& k, double horizon)
{
    if (k.kind == KernelKind::Delta) return 1.0;
    return quad::integrate([&](double s) { return std::abs(kernel_value(k, s)); }, 0.0, horizon, 1e-10);
}

/// Lower-triangular L1 convolution weights on a uniform grid,
///   (K * v)(t_n) ~ sum_{j<n} (v_{j+1} + v_j)/2 * int_{t_j}^{t_{j+1}} K(t_n - s) ds,
/// stored per lag: lag_[m] = int_{m dt}^{(m+1) dt} K.
class ConvWeights {
public:
    ConvWeights(bool identity, double dt, std::vector<double> lag_integrals)
        : identity_(identity), dt_(dt), lag_(std::move(lag_integrals))
    {
    }

    [[nodiscard]] bool identity() const { return identity_; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] std::size_t n_steps() const { return lag_.size(); }
    [[nodiscard]] double lag_integral(std::size_t m) const { return lag_.at(m); }

    /// Coefficient of sample v_i in (K * v)(t_n).
    [[nodiscard]] double weight(std::size_t n, std::size_t i) const
    {
        if (i > n) return 0.0;
        if (identity_) return i == n ? 1.0 : 0.0;
        if (n == 0) return 0.0;
        if (n > lag_.size()) throw ConfigError("ConvWeights: step beyond the tabulated horizon");
        if (i == n) return 0.5 * lag_[0];
        if (i == 0) return 0.5 * lag_[n - 1];
        return 0.5 * (lag_[n - 1 - i] + lag_[n - i]);
    }

    /// Coefficient of the newest sample, folded into the implicit solve.
    [[nodiscard]] double current(std::size_t n) const { return weight(n, n); }

    /// Discrete convolution of scalar samples v_0..v_n at step n.
    [[nodiscard]] double convolve(std::size_t n, const std::vector<double>& v) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i <= n; ++i) s += weight(n, i) * v[i];
        return s;
    }

    [[nodiscard]] ConvWeights negated() const
    {
        if (identity_) throw ConfigError("ConvWeights: the identity cannot be negated");
        std::vector<double> l = lag_;
        for (double& x : l) x = -x;
        return ConvWeights(false, dt_, std::move(l));
    }

private:
    bool identity_;
    double dt_;
    std::vector<double> lag_;
};

inline ConvWeights l1_weights(const KernelSpec& k, double dt, std::size_t n_steps)
{
    if (!(dt > 0.0)) throw ConfigError("l1_weights: dt must be positive");
    k.validate();
    if (k.kind == KernelKind::Delta) return ConvWeights(true, dt, {});
    std::vector<double> lag(n_steps);
    double prev = 0.0;
    for (std::size_t m = 0; m < n_steps; ++m) {
        const double next = kernel_integral(k, static_cast<double>(m + 1) * dt);
        lag[m] = next - prev;
        prev = next;
    }
    return ConvWeights(false, dt, std::move(lag));
}

struct PositivityReport {
    double min_eigenvalue = 0.0;
    double norm = 0.0;
    bool pass = false;
};

/// Discrete analogue of int_0^t (K*y) y >= 0: the symmetric part of
/// Q[n-1][i-1] = dt * w[n][i], n, i = 1..n_steps, for samples with y_0 = 0.
/// Passes iff its smallest eigenvalue is >= -1e-8 ||Q||.
inline PositivityReport check_positivity(const ConvWeights& w, std::size_t n_steps)
{
    if (n_steps == 0 || n_steps > 512) throw ConfigError("check_positivity: n_steps must lie in [1, 512]");
    const auto n = static_cast<Eigen::Index>(n_steps);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c <= r; ++c) {
            q(r, c) = w.dt() * w.weight(static_cast<std::size_t>(r + 1), static_cast<std::size_t>(c + 1));
        }
    }
    const Eigen::MatrixXd sym = 0.5 * (q + q.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    PositivityReport rep;
    rep.min_eigenvalue = eig.eigenvalues().minCoeff();
    rep.norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    rep.pass = rep.min_eigenvalue >= -1e-8 * rep.norm;
    return rep;
}

inline PositivityReport check_positivity(const KernelSpec& k, double dt, std::size_t n_steps)
{
    if (n_steps > 512) throw ConfigError("check_positivity: n_steps must not exceed 512");
    return check_positivity(l1_weights(k, dt, n_steps), n_steps);
}

}  // namespace westervelt
