#pragma once

#include "westervelt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <ranges>
#include <type_traits>
#include <span>
#include <string>
#include <vector>

namespace westervelt {

/// CSR row structure shared by every matrix assembled on one mesh.
struct SparsityPattern {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;  // size n+1
    std::vector<std::size_t> cols;     // sorted within each row
    bool tridiagonal = false;          // every row couples only i-1, i, i+1

    [[nodiscard]] std::size_t find(std::size_t row, std::size_t col) const
    {
        const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[row]);
        const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[row + 1]);
        const auto it = std::lower_bound(first, last, col);
        if (it == last || *it != col) throw SolverError("sparsity pattern: entry not present");
        return static_cast<std::size_t>(it - cols.begin());
    }

    /// Builds the pattern from per-row neighbour sets (diagonal included by the caller).
    static std::shared_ptr<const SparsityPattern> from_adjacency(std::vector<std::vector<std::size_t>> adj)
    {
        auto p = std::make_shared<SparsityPattern>();
        p->n = adj.size();
        p->row_ptr.assign(p->n + 1, 0);
        bool tri = true;
        for (std::size_t i = 0; i < p->n; ++i) {
            auto& row = adj[i];
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
            p->row_ptr[i + 1] = p->row_ptr[i] + row.size();
            for (std::size_t c : row) {
                if ((c > i ? c - i : i - c) > 1) tri = false;
            }
        }
        p->cols.reserve(p->row_ptr.back());
        for (const auto& row : adj) p->cols.insert(p->cols.end(), row.begin(), row.end());
        p->tridiagonal = tri;
        return p;
    }
};

/// Symmetric sparse matrix, both triangles stored.
class SparseSym {
public:
    SparseSym() = default;
    explicit SparseSym(std::shared_ptr<const SparsityPattern> pattern)
        : pattern_(std::move(pattern)), values_(pattern_->cols.size(), 0.0)
    {
    }

    [[nodiscard]] std::size_t size() const { return pattern_ ? pattern_->n : 0; }
    [[nodiscard]] const SparsityPattern& pattern() const { return *pattern_; }
    [[nodiscard]] const std::shared_ptr<const SparsityPattern>& pattern_ptr() const { return pattern_; }
    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    void add(std::size_t i, std::size_t j, double v) { values_[pattern_->find(i, j)] += v; }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const
    {
        const auto& p = *pattern_;
        const auto first = p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[i]);
        const auto last = p.cols.begin() + static_cast<std::ptrdiff_t>(p.row_ptr[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return values_[static_cast<std::size_t>(it - p.cols.begin())];
    }

    /// y = A x, accumulated in the element type of y.
    template <class X, class Y>
    void multiply(const X& x, Y&& y) const
    {
        using T = std::ranges::range_value_t<std::remove_cvref_t<Y>>;
        const auto& p = *pattern_;
        for (std::size_t i = 0; i < p.n; ++i) {
            T s = 0;
            for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) s += values_[k] * x[p.cols[k]];
            y[i] = s;
        }
    }

    template <class X>
    [[nodiscard]] auto operator*(const X& x) const
    {
        std::vector<std::ranges::range_value_t<X>> y(size());
        multiply(x, y);
        return y;
    }

    /// x^T A x
    template <class X>
    [[nodiscard]] auto quadratic_form(const X& x) const
    {
        using T = std::ranges::range_value_t<X>;
        const auto& p = *pattern_;
        T s = 0;
        for (std::size_t i = 0; i < p.n; ++i) {
            T r = 0;
            for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) r += values_[k] * x[p.cols[k]];
            s += x[i] * r;
        }
        return s;
    }

    /// this += alpha * other (same pattern required)
    SparseSym& add_scaled(double alpha, const SparseSym& other)
    {
        if (other.pattern_ != pattern_) throw SolverError("add_scaled: pattern mismatch");
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += alpha * other.values_[k];
        return *this;
    }

    SparseSym& scale(double alpha)
    {
        for (double& v : values_) v *= alpha;
        return *this;
    }

    [[nodiscard]] std::vector<double> diagonal() const
    {
        std::vector<double> d(size());
        for (std::size_t i = 0; i < size(); ++i) d[i] = at(i, i);
        return d;
    }

    /// Row/column elimination of constrained unknowns (homogeneous values): the
    /// constrained rows and columns are zeroed and a unit diagonal inserted.
    void constrain(const std::vector<bool>& fixed)
    {
        const auto& p = *pattern_;
        for (std::size_t i = 0; i < p.n; ++i) {
            for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k) {
                const std::size_t j = p.cols[k];
                if (fixed[i] || fixed[j]) values_[k] = (i == j) ? 1.0 : 0.0;
            }
        }
    }

private:
    std::shared_ptr<const SparsityPattern> pattern_;
    std::vector<double> values_;
};

struct SolveOptions {
    double rel_tol = 1e-12;
    int max_iter = 10000;
};

struct SolveReport {
    int iterations = 0;
    double rel_residual = 0.0;
};

namespace detail {

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b)
{
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Thomas algorithm on an SPD tridiagonal system.
template <class T>
void solve_tridiagonal(const SparseSym& a, std::span<const T> b, std::span<T> x)
{
    const std::size_t n = a.size();
    std::vector<T> c(n, 0), d(n, 0);
    const T diag = a.at(0, 0);
    if (!(diag > 0.0)) throw SolverError("tridiagonal solve: non-positive pivot");
    c[0] = n > 1 ? a.at(0, 1) / diag : 0.0;
    d[0] = b[0] / diag;
    for (std::size_t i = 1; i < n; ++i) {
        const T lower = a.at(i, i - 1);
        const T denom = a.at(i, i) - lower * c[i - 1];
        if (!(denom > 0.0)) throw SolverError("tridiagonal solve: non-positive pivot");
        c[i] = i + 1 < n ? a.at(i, i + 1) / denom : 0.0;
        d[i] = (b[i] - lower * d[i - 1]) / denom;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients; x holds the initial guess on entry.
template <class T>
SolveReport solve_cg(const SparseSym& a, std::span<const T> b, std::span<T> x, const SolveOptions& opts = {})
{
    using std::sqrt;
    const std::size_t n = a.size();
    const std::vector<double> diag = a.diagonal();
    for (double dv : diag) {
        if (!(dv > 0.0)) throw SolverError("cg: matrix has a non-positive diagonal entry");
    }
    std::vector<T> r(n), z(n), p(n), q(n);
    const std::vector<T> bv(b.begin(), b.end());
    a.multiply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    const T bnorm = sqrt(detail::dot(bv, bv));
    if (bnorm == 0) {
        std::fill(x.begin(), x.end(), T(0));
        return {0, 0.0};
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    T rz = detail::dot(r, z);
    for (int it = 0; it <= opts.max_iter; ++it) {
        const T rnorm = sqrt(detail::dot(r, r));
        if (rnorm <= opts.rel_tol * bnorm) return {it, static_cast<double>(rnorm / bnorm)};
        if (it == opts.max_iter) break;
        a.multiply(p, q);
        const T pq = detail::dot(p, q);
        if (!(pq > 0)) throw SolverError("cg: matrix is not positive definite");
        const T alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const T rz_new = detail::dot(r, z);
        const T beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("cg: no convergence within " + std::to_string(opts.max_iter) + " iterations");
}

/// SPD solve: direct for tridiagonal patterns, PCG otherwise.
template <class T>
SolveReport solve_spd(const SparseSym& a, std::span<const T> b, std::span<T> x, const SolveOptions& opts = {})
{
    if (a.pattern().tridiagonal) {
        detail::solve_tridiagonal(a, b, x);
        return {1, 0.0};
    }
    return solve_cg(a, b, x, opts);
}

inline SolveReport solve_spd(const SparseSym& a, std::span<const double> b, std::span<double> x,
                             const SolveOptions& opts = {})
{
    return solve_spd<double>(a, b, x, opts);
}

inline SolveReport solve_cg(const SparseSym& a, std::span<const double> b, std::span<double> x,
                            const SolveOptions& opts = {})
{
    return solve_cg<double>(a, b, x, opts);
}

}  // namespace westervelt
