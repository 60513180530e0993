#pragma once

// P1 finite elements on a Mesh: assembly of stiffness, (weighted) mass and
// load vectors, Ritz projection, interpolation and norms.
//
// All vectors are indexed by mesh vertex. Dirichlet vertices stay in the
// numbering; linear systems eliminate them row/column-wise through
// SparseSym::constrain, so fields in V_h carry exact zeros there.

#include "westervelt/errors.hpp"
#include "westervelt/mesh.hpp"
#include "westervelt/quadrature.hpp"
#include "westervelt/sparse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <memory>
#include <span>
#include <vector>

namespace westervelt {

using Gradient = std::array<double, 2>;

template <class F>
concept SpaceFunction = std::invocable<F, const Point&> &&
                        std::convertible_to<std::invoke_result_t<F, const Point&>, double>;

template <class F>
concept SpaceTimeFunction = std::invocable<F, const Point&, double> &&
                            std::convertible_to<std::invoke_result_t<F, const Point&, double>, double>;

template <class F>
concept GradientFunction = std::invocable<F, const Point&> &&
                           std::convertible_to<std::invoke_result_t<F, const Point&>, Gradient>;

/// Nodal coefficient vector bound to the mesh it lives on.
struct FeField {
    std::shared_ptr<const Mesh> mesh;
    std::vector<double> coeffs;

    FeField() = default;
    FeField(std::shared_ptr<const Mesh> m, std::vector<double> c) : mesh(std::move(m)), coeffs(std::move(c))
    {
        if (!mesh || coeffs.size() != mesh->num_vertices()) {
            throw ConfigError("FeField: coefficient count must equal the number of mesh vertices");
        }
    }
    static FeField zero(std::shared_ptr<const Mesh> m)
    {
        const std::size_t n = m->num_vertices();
        return FeField(std::move(m), std::vector<double>(n, 0.0));
    }
    [[nodiscard]] std::size_t size() const { return coeffs.size(); }
};

/// The P1 space on one mesh: shared sparsity pattern, Dirichlet mask and the
/// mesh-only matrices (stiffness, unweighted mass), assembled once.
class FeSpace {
public:
    explicit FeSpace(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh))
    {
        if (!mesh_) throw ConfigError("FeSpace: null mesh");
        const std::size_t n = mesh_->num_vertices();
        std::vector<std::vector<std::size_t>> adj(n);
        for (const auto& c : mesh_->cells()) {
            for (int i = 0; i < mesh_->nodes_per_cell(); ++i) {
                for (int j = 0; j < mesh_->nodes_per_cell(); ++j) {
                    adj[c[i]].push_back(static_cast<std::size_t>(c[j]));
                }
            }
        }
        pattern_ = SparsityPattern::from_adjacency(std::move(adj));
        fixed_.assign(n, false);
        for (std::size_t v = 0; v < n; ++v) fixed_[v] = mesh_->tag(v) == NodeTag::Dirichlet;
        stiffness_ = assemble_stiffness_();
        std::vector<double> one(n, 1.0);
        mass_ = weighted_mass(one);
    }

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    [[nodiscard]] std::size_t size() const { return mesh_->num_vertices(); }
    [[nodiscard]] const std::vector<bool>& fixed() const { return fixed_; }
    [[nodiscard]] const SparseSym& stiffness() const { return stiffness_; }
    [[nodiscard]] const SparseSym& mass() const { return mass_; }
    [[nodiscard]] SparseSym zero_matrix() const { return SparseSym(pattern_); }

    /// Mass matrix weighted by the P1 field w: entries int w phi_i phi_j, exact.
    [[nodiscard]] SparseSym weighted_mass(std::span<const double> w) const
    {
        SparseSym m(pattern_);
        weighted_mass_into(w, m);
        return m;
    }

    void weighted_mass_into(std::span<const double> w, SparseSym& out) const
    {
        if (w.size() != size()) throw ConfigError("weighted mass: weight field does not match the mesh");
        auto vals = out.values();
        std::fill(vals.begin(), vals.end(), 0.0);
        const Mesh& m = *mesh_;
        const int npc = m.nodes_per_cell();
        // Exact moments of barycentric products: 1D int l_i l_j l_k = |K| a!b!/(a+b+1)!,
        // 2D int l_i l_j l_k = 2|K| a!b!c!/(a+b+c+2)!.
        const double same3 = m.dim() == 1 ? 1.0 / 4.0 : 1.0 / 10.0;
        const double pair = m.dim() == 1 ? 1.0 / 12.0 : 1.0 / 30.0;
        const double distinct = 1.0 / 60.0;
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
            const auto& k = m.cell(c);
            const double meas = m.cell_measure(c);
            for (int i = 0; i < npc; ++i) {
                for (int j = 0; j < npc; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < npc; ++l) {
                        double moment;
                        if (i == j) moment = (l == i) ? same3 : pair;
                        else moment = (l == i || l == j) ? pair : distinct;
                        s += moment * w[k[l]];
                    }
                    vals[pattern_->find(k[i], k[j])] += meas * s;
                }
            }
        }
    }

    /// b_j = int f phi_j (3-point Gauss in 1D, 4-point Strang-Fix on triangles).
    template <SpaceFunction F>
    [[nodiscard]] std::vector<double> load(F&& f) const
    {
        std::vector<double> b(size(), 0.0);
        const Mesh& m = *mesh_;
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
            const auto& k = m.cell(c);
            const double meas = m.cell_measure(c);
            if (m.dim() == 1) {
                const double x0 = m.vertex(k[0])[0];
                for (int q = 0; q < quad::gauss3.n; ++q) {
                    const double xi = quad::gauss3.x[q];
                    const double fq = f(Point{x0 + meas * xi, 0.0}) * quad::gauss3.w[q] * meas;
                    b[k[0]] += fq * (1.0 - xi);
                    b[k[1]] += fq * xi;
                }
            } else {
                for (int q = 0; q < quad::tri4.n; ++q) {
                    const auto& lam = quad::tri4.bary[q];
                    const double fq = f(map_bary(k, lam)) * quad::tri4.w[q] * meas;
                    for (int i = 0; i < 3; ++i) b[k[i]] += fq * lam[i];
                }
            }
        }
        return b;
    }

    /// b_j = scale * int_{Gamma_N} g phi_j over the tagged Neumann facets.
    template <SpaceFunction G>
    [[nodiscard]] std::vector<double> neumann_load(G&& g, double scale) const
    {
        const Mesh& m = *mesh_;
        if (m.neumann_facets().empty()) throw ConfigError("Neumann load: mesh has no Neumann segment");
        std::vector<double> b(size(), 0.0);
        for (const auto& f : m.neumann_facets()) {
            const Point& pa = m.vertex(f[0]);
            const Point& pb = m.vertex(f[1]);
            const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
            for (int q = 0; q < quad::gauss3.n; ++q) {
                const double xi = quad::gauss3.x[q];
                const Point p{pa[0] + xi * (pb[0] - pa[0]), pa[1] + xi * (pb[1] - pa[1])};
                const double gq = scale * g(p) * quad::gauss3.w[q] * len;
                b[f[0]] += gq * (1.0 - xi);
                b[f[1]] += gq * xi;
            }
        }
        return b;
    }

    /// Ritz projection R_h phi from the gradient of phi: K c = (grad phi, grad phi_j).
    template <GradientFunction G>
    [[nodiscard]] std::vector<double> ritz(G&& grad) const
    {
        if (!mesh_->has_dirichlet()) throw ConfigError("Ritz projection: requires Dirichlet boundary nodes");
        const Mesh& m = *mesh_;
        std::vector<double> b(size(), 0.0);
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
            const auto& k = m.cell(c);
            const double meas = m.cell_measure(c);
            const auto gl = basis_gradients(c);
            if (m.dim() == 1) {
                const double x0 = m.vertex(k[0])[0];
                for (int q = 0; q < quad::gauss3.n; ++q) {
                    const Gradient gq = grad(Point{x0 + meas * quad::gauss3.x[q], 0.0});
                    const double wq = quad::gauss3.w[q] * meas;
                    for (int i = 0; i < 2; ++i) b[k[i]] += wq * gq[0] * gl[i][0];
                }
            } else {
                for (int q = 0; q < quad::tri4.n; ++q) {
                    const Gradient gq = grad(map_bary(k, quad::tri4.bary[q]));
                    const double wq = quad::tri4.w[q] * meas;
                    for (int i = 0; i < 3; ++i) b[k[i]] += wq * (gq[0] * gl[i][0] + gq[1] * gl[i][1]);
                }
            }
        }
        SparseSym a = stiffness_;
        a.constrain(fixed_);
        constrain_rhs(b);
        std::vector<double> x(size(), 0.0);
        solve_spd(a, b, x);
        return x;
    }

    /// Nodal interpolant.
    template <SpaceFunction F>
    [[nodiscard]] std::vector<double> interpolate(F&& f) const
    {
        std::vector<double> c(size());
        for (std::size_t v = 0; v < size(); ++v) c[v] = f(mesh_->vertex(v));
        return c;
    }

    /// True L2 distance ||f - u_h|| by 5-point Gauss (1D) or 7-point (2D) quadrature.
    template <SpaceFunction F>
    [[nodiscard]] double l2_error(std::span<const double> coeffs, F&& f) const
    {
        const Mesh& m = *mesh_;
        double s = 0.0;
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
            const auto& k = m.cell(c);
            const double meas = m.cell_measure(c);
            if (m.dim() == 1) {
                const double x0 = m.vertex(k[0])[0];
                for (int q = 0; q < quad::gauss5.n; ++q) {
                    const double xi = quad::gauss5.x[q];
                    const double uh = coeffs[k[0]] * (1.0 - xi) + coeffs[k[1]] * xi;
                    const double e = f(Point{x0 + meas * xi, 0.0}) - uh;
                    s += quad::gauss5.w[q] * meas * e * e;
                }
            } else {
                for (int q = 0; q < quad::tri7.n; ++q) {
                    const auto& lam = quad::tri7.bary[q];
                    const double uh = coeffs[k[0]] * lam[0] + coeffs[k[1]] * lam[1] + coeffs[k[2]] * lam[2];
                    const double e = f(map_bary(k, lam)) - uh;
                    s += quad::tri7.w[q] * meas * e * e;
                }
            }
        }
        return std::sqrt(s);
    }

    /// Zeroes the constrained entries of a right-hand side.
    void constrain_rhs(std::span<double> b) const
    {
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (fixed_[i]) b[i] = 0.0;
        }
    }

    /// Gradients of the barycentric basis functions on one cell (constant per cell).
    [[nodiscard]] std::array<Gradient, 3> basis_gradients(std::size_t c) const
    {
        const Mesh& m = *mesh_;
        const auto& k = m.cell(c);
        std::array<Gradient, 3> g{};
        if (m.dim() == 1) {
            const double len = m.cell_measure(c);
            g[0] = {-1.0 / len, 0.0};
            g[1] = {1.0 / len, 0.0};
            return g;
        }
        const double two_area = 2.0 * m.cell_measure(c);
        for (int i = 0; i < 3; ++i) {
            const Point& b = m.vertex(k[(i + 1) % 3]);
            const Point& p = m.vertex(k[(i + 2) % 3]);
            g[i] = {(b[1] - p[1]) / two_area, (p[0] - b[0]) / two_area};
        }
        return g;
    }

private:
    [[nodiscard]] Point map_bary(const std::array<int, 3>& k, const std::array<double, 3>& lam) const
    {
        Point p{0.0, 0.0};
        for (int i = 0; i < 3; ++i) {
            const Point& v = mesh_->vertex(k[i]);
            p[0] += lam[i] * v[0];
            p[1] += lam[i] * v[1];
        }
        return p;
    }

    [[nodiscard]] SparseSym assemble_stiffness_() const
    {
        SparseSym a(pattern_);
        const Mesh& m = *mesh_;
        const int npc = m.nodes_per_cell();
        for (std::size_t c = 0; c < m.num_cells(); ++c) {
            const auto& k = m.cell(c);
            const double meas = m.cell_measure(c);
            const auto g = basis_gradients(c);
            for (int i = 0; i < npc; ++i) {
                for (int j = 0; j < npc; ++j) {
                    a.add(k[i], k[j], meas * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
                }
            }
        }
        return a;
    }

    std::shared_ptr<const Mesh> mesh_;
    std::shared_ptr<const SparsityPattern> pattern_;
    std::vector<bool> fixed_;
    SparseSym stiffness_;
    SparseSym mass_;
};

// Free-function forms of the space operations.

inline SparseSym assemble_stiffness(const FeSpace& space) { return space.stiffness(); }

inline SparseSym assemble_weighted_mass(const FeSpace& space, const FeField& weight)
{
    if (weight.mesh.get() != &space.mesh()) throw ConfigError("weighted mass: weight lives on a different mesh");
    return space.weighted_mass(weight.coeffs);
}

template <SpaceTimeFunction F>
std::vector<double> assemble_load(const FeSpace& space, F&& f, double t)
{
    return space.load([&](const Point& p) { return f(p, t); });
}

template <SpaceTimeFunction G>
std::vector<double> assemble_neumann_load(const FeSpace& space, G&& g, double t, double c_squared)
{
    return space.neumann_load([&](const Point& p) { return g(p, t); }, c_squared);
}

template <GradientFunction G>
FeField ritz_project(const FeSpace& space, G&& grad)
{
    return FeField(space.mesh_ptr(), space.ritz(std::forward<G>(grad)));
}

template <SpaceFunction F>
FeField interpolate(const FeSpace& space, F&& f)
{
    return FeField(space.mesh_ptr(), space.interpolate(std::forward<F>(f)));
}

inline double l2_norm(const FeSpace& space, std::span<const double> c)
{
    return std::sqrt(std::max(0.0, space.mass().quadratic_form(c)));
}

inline double h1_seminorm(const FeSpace& space, std::span<const double> c)
{
    return std::sqrt(std::max(0.0, space.stiffness().quadratic_form(c)));
}

inline double linf_nodal(std::span<const double> c)
{
    double m = 0.0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace westervelt
