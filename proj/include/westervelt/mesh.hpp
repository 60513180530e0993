#pragma once

#include "westervelt/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace westervelt {

enum class NodeTag { Free, Dirichlet, NeumannSegment };

enum class Side { Left, Right, Bottom, Top };

/// Portion of one side of a rectangle, e.g. {x = 0, 0.21 <= y <= 0.3}.
struct BoundarySegment {
    Side side = Side::Left;
    double lo = 0.0;
    double hi = 0.0;
};

/// How the boundary outside the Neumann segment is treated.
enum class OuterBoundary { Dirichlet, HomogeneousNeumann };

using Point = std::array<double, 2>;

/// Simplicial P1 mesh in 1D (intervals) or 2D (triangles). Immutable once built.
class Mesh {
public:
    Mesh(int dim, std::vector<Point> vertices, std::vector<std::array<int, 3>> cells,
         std::vector<NodeTag> tags, std::vector<std::array<int, 2>> neumann_facets = {})
        : dim_(dim),
          vertices_(std::move(vertices)),
          cells_(std::move(cells)),
          tags_(std::move(tags)),
          neumann_facets_(std::move(neumann_facets))
    {
        validate();
        h_ = 0.0;
        for (std::size_t c = 0; c < cells_.size(); ++c) h_ = std::max(h_, cell_diameter(c));
    }

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int nodes_per_cell() const { return dim_ + 1; }
    [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
    [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }
    [[nodiscard]] const std::vector<Point>& vertices() const { return vertices_; }
    [[nodiscard]] const Point& vertex(std::size_t i) const { return vertices_[i]; }
    [[nodiscard]] const std::vector<std::array<int, 3>>& cells() const { return cells_; }
    [[nodiscard]] const std::array<int, 3>& cell(std::size_t c) const { return cells_[c]; }
    [[nodiscard]] const std::vector<NodeTag>& tags() const { return tags_; }
    [[nodiscard]] NodeTag tag(std::size_t i) const { return tags_[i]; }
    [[nodiscard]] const std::vector<std::array<int, 2>>& neumann_facets() const { return neumann_facets_; }
    [[nodiscard]] double h() const { return h_; }

    [[nodiscard]] bool has_dirichlet() const
    {
        return std::any_of(tags_.begin(), tags_.end(), [](NodeTag t) { return t == NodeTag::Dirichlet; });
    }

    /// Length (1D) or area (2D) of a cell; positive for valid meshes.
    [[nodiscard]] double cell_measure(std::size_t c) const
    {
        const auto& k = cells_[c];
        if (dim_ == 1) return vertices_[k[1]][0] - vertices_[k[0]][0];
        const Point& a = vertices_[k[0]];
        const Point& b = vertices_[k[1]];
        const Point& p = vertices_[k[2]];
        return 0.5 * ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]));
    }

    [[nodiscard]] double cell_diameter(std::size_t c) const
    {
        const auto& k = cells_[c];
        if (dim_ == 1) return std::abs(vertices_[k[1]][0] - vertices_[k[0]][0]);
        double d = 0.0;
        for (int i = 0; i < 3; ++i) {
            const Point& a = vertices_[k[i]];
            const Point& b = vertices_[k[(i + 1) % 3]];
            d = std::max(d, std::hypot(b[0] - a[0], b[1] - a[1]));
        }
        return d;
    }

    /// Plain-text dump: vertices, cells, tags, Neumann facets.
    void write(std::ostream& os) const
    {
        os.precision(17);
        os << "# westervelt-mesh v1\n";
        os << "dim " << dim_ << "\n";
        os << "vertices " << vertices_.size() << "\n";
        for (const auto& v : vertices_) {
            os << v[0];
            if (dim_ == 2) os << ' ' << v[1];
            os << "\n";
        }
        os << "cells " << cells_.size() << "\n";
        for (const auto& c : cells_) {
            os << c[0] << ' ' << c[1];
            if (dim_ == 2) os << ' ' << c[2];
            os << "\n";
        }
        os << "tags\n";
        for (std::size_t i = 0; i < tags_.size(); ++i) {
            if (tags_[i] == NodeTag::Free) continue;
            os << i << ' ' << (tags_[i] == NodeTag::Dirichlet ? "dirichlet" : "neumann") << "\n";
        }
        os << "neumann_facets " << neumann_facets_.size() << "\n";
        for (const auto& f : neumann_facets_) os << f[0] << ' ' << f[1] << "\n";
    }

    static Mesh read(std::istream& is)
    {
        auto expect = [&](const std::string& word) {
            std::string tok;
            if (!(is >> tok) || tok != word) throw ConfigError("mesh file: expected '" + word + "'");
        };
        std::string header;
        std::getline(is, header);
        if (header.rfind("# westervelt-mesh", 0) != 0) throw ConfigError("mesh file: missing header line");
        int dim = 0;
        expect("dim");
        is >> dim;
        if (dim != 1 && dim != 2) throw ConfigError("mesh file: dim must be 1 or 2");
        std::size_t nv = 0;
        expect("vertices");
        is >> nv;
        std::vector<Point> verts(nv, Point{0.0, 0.0});
        for (auto& v : verts) {
            is >> v[0];
            if (dim == 2) is >> v[1];
        }
        std::size_t nc = 0;
        expect("cells");
        is >> nc;
        std::vector<std::array<int, 3>> cells(nc, {0, 0, 0});
        for (auto& c : cells) {
            is >> c[0] >> c[1];
            if (dim == 2) is >> c[2];
        }
        expect("tags");
        std::vector<NodeTag> tags(nv, NodeTag::Free);
        std::vector<std::array<int, 2>> facets;
        std::string tok;
        while (is >> tok) {
            if (tok == "neumann_facets") {
                std::size_t nf = 0;
                is >> nf;
                facets.resize(nf);
                for (auto& f : facets) is >> f[0] >> f[1];
                break;
            }
            const std::size_t idx = std::stoul(tok);
            std::string kind;
            is >> kind;
            if (idx >= nv) throw ConfigError("mesh file: tag index out of range");
            if (kind == "dirichlet") tags[idx] = NodeTag::Dirichlet;
            else if (kind == "neumann") tags[idx] = NodeTag::NeumannSegment;
            else throw ConfigError("mesh file: unknown tag '" + kind + "'");
        }
        if (!is && !is.eof()) throw ConfigError("mesh file: malformed content");
        return Mesh(dim, std::move(verts), std::move(cells), std::move(tags), std::move(facets));
    }

private:
    void validate() const
    {
        if (dim_ != 1 && dim_ != 2) throw ConfigError("mesh: dim must be 1 or 2");
        if (tags_.size() != vertices_.size()) throw ConfigError("mesh: one tag per vertex required");
        if (cells_.empty()) throw ConfigError("mesh: no cells");
        const int nv = static_cast<int>(vertices_.size());
        for (std::size_t c = 0; c < cells_.size(); ++c) {
            for (int i = 0; i < nodes_per_cell(); ++i) {
                if (cells_[c][i] < 0 || cells_[c][i] >= nv) {
                    throw ConfigError("mesh: cell " + std::to_string(c) + " references invalid vertex");
                }
            }
            if (!(cell_measure(c) > 0.0)) {
                throw ConfigError("mesh: cell " + std::to_string(c) +
                                  (dim_ == 1 ? " is not increasing" : " is not positively oriented"));
            }
        }
        if (dim_ == 1) {
            for (std::size_t i = 1; i < vertices_.size(); ++i) {
                if (!(vertices_[i][0] > vertices_[i - 1][0])) throw ConfigError("mesh: 1D vertices must increase");
            }
        }
        for (const auto& f : neumann_facets_) {
            if (f[0] < 0 || f[0] >= nv || f[1] < 0 || f[1] >= nv) {
                throw ConfigError("mesh: Neumann facet references invalid vertex");
            }
        }
    }

    int dim_;
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<NodeTag> tags_;
    std::vector<std::array<int, 2>> neumann_facets_;
    double h_ = 0.0;
};

/// Uniform partition of [a, b] into n_cells intervals, both endpoints Dirichlet.
inline Mesh build_interval_mesh(double a, double b, int n_cells)
{
    if (!(a < b)) throw ConfigError("interval mesh: require a < b");
    if (n_cells < 2) throw ConfigError("interval mesh: n_cells must be at least 2");
    std::vector<Point> verts(static_cast<std::size_t>(n_cells) + 1);
    const double step = (b - a) / n_cells;
    for (int i = 0; i <= n_cells; ++i) verts[i] = {i == n_cells ? b : a + i * step, 0.0};
    std::vector<std::array<int, 3>> cells(static_cast<std::size_t>(n_cells));
    for (int i = 0; i < n_cells; ++i) cells[i] = {i, i + 1, 0};
    std::vector<NodeTag> tags(verts.size(), NodeTag::Free);
    tags.front() = NodeTag::Dirichlet;
    tags.back() = NodeTag::Dirichlet;
    return Mesh(1, std::move(verts), std::move(cells), std::move(tags));
}

/// Structured triangulation of [0,lx] x [0,ly]: each grid quad is split by one
/// diagonal whose direction alternates in a checkerboard pattern.
inline Mesh build_rect_tri_mesh(double lx, double ly, int nx, int ny, const BoundarySegment& neumann,
                                OuterBoundary outer = OuterBoundary::HomogeneousNeumann)
{
    if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("rectangle mesh: side lengths must be positive");
    if (nx < 2 || ny < 2) throw ConfigError("rectangle mesh: nx and ny must be at least 2");
    const int stride = nx + 1;
    auto id = [stride](int i, int j) { return j * stride + i; };
    std::vector<Point> verts(static_cast<std::size_t>(stride) * (ny + 1));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            verts[id(i, j)] = {i == nx ? lx : lx * i / nx, j == ny ? ly : ly * j / ny};
        }
    }
    std::vector<std::array<int, 3>> cells;
    cells.reserve(static_cast<std::size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
            if ((i + j) % 2 == 0) {
                cells.push_back({p00, p10, p11});
                cells.push_back({p00, p11, p01});
            } else {
                cells.push_back({p00, p10, p01});
                cells.push_back({p10, p11, p01});
            }
        }
    }

    const double tol = 1e-12 * std::max(lx, ly);
    auto on_side = [&](const Point& p, Side s) {
        switch (s) {
            case Side::Left: return std::abs(p[0]) <= tol;
            case Side::Right: return std::abs(p[0] - lx) <= tol;
            case Side::Bottom: return std::abs(p[1]) <= tol;
            case Side::Top: return std::abs(p[1] - ly) <= tol;
        }
        return false;
    };
    auto along = [&](const Point& p, Side s) {
        return (s == Side::Left || s == Side::Right) ? p[1] : p[0];
    };
    auto on_segment = [&](const Point& p) {
        if (!on_side(p, neumann.side)) return false;
        const double s = along(p, neumann.side);
        return s >= neumann.lo - tol && s <= neumann.hi + tol;
    };

    std::vector<NodeTag> tags(verts.size(), NodeTag::Free);
    for (std::size_t v = 0; v < verts.size(); ++v) {
        const Point& p = verts[v];
        const bool boundary = on_side(p, Side::Left) || on_side(p, Side::Right) || on_side(p, Side::Bottom) ||
                              on_side(p, Side::Top);
        if (on_segment(p)) tags[v] = NodeTag::NeumannSegment;
        else if (boundary && outer == OuterBoundary::Dirichlet) tags[v] = NodeTag::Dirichlet;
    }

    std::vector<std::array<int, 2>> facets;
    const int n_side = (neumann.side == Side::Left || neumann.side == Side::Right) ? ny : nx;
    for (int s = 0; s < n_side; ++s) {
        int a = 0, b = 0;
        switch (neumann.side) {
            case Side::Left: a = id(0, s), b = id(0, s + 1); break;
            case Side::Right: a = id(nx, s), b = id(nx, s + 1); break;
            case Side::Bottom: a = id(s, 0), b = id(s + 1, 0); break;
            case Side::Top: a = id(s, ny), b = id(s + 1, ny); break;
        }
        if (on_segment(verts[a]) && on_segment(verts[b])) facets.push_back({a, b});
    }
    return Mesh(2, std::move(verts), std::move(cells), std::move(tags), std::move(facets));
}

}  // namespace westervelt
