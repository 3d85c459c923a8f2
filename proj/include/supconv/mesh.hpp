#pragma once

// Uniform vertex-centered finite-difference substrate on intervals and
// rectangles. Scalar unknowns live on interior nodes, homogeneous Dirichlet
// values on boundary nodes are explicit zeros. Vector fields are staggered:
// one normal component per edge, which is exactly where the conservative
// convection fluxes are needed.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <json.hpp>

#include "supconv/errors.hpp"
#include "supconv/io.hpp"

namespace supconv {

class Grid {
public:
    enum class Kind { Interval, Rectangle };

    Grid() = default;  // unit interval, 4 cells

    static Grid interval(double a, double b, int cells) {
        if (!(b > a)) throw std::invalid_argument("Grid: interval needs b > a");
        if (cells < 4) throw std::invalid_argument("Grid: at least 4 cells per axis");
        Grid g;
        g.kind_ = Kind::Interval;
        g.ax_ = a;
        g.bx_ = b;
        g.nx_ = cells;
        return g;
    }

    static Grid rectangle(double ax, double bx, double ay, double by, int nx, int ny) {
        if (!(bx > ax) || !(by > ay)) throw std::invalid_argument("Grid: positive extents required");
        if (nx < 4 || ny < 4) throw std::invalid_argument("Grid: at least 4 cells per axis");
        Grid g;
        g.kind_ = Kind::Rectangle;
        g.ax_ = ax;
        g.bx_ = bx;
        g.ay_ = ay;
        g.by_ = by;
        g.nx_ = nx;
        g.ny_ = ny;
        return g;
    }

    Kind kind() const { return kind_; }
    int dim() const { return kind_ == Kind::Interval ? 1 : 2; }
    int cells_x() const { return nx_; }
    int cells_y() const { return ny_; }
    double ax() const { return ax_; }
    double bx() const { return bx_; }
    double ay() const { return ay_; }
    double by() const { return by_; }
    double hx() const { return (bx_ - ax_) / nx_; }
    double hy() const { return kind_ == Kind::Interval ? 0.0 : (by_ - ay_) / ny_; }
    double spacing_max() const { return kind_ == Kind::Interval ? hx() : std::max(hx(), hy()); }
    double cell_measure() const { return kind_ == Kind::Interval ? hx() : hx() * hy(); }

    double x_node(int i) const { return ax_ + i * hx(); }
    double y_node(int j) const { return ay_ + j * hy(); }

    int interior_count() const {
        return kind_ == Kind::Interval ? nx_ - 1 : (nx_ - 1) * (ny_ - 1);
    }
    // interior linear index of node (i[, j]); node indices run 0..nx (0..ny)
    int interior_index(int i) const { return i - 1; }
    int interior_index(int i, int j) const { return (j - 1) * (nx_ - 1) + (i - 1); }
    bool is_interior(int i) const { return i > 0 && i < nx_; }
    bool is_interior(int i, int j) const {
        return i > 0 && i < nx_ && j > 0 && j < ny_;
    }

    bool operator==(const Grid& o) const {
        return kind_ == o.kind_ && ax_ == o.ax_ && bx_ == o.bx_ && ay_ == o.ay_ &&
               by_ == o.by_ && nx_ == o.nx_ && ny_ == o.ny_;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    friend void to_json(nlohmann::json& j, const Grid& g) {
        if (g.kind_ == Kind::Interval) {
            j = nlohmann::json{{"kind", "interval"}, {"a", g.ax_}, {"b", g.bx_}, {"cells", g.nx_}};
        } else {
            j = nlohmann::json{{"kind", "rectangle"}, {"ax", g.ax_}, {"bx", g.bx_},
                               {"ay", g.ay_}, {"by", g.by_}, {"nx", g.nx_}, {"ny", g.ny_}};
        }
    }

    friend void from_json(const nlohmann::json& j, Grid& g) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "interval") {
            g = Grid::interval(j.at("a").get<double>(), j.at("b").get<double>(),
                               j.at("cells").get<int>());
        } else if (kind == "rectangle") {
            g = Grid::rectangle(j.at("ax").get<double>(), j.at("bx").get<double>(),
                                j.at("ay").get<double>(), j.at("by").get<double>(),
                                j.at("nx").get<int>(), j.at("ny").get<int>());
        } else {
            throw std::invalid_argument("unknown grid kind: " + kind);
        }
    }

private:
    Kind kind_ = Kind::Interval;
    double ax_ = 0.0, bx_ = 1.0, ay_ = 0.0, by_ = 1.0;
    int nx_ = 4, ny_ = 0;
};

/// One value per interior node; boundary nodes are implicit zeros.
class ScalarField {
public:
    explicit ScalarField(Grid grid)
        : grid_(std::move(grid)), v_(grid_.interior_count(), 0.0) {}

    static ScalarField from_function(const Grid& grid, const std::function<double(double)>& f) {
        if (grid.dim() != 1) throw std::invalid_argument("from_function: 1D sampler on a 2D grid");
        ScalarField out(grid);
        for (int i = 1; i < grid.cells_x(); ++i) out.v_[grid.interior_index(i)] = f(grid.x_node(i));
        return out;
    }

    static ScalarField from_function(const Grid& grid,
                                     const std::function<double(double, double)>& f) {
        if (grid.dim() != 2) throw std::invalid_argument("from_function: 2D sampler on a 1D grid");
        ScalarField out(grid);
        for (int j = 1; j < grid.cells_y(); ++j)
            for (int i = 1; i < grid.cells_x(); ++i)
                out.v_[grid.interior_index(i, j)] = f(grid.x_node(i), grid.y_node(j));
        return out;
    }

    const Grid& grid() const { return grid_; }
    int size() const { return static_cast<int>(v_.size()); }
    double operator[](int k) const { return v_[k]; }
    double& operator[](int k) { return v_[k]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    bool all_finite() const {
        return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
    }

    /// pointwise clamp at level k (T_k)
    ScalarField clamped(double k) const {
        ScalarField out = *this;
        for (double& x : out.v_) x = std::clamp(x, -k, k);
        return out;
    }

    ScalarField& operator+=(const ScalarField& o) {
        check_same_grid(o);
        for (int k = 0; k < size(); ++k) v_[k] += o.v_[k];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o) {
        check_same_grid(o);
        for (int k = 0; k < size(); ++k) v_[k] -= o.v_[k];
        return *this;
    }
    ScalarField& operator*=(double c) {
        for (double& x : v_) x *= c;
        return *this;
    }
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double c, ScalarField a) { return a *= c; }

    void check_same_grid(const ScalarField& o) const {
        if (grid_ != o.grid_) throw std::invalid_argument("field grids differ");
    }

private:
    Grid grid_;
    std::vector<double> v_;
};

enum class FluxMode { Upwind, Centered };

/// Staggered vector field: the normal component on each edge midpoint.
class VectorField {
public:
    explicit VectorField(Grid grid) : grid_(std::move(grid)) {
        if (grid_.dim() == 1) {
            ex_.assign(grid_.cells_x(), 0.0);
        } else {
            ex_.assign(grid_.cells_x() * (grid_.cells_y() + 1), 0.0);
            ey_.assign((grid_.cells_x() + 1) * grid_.cells_y(), 0.0);
        }
    }

    static VectorField constant(const Grid& grid, double ex, double ey = 0.0) {
        VectorField out(grid);
        std::fill(out.ex_.begin(), out.ex_.end(), ex);
        std::fill(out.ey_.begin(), out.ey_.end(), ey);
        return out;
    }

    static VectorField from_function(const Grid& grid,
                                     const std::function<double(double)>& fx) {
        if (grid.dim() != 1) throw std::invalid_argument("from_function: 1D sampler on a 2D grid");
        VectorField out(grid);
        for (int i = 0; i < grid.cells_x(); ++i) {
            out.ex_[i] = fx(grid.ax() + (i + 0.5) * grid.hx());
        }
        return out;
    }

    static VectorField from_function(const Grid& grid,
                                     const std::function<double(double, double)>& fx,
                                     const std::function<double(double, double)>& fy) {
        if (grid.dim() != 2) throw std::invalid_argument("from_function: 2D sampler on a 1D grid");
        VectorField out(grid);
        for (int j = 0; j <= grid.cells_y(); ++j)
            for (int i = 0; i < grid.cells_x(); ++i)
                out.x_edge(i, j) = fx(grid.ax() + (i + 0.5) * grid.hx(), grid.y_node(j));
        for (int j = 0; j < grid.cells_y(); ++j)
            for (int i = 0; i <= grid.cells_x(); ++i)
                out.y_edge(i, j) = fy(grid.x_node(i), grid.ay() + (j + 0.5) * grid.hy());
        return out;
    }

    const Grid& grid() const { return grid_; }

    // 1D edge i sits between nodes i and i+1
    double x_edge(int i) const { return ex_[i]; }
    double& x_edge(int i) { return ex_[i]; }
    // 2D x-edge (i, j): between nodes (i, j) and (i+1, j)
    double x_edge(int i, int j) const { return ex_[j * grid_.cells_x() + i]; }
    double& x_edge(int i, int j) { return ex_[j * grid_.cells_x() + i]; }
    // 2D y-edge (i, j): between nodes (i, j) and (i, j+1)
    double y_edge(int i, int j) const { return ey_[j * (grid_.cells_x() + 1) + i]; }
    double& y_edge(int i, int j) { return ey_[j * (grid_.cells_x() + 1) + i]; }

    double max_abs() const {
        double m = 0.0;
        for (double x : ex_) m = std::max(m, std::abs(x));
        for (double x : ey_) m = std::max(m, std::abs(x));
        return m;
    }

    /// componentwise truncation T_n, the approximation scheme's E_n
    VectorField clamped(double n) const {
        VectorField out = *this;
        for (double& x : out.ex_) x = std::clamp(x, -n, n);
        for (double& x : out.ey_) x = std::clamp(x, -n, n);
        return out;
    }

    /// |E| interpolated to interior nodes (components averaged from the two
    /// adjacent edges); this is the sampling used by all norms of E.
    ScalarField magnitude_at_nodes() const {
        ScalarField out(grid_);
        if (grid_.dim() == 1) {
            for (int i = 1; i < grid_.cells_x(); ++i) {
                out[grid_.interior_index(i)] = std::abs(0.5 * (ex_[i - 1] + ex_[i]));
            }
        } else {
            for (int j = 1; j < grid_.cells_y(); ++j) {
                for (int i = 1; i < grid_.cells_x(); ++i) {
                    const double mx = 0.5 * (x_edge(i - 1, j) + x_edge(i, j));
                    const double my = 0.5 * (y_edge(i, j - 1) + y_edge(i, j));
                    out[grid_.interior_index(i, j)] = std::hypot(mx, my);
                }
            }
        }
        return out;
    }

private:
    Grid grid_;
    std::vector<double> ex_;
    std::vector<double> ey_;
};

/// Symmetric coefficient matrix per cell with uniform ellipticity bounds
/// alpha, beta verified at construction through the per-cell eigenvalues.
class MatrixField {
public:
    static MatrixField identity(const Grid& grid, double scale = 1.0) {
        if (grid.dim() == 1) {
            return from_function(grid, [scale](double) { return scale; });
        }
        return from_function(
            grid, [scale](double, double) { return std::array<double, 3>{scale, 0.0, scale}; });
    }

    // 1D: one diffusivity per cell
    static MatrixField from_function(const Grid& grid, const std::function<double(double)>& m) {
        MatrixField out;
        out.grid_ = grid;
        out.mxx_.resize(grid.cells_x());
        for (int i = 0; i < grid.cells_x(); ++i) {
            out.mxx_[i] = m(grid.ax() + (i + 0.5) * grid.hx());
        }
        out.compute_bounds();
        return out;
    }

    // 2D: {mxx, mxy, myy} per cell, sampled at cell centers
    static MatrixField from_function(
        const Grid& grid, const std::function<std::array<double, 3>(double, double)>& m) {
        MatrixField out;
        out.grid_ = grid;
        const int n = grid.cells_x() * grid.cells_y();
        out.mxx_.resize(n);
        out.mxy_.resize(n);
        out.myy_.resize(n);
        for (int j = 0; j < grid.cells_y(); ++j) {
            for (int i = 0; i < grid.cells_x(); ++i) {
                const auto mc = m(grid.ax() + (i + 0.5) * grid.hx(),
                                  grid.ay() + (j + 0.5) * grid.hy());
                const int c = j * grid.cells_x() + i;
                out.mxx_[c] = mc[0];
                out.mxy_[c] = mc[1];
                out.myy_[c] = mc[2];
            }
        }
        out.compute_bounds();
        return out;
    }

    const Grid& grid() const { return grid_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

    double mxx(int cell) const { return mxx_[cell]; }
    double mxy(int cell) const { return mxy_[cell]; }
    double myy(int cell) const { return myy_[cell]; }
    int cell_index(int i, int j) const { return j * grid_.cells_x() + i; }

private:
    MatrixField() = default;

    void compute_bounds() {
        alpha_ = std::numeric_limits<double>::infinity();
        beta_ = 0.0;
        if (grid_.dim() == 1) {
            for (double m : mxx_) {
                alpha_ = std::min(alpha_, m);
                beta_ = std::max(beta_, m);
            }
        } else {
            for (std::size_t c = 0; c < mxx_.size(); ++c) {
                const double tr = mxx_[c] + myy_[c];
                const double disc = std::hypot(mxx_[c] - myy_[c], 2.0 * mxy_[c]);
                alpha_ = std::min(alpha_, 0.5 * (tr - disc));
                beta_ = std::max(beta_, 0.5 * (tr + disc));
            }
        }
        if (!(alpha_ > 0.0) || !std::isfinite(beta_)) {
            throw std::invalid_argument("MatrixField: uniform ellipticity violated");
        }
    }

    Grid grid_ = Grid::interval(0.0, 1.0, 4);
    std::vector<double> mxx_, mxy_, myy_;
    double alpha_ = 0.0, beta_ = 0.0;
};

namespace detail {

inline double harmonic_mean(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

} // namespace detail

/// Pointwise operator for -div(M grad u) + mu u on interior nodes:
/// 3-point (1D) / 5-point (2D) stencil. Edge diffusivities are the harmonic
/// mean of the diagonal entries of M in the two cells sharing the edge
/// (the cell value itself in 1D); off-diagonal entries of M do not enter
/// the stencil. Dirichlet rows are eliminated.
inline Eigen::SparseMatrix<double> assemble_diffusion(const MatrixField& M, double mu) {
    if (mu < 0.0) throw std::invalid_argument("assemble_diffusion: mu must be nonnegative");
    const Grid& g = M.grid();
    const int n = g.interior_count();
    std::vector<Eigen::Triplet<double>> trips;
    if (g.dim() == 1) {
        const double ih2 = 1.0 / (g.hx() * g.hx());
        trips.reserve(3 * n);
        for (int i = 1; i < g.cells_x(); ++i) {
            const int row = g.interior_index(i);
            const double ml = M.mxx(i - 1);
            const double mr = M.mxx(i);
            trips.emplace_back(row, row, (ml + mr) * ih2 + mu);
            if (g.is_interior(i - 1)) trips.emplace_back(row, g.interior_index(i - 1), -ml * ih2);
            if (g.is_interior(i + 1)) trips.emplace_back(row, g.interior_index(i + 1), -mr * ih2);
        }
    } else {
        const double ihx2 = 1.0 / (g.hx() * g.hx());
        const double ihy2 = 1.0 / (g.hy() * g.hy());
        trips.reserve(5 * n);
        // x-edge (i,j) between nodes (i,j),(i+1,j): cells (i,j-1) and (i,j)
        auto cx = [&](int i, int j) {
            return detail::harmonic_mean(M.mxx(M.cell_index(i, j - 1)), M.mxx(M.cell_index(i, j)));
        };
        // y-edge (i,j) between nodes (i,j),(i,j+1): cells (i-1,j) and (i,j)
        auto cy = [&](int i, int j) {
            return detail::harmonic_mean(M.myy(M.cell_index(i - 1, j)), M.myy(M.cell_index(i, j)));
        };
        for (int j = 1; j < g.cells_y(); ++j) {
            for (int i = 1; i < g.cells_x(); ++i) {
                const int row = g.interior_index(i, j);
                const double cw = cx(i - 1, j);
                const double ce = cx(i, j);
                const double cs = cy(i, j - 1);
                const double cn = cy(i, j);
                trips.emplace_back(row, row, (cw + ce) * ihx2 + (cs + cn) * ihy2 + mu);
                if (g.is_interior(i - 1, j))
                    trips.emplace_back(row, g.interior_index(i - 1, j), -cw * ihx2);
                if (g.is_interior(i + 1, j))
                    trips.emplace_back(row, g.interior_index(i + 1, j), -ce * ihx2);
                if (g.is_interior(i, j - 1))
                    trips.emplace_back(row, g.interior_index(i, j - 1), -cs * ihy2);
                if (g.is_interior(i, j + 1))
                    trips.emplace_back(row, g.interior_index(i, j + 1), -cn * ihy2);
            }
        }
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    for (int k = 0; k < n; ++k) {
        if (!(A.coeff(k, k) > 1e-300)) {
            throw SingularOperator("assemble_diffusion: diagonal entry underflow at row " +
                                   std::to_string(k));
        }
    }
    return A;
}

/// Conservative discretization of -div(g E) at interior nodes: the face
/// value of g is the upwind donor along the edge's normal component of E
/// (or the arithmetic mean in centered mode). Boundary nodes carry g = 0.
inline ScalarField assemble_convection_rhs(const VectorField& E, const ScalarField& gfield,
                                           FluxMode mode = FluxMode::Upwind) {
    const Grid& g = E.grid();
    if (g != gfield.grid()) throw std::invalid_argument("assemble_convection_rhs: grid mismatch");
    ScalarField out(g);
    if (g.dim() == 1) {
        auto gnode = [&](int i) {
            return g.is_interior(i) ? gfield[g.interior_index(i)] : 0.0;
        };
        auto flux = [&](int e) {  // edge e between nodes e, e+1
            const double vel = E.x_edge(e);
            if (mode == FluxMode::Centered) return vel * 0.5 * (gnode(e) + gnode(e + 1));
            return vel * (vel >= 0.0 ? gnode(e) : gnode(e + 1));
        };
        const double ih = 1.0 / g.hx();
        for (int i = 1; i < g.cells_x(); ++i) {
            out[g.interior_index(i)] = -(flux(i) - flux(i - 1)) * ih;
        }
    } else {
        auto gnode = [&](int i, int j) {
            return g.is_interior(i, j) ? gfield[g.interior_index(i, j)] : 0.0;
        };
        auto fx = [&](int e, int j) {  // x-edge between nodes (e,j),(e+1,j)
            const double vel = E.x_edge(e, j);
            if (mode == FluxMode::Centered) return vel * 0.5 * (gnode(e, j) + gnode(e + 1, j));
            return vel * (vel >= 0.0 ? gnode(e, j) : gnode(e + 1, j));
        };
        auto fy = [&](int i, int e) {  // y-edge between nodes (i,e),(i,e+1)
            const double vel = E.y_edge(i, e);
            if (mode == FluxMode::Centered) return vel * 0.5 * (gnode(i, e) + gnode(i, e + 1));
            return vel * (vel >= 0.0 ? gnode(i, e) : gnode(i, e + 1));
        };
        const double ihx = 1.0 / g.hx();
        const double ihy = 1.0 / g.hy();
        for (int j = 1; j < g.cells_y(); ++j) {
            for (int i = 1; i < g.cells_x(); ++i) {
                out[g.interior_index(i, j)] =
                    -(fx(i, j) - fx(i - 1, j)) * ihx - (fy(i, j) - fy(i, j - 1)) * ihy;
            }
        }
    }
    return out;
}

/// (sum |u_i|^p h^d)^{1/p}; p = infinity gives max |u_i|.
inline double lebesgue_norm(const ScalarField& u, double p) {
    if (std::isinf(p)) return u.max_abs();
    if (!(p >= 1.0)) throw std::domain_error("lebesgue_norm: p >= 1 required");
    const double meas = u.grid().cell_measure();
    double acc = 0.0;
    for (double x : u.values()) acc += std::pow(std::abs(x), p);
    return std::pow(acc * meas, 1.0 / p);
}

inline double lebesgue_norm(const VectorField& E, double p) {
    return lebesgue_norm(E.magnitude_at_nodes(), p);
}

/// Orlicz-type gauge (sum |E_i|^N log^N(e + |E_i|) h^d)^{1/N} used to test
/// membership in the L^N log^N data class.
inline double orlicz_nlogn_norm(const VectorField& E, int N) {
    if (N < 3) throw std::domain_error("orlicz_nlogn_norm: N >= 3 required");
    const ScalarField mag = E.magnitude_at_nodes();
    const double meas = mag.grid().cell_measure();
    double acc = 0.0;
    for (double m : mag.values()) {
        acc += std::pow(m, N) * std::pow(std::log(M_E + m), N);
    }
    return std::pow(acc * meas, 1.0 / N);
}

/// h^d * #{ |u_i| > k }; right-continuous and nonincreasing in k.
inline double levelset_measure(const ScalarField& u, double k) {
    if (k < 0.0) throw std::domain_error("levelset_measure: k >= 0 required");
    const double meas = u.grid().cell_measure();
    long count = 0;
    for (double x : u.values()) {
        if (std::abs(x) > k) ++count;
    }
    return meas * static_cast<double>(count);
}

/// T_k(u) and G_k(u) = u - T_k(u); the identity T_k + G_k = u is exact.
inline std::pair<ScalarField, ScalarField> truncate(const ScalarField& u, double k) {
    if (!(k > 0.0)) throw std::domain_error("truncate: k must be positive");
    ScalarField tk = u.clamped(k);
    ScalarField gk = u;
    gk -= tk;
    return {std::move(tk), std::move(gk)};
}

/// Talenti's best constant for ||u||_{2*} <= S ||grad u||_2 in R^N:
/// S(N) = (pi N (N-2))^{-1/2} (Gamma(N)/Gamma(N/2))^{1/N}.
inline double sobolev_constant(int N) {
    if (N < 3) throw std::domain_error("sobolev_constant: N >= 3 required");
    const double nn = static_cast<double>(N);
    return std::pow(std::tgamma(nn) / std::tgamma(0.5 * nn), 1.0 / nn) /
           std::sqrt(M_PI * nn * (nn - 2.0));
}

// discrete l2 inner helpers used by the solvers
inline double dot_l2(const ScalarField& a, const ScalarField& b) {
    a.check_same_grid(b);
    double acc = 0.0;
    for (int k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc * a.grid().cell_measure();
}

inline double norm_l2(const ScalarField& a) { return std::sqrt(dot_l2(a, a)); }

/// CSV export: "x,value" (1D) or "x,y,value" (2D), node coordinates of
/// interior nodes.
inline void write_field_csv(std::ostream& os, const ScalarField& u) {
    const Grid& g = u.grid();
    if (g.dim() == 1) {
        os << "x,value\n";
        for (int i = 1; i < g.cells_x(); ++i) {
            write_csv_row(os, {g.x_node(i), u[g.interior_index(i)]});
        }
    } else {
        os << "x,y,value\n";
        for (int j = 1; j < g.cells_y(); ++j)
            for (int i = 1; i < g.cells_x(); ++i)
                write_csv_row(os, {g.x_node(i), g.y_node(j), u[g.interior_index(i, j)]});
    }
}

/// Reads a field written by write_field_csv back onto `grid`; coordinates
/// must match the grid nodes to 1e-9 relative.
inline ScalarField read_field_csv(const Grid& grid, std::istream& is) {
    ScalarField out(grid);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("field csv: missing header");
    const double scale = grid.spacing_max();
    int row = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> cols;
        while (std::getline(ls, tok, ',')) cols.push_back(std::stod(tok));
        if (static_cast<int>(cols.size()) != grid.dim() + 1) {
            throw std::invalid_argument("field csv: wrong column count");
        }
        int i, j = 0;
        if (grid.dim() == 1) {
            i = static_cast<int>(std::lround((cols[0] - grid.ax()) / grid.hx()));
            if (!grid.is_interior(i) || std::abs(grid.x_node(i) - cols[0]) > 1e-9 * scale) {
                throw std::invalid_argument("field csv: node off-grid");
            }
            out[grid.interior_index(i)] = cols[1];
        } else {
            i = static_cast<int>(std::lround((cols[0] - grid.ax()) / grid.hx()));
            j = static_cast<int>(std::lround((cols[1] - grid.ay()) / grid.hy()));
            if (!grid.is_interior(i, j) || std::abs(grid.x_node(i) - cols[0]) > 1e-9 * scale ||
                std::abs(grid.y_node(j) - cols[1]) > 1e-9 * scale) {
                throw std::invalid_argument("field csv: node off-grid");
            }
            out[grid.interior_index(i, j)] = cols[2];
        }
        ++row;
    }
    if (row != grid.interior_count()) throw std::invalid_argument("field csv: row count mismatch");
    return out;
}

/// Staggered-component CSV: "x,ex" per edge midpoint in 1D, or
/// "component,x,y,value" with component in {x, y} in 2D.
inline void write_vector_field_csv(std::ostream& os, const VectorField& E) {
    const Grid& g = E.grid();
    if (g.dim() == 1) {
        os << "x,ex\n";
        for (int i = 0; i < g.cells_x(); ++i) {
            write_csv_row(os, {g.ax() + (i + 0.5) * g.hx(), E.x_edge(i)});
        }
        return;
    }
    os << "component,x,y,value\n";
    for (int j = 0; j <= g.cells_y(); ++j)
        for (int i = 0; i < g.cells_x(); ++i) {
            os << "x,";
            write_csv_row(os, {g.ax() + (i + 0.5) * g.hx(), g.y_node(j), E.x_edge(i, j)});
        }
    for (int j = 0; j < g.cells_y(); ++j)
        for (int i = 0; i <= g.cells_x(); ++i) {
            os << "y,";
            write_csv_row(os, {g.x_node(i), g.ay() + (j + 0.5) * g.hy(), E.y_edge(i, j)});
        }
}

inline VectorField read_vector_field_csv(const Grid& grid, std::istream& is) {
    VectorField out(grid);
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("vector csv: missing header");
    const double scale = grid.spacing_max();
    auto check = [&](double got, double want) {
        if (std::abs(got - want) > 1e-9 * scale) {
            throw std::invalid_argument("vector csv: edge midpoint off-grid");
        }
    };
    long rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ls, tok, ',')) cols.push_back(tok);
        if (grid.dim() == 1) {
            if (cols.size() != 2) throw std::invalid_argument("vector csv: wrong column count");
            const double x = std::stod(cols[0]);
            const int i = static_cast<int>(std::lround((x - grid.ax()) / grid.hx() - 0.5));
            if (i < 0 || i >= grid.cells_x()) throw std::invalid_argument("vector csv: edge out of range");
            check(x, grid.ax() + (i + 0.5) * grid.hx());
            out.x_edge(i) = std::stod(cols[1]);
        } else {
            if (cols.size() != 4) throw std::invalid_argument("vector csv: wrong column count");
            const double x = std::stod(cols[1]);
            const double y = std::stod(cols[2]);
            const double v = std::stod(cols[3]);
            if (cols[0] == "x") {
                const int i = static_cast<int>(std::lround((x - grid.ax()) / grid.hx() - 0.5));
                const int j = static_cast<int>(std::lround((y - grid.ay()) / grid.hy()));
                if (i < 0 || i >= grid.cells_x() || j < 0 || j > grid.cells_y()) {
                    throw std::invalid_argument("vector csv: x-edge out of range");
                }
                check(x, grid.ax() + (i + 0.5) * grid.hx());
                check(y, grid.y_node(j));
                out.x_edge(i, j) = v;
            } else if (cols[0] == "y") {
                const int i = static_cast<int>(std::lround((x - grid.ax()) / grid.hx()));
                const int j = static_cast<int>(std::lround((y - grid.ay()) / grid.hy() - 0.5));
                if (i < 0 || i > grid.cells_x() || j < 0 || j >= grid.cells_y()) {
                    throw std::invalid_argument("vector csv: y-edge out of range");
                }
                check(x, grid.x_node(i));
                check(y, grid.ay() + (j + 0.5) * grid.hy());
                out.y_edge(i, j) = v;
            } else {
                throw std::invalid_argument("vector csv: component must be x or y");
            }
        }
        ++rows;
    }
    const long want = grid.dim() == 1 ? grid.cells_x()
                                      : grid.cells_x() * (grid.cells_y() + 1) +
                                            (grid.cells_x() + 1) * grid.cells_y();
    if (rows != want) throw std::invalid_argument("vector csv: row count mismatch");
    return out;
}

/// Per-cell coefficient CSV at cell centers: "x,m" (1D) or
/// "x,y,mxx,mxy,myy" (2D).
inline void write_matrix_field_csv(std::ostream& os, const MatrixField& M) {
    const Grid& g = M.grid();
    if (g.dim() == 1) {
        os << "x,m\n";
        for (int i = 0; i < g.cells_x(); ++i) {
            write_csv_row(os, {g.ax() + (i + 0.5) * g.hx(), M.mxx(i)});
        }
        return;
    }
    os << "x,y,mxx,mxy,myy\n";
    for (int j = 0; j < g.cells_y(); ++j)
        for (int i = 0; i < g.cells_x(); ++i) {
            const int c = M.cell_index(i, j);
            write_csv_row(os, {g.ax() + (i + 0.5) * g.hx(), g.ay() + (j + 0.5) * g.hy(),
                               M.mxx(c), M.mxy(c), M.myy(c)});
        }
}

inline MatrixField read_matrix_field_csv(const Grid& grid, std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("matrix csv: missing header");
    const double scale = grid.spacing_max();
    const int ncell = grid.dim() == 1 ? grid.cells_x() : grid.cells_x() * grid.cells_y();
    std::vector<double> mxx(ncell), mxy(ncell, 0.0), myy(ncell, 0.0);
    std::vector<bool> seen(ncell, false);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::vector<double> cols;
        while (std::getline(ls, tok, ',')) cols.push_back(std::stod(tok));
        const std::size_t want_cols = grid.dim() == 1 ? 2 : 5;
        if (cols.size() != want_cols) throw std::invalid_argument("matrix csv: wrong column count");
        int c;
        if (grid.dim() == 1) {
            const int i = static_cast<int>(std::lround((cols[0] - grid.ax()) / grid.hx() - 0.5));
            if (i < 0 || i >= grid.cells_x()) throw std::invalid_argument("matrix csv: cell out of range");
            if (std::abs(cols[0] - (grid.ax() + (i + 0.5) * grid.hx())) > 1e-9 * scale) {
                throw std::invalid_argument("matrix csv: cell center off-grid");
            }
            c = i;
            mxx[c] = cols[1];
        } else {
            const int i = static_cast<int>(std::lround((cols[0] - grid.ax()) / grid.hx() - 0.5));
            const int j = static_cast<int>(std::lround((cols[1] - grid.ay()) / grid.hy() - 0.5));
            if (i < 0 || i >= grid.cells_x() || j < 0 || j >= grid.cells_y()) {
                throw std::invalid_argument("matrix csv: cell out of range");
            }
            c = j * grid.cells_x() + i;
            mxx[c] = cols[2];
            mxy[c] = cols[3];
            myy[c] = cols[4];
        }
        if (seen[c]) throw std::invalid_argument("matrix csv: duplicate cell");
        seen[c] = true;
    }
    for (bool s : seen) {
        if (!s) throw std::invalid_argument("matrix csv: missing cells");
    }
    if (grid.dim() == 1) {
        return MatrixField::from_function(grid, [&](double x) {
            const int i = std::clamp(static_cast<int>((x - grid.ax()) / grid.hx()), 0,
                                     grid.cells_x() - 1);
            return mxx[i];
        });
    }
    return MatrixField::from_function(grid, [&](double x, double y) {
        const int i = std::clamp(static_cast<int>((x - grid.ax()) / grid.hx()), 0,
                                 grid.cells_x() - 1);
        const int j = std::clamp(static_cast<int>((y - grid.ay()) / grid.hy()), 0,
                                 grid.cells_y() - 1);
        const int c = j * grid.cells_x() + i;
        return std::array<double, 3>{mxx[c], mxy[c], myy[c]};
    });
}

} // namespace supconv
