#pragma once

// Numerical checks of the a-priori estimates on computed fields: the
// level-set decay |{|u|>k}|^{2/2*} <= C/H(k)^2 int(|E|^2+|f|), the L^1
// bound mu int|u| <= int|f|, the comparison principle, and the necessary
// condition for existence in the radial supercritical regime theta > 1/N.
// All checks produce report objects; none of them is a hard failure.

#include <cmath>
#include <optional>
#include <vector>

#include "supconv/mesh.hpp"
#include "supconv/nonlinearity.hpp"

namespace supconv {

struct DecayReport {
    std::vector<double> k;
    std::vector<double> measured;   // |{|u|>k}|^{2/2*}
    std::vector<double> bound;      // C/H(k)^2 * int(|E|^2 + |f|)
    double C_used = 0.0;
    double C1 = 0.0;                // sup |phi|, infinity when vacuous
    bool C1_infinite = false;
    double data_integral = 0.0;
    double worst_ratio = 0.0;
    double empirical_C = 0.0;       // tightest constant the data supports
    double sobolev_used = 0.0;
    double alpha_used = 0.0;
    bool pass = false;
};

/// Evaluates both sides of the decay estimate on a log-spaced k-grid with
/// the proof-derived constant C = (2 S^2/alpha) max(1/(2 alpha), C1),
/// C1 = sup |phi|. A bounded nonlinearity makes C1 (hence the bound)
/// infinite and the check vacuously true.
inline DecayReport check_decay(const ScalarField& u, const NonlinearitySpec& spec,
                               const VectorField& E, const ScalarField& f, int analysisN,
                               double alpha, std::optional<double> sobolev_override = {},
                               int k_points = 20) {
    if (analysisN < 3) throw std::domain_error("check_decay: analysis dimension >= 3");
    if (!(alpha > 0.0)) throw std::domain_error("check_decay: alpha > 0 required");
    DecayReport rep;
    rep.sobolev_used = sobolev_override ? *sobolev_override : sobolev_constant(analysisN);
    rep.alpha_used = alpha;

    const ImproperValue c1 = phi_sup(spec, 1e-10);
    rep.C1_infinite = c1.is_infinite();
    rep.C1 = rep.C1_infinite ? std::numeric_limits<double>::infinity() : c1.value();
    rep.C_used = 2.0 * rep.sobolev_used * rep.sobolev_used / alpha *
                 std::max(1.0 / (2.0 * alpha), rep.C1);

    const double e2 = lebesgue_norm(E, 2.0);
    rep.data_integral = e2 * e2 + lebesgue_norm(f, 1.0);

    const double two_star = 2.0 * analysisN / (analysisN - 2.0);
    const double umax = u.max_abs();
    const double kmax = umax > 0.0 ? 1.05 * umax : 1.0;
    const double kmin = kmax * 1e-3;
    rep.pass = true;
    for (int i = 0; i < k_points; ++i) {
        const double t = k_points == 1 ? 0.0 : static_cast<double>(i) / (k_points - 1);
        const double k = kmin * std::pow(kmax / kmin, t);
        const double meas = std::pow(levelset_measure(u, k), 2.0 / two_star);
        const double Hk = eval_H(spec, k, 1e-10);
        const double bnd = rep.C1_infinite ? std::numeric_limits<double>::infinity()
                                           : rep.C_used * rep.data_integral / (Hk * Hk);
        rep.k.push_back(k);
        rep.measured.push_back(meas);
        rep.bound.push_back(bnd);
        if (meas > bnd) rep.pass = false;
        if (bnd > 0.0 && std::isfinite(bnd)) {
            rep.worst_ratio = std::max(rep.worst_ratio, meas / bnd);
        }
        if (rep.data_integral > 0.0 && meas > 0.0) {
            rep.empirical_C = std::max(rep.empirical_C, meas * Hk * Hk / rep.data_integral);
        }
    }
    return rep;
}

/// CSV: one row per k with the measured decay and the proved bound.
inline void write_decay_csv(std::ostream& os, const DecayReport& rep) {
    os << "k,measured,bound\n";
    for (std::size_t i = 0; i < rep.k.size(); ++i) {
        write_csv_row(os, {rep.k[i], rep.measured[i], rep.bound[i]});
    }
}

/// ||u||_1 <= (1 + slack) ||f||_1 / mu. The default slack 10h covers the
/// first-order discretization of the convective term.
inline bool check_L1(const ScalarField& u, const ScalarField& f, double mu,
                     std::optional<double> slack = {}) {
    if (!(mu > 0.0)) throw std::domain_error("check_L1: mu > 0 required");
    u.check_same_grid(f);
    const double s = slack ? *slack : 10.0 * u.grid().spacing_max();
    return lebesgue_norm(u, 1.0) <= (1.0 + s) * lebesgue_norm(f, 1.0) / mu;
}

/// Entrywise u1 <= u2 + tol for fields produced from ordered data.
inline bool check_comparison(const ScalarField& u1, const ScalarField& u2, double tol) {
    u1.check_same_grid(u2);
    for (int k = 0; k < u1.size(); ++k) {
        if (u1[k] > u2[k] + tol) return false;
    }
    return true;
}

struct NonexistenceReport {
    bool holds = false;   // the necessary condition int f v <= bound
    double lhs = 0.0;     // int_{B_1} f (1 - |x|^2) dx
    double bound = 0.0;   // C theta/(N theta - 1) with the chain's constant
    double C_used = 0.0;
};

/// Necessary condition for existence in the zeroth-order problem at mu = 1
/// on the unit ball with E = -x/|x| and theta > 1/N. Testing with
/// v = 1 - |x|^2 and Young's inequality at eps = 1 gives
///   int f v <= (1+2N) theta (1+theta)^{-(1+theta)/theta} omega_{N-1}
///              int_0^1 r^{N-1-1/theta} dr.
/// `f_radial` is the radial profile of f on an interval grid over (0, 1).
inline NonexistenceReport check_nonexistence_necessary(const ScalarField& f_radial, double theta,
                                                       int N) {
    if (!(theta > 1.0 / N)) {
        throw std::domain_error("check_nonexistence_necessary: requires theta > 1/N");
    }
    const Grid& g = f_radial.grid();
    if (g.dim() != 1) throw std::invalid_argument("check_nonexistence_necessary: 1D radial grid");
    if (std::abs(g.ax()) > 1e-12 || std::abs(g.bx() - 1.0) > 1e-12) {
        throw std::invalid_argument(
            "check_nonexistence_necessary: radial grid must span (0, 1), the unit ball radius");
    }
    for (double v : f_radial.values()) {
        if (v < 0.0) throw std::invalid_argument("check_nonexistence_necessary: f >= 0 required");
    }
    const double nn = static_cast<double>(N);
    const double omega = 2.0 * std::pow(M_PI, 0.5 * nn) / std::tgamma(0.5 * nn);

    NonexistenceReport rep;
    const double h = g.hx();
    for (int i = 1; i < g.cells_x(); ++i) {
        const double r = g.x_node(i);
        rep.lhs += f_radial[g.interior_index(i)] * (1.0 - r * r) * std::pow(r, nn - 1.0) * h;
    }
    rep.lhs *= omega;

    const double young_c1 = theta * std::pow(1.0 + theta, -(1.0 + theta) / theta);
    rep.C_used = (1.0 + 2.0 * nn) * young_c1 * omega;
    rep.bound = rep.C_used * theta / (nn * theta - 1.0);
    rep.holds = rep.lhs <= rep.bound;
    return rep;
}

} // namespace supconv
