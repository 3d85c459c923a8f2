#pragma once

// Radial Dirichlet problem on the ball B_R with inward drift of constant
// magnitude K and source scale eps. Existence of a positive bounded profile
// is equivalent to int_0^inf ds/(K h(s) + eps) > R; the profile itself
// solves -u'(r) = K h(u(r)) + eps with u(R) = 0.

#include <cmath>
#include <ostream>
#include <vector>

#include "supconv/errors.hpp"
#include "supconv/io.hpp"
#include "supconv/nonlinearity.hpp"

namespace supconv {

struct RadialProblem {
    double K;
    double eps;
    double R;
    int N;  // space dimension, N > 2
    NonlinearitySpec spec;

    RadialProblem(double K_, double eps_, double R_, int N_, NonlinearitySpec spec_)
        : K(K_), eps(eps_), R(R_), N(N_), spec(std::move(spec_)) {
        if (!(K > 0.0) || !(eps > 0.0) || !(R > 0.0)) {
            throw std::invalid_argument("RadialProblem: K, eps, R must be positive");
        }
        if (N <= 2) throw std::invalid_argument("RadialProblem: dimension N > 2 required");
    }
};

enum class Existence { Exists, NotExists, Boundary };

inline const char* to_string(Existence e) {
    switch (e) {
        case Existence::Exists: return "Exists";
        case Existence::NotExists: return "NotExists";
        case Existence::Boundary: return "Boundary";
    }
    return "?";
}

/// The blow-up criterion: Exists iff the blow-up integral exceeds R by more
/// than tol, NotExists iff it falls short by more than tol.
inline Existence existence_verdict(const RadialProblem& p, double tol) {
    if (!(tol > 0.0)) throw std::domain_error("existence_verdict: tol must be positive");
    const ImproperValue I = blowup_integral(p.spec, p.K, p.eps, std::min(tol * 0.1, 1e-10));
    if (I.is_infinite()) return Existence::Exists;
    if (I.value() > p.R + tol) return Existence::Exists;
    if (I.value() < p.R - tol) return Existence::NotExists;
    return Existence::Boundary;
}

struct RadialSolution {
    double a = 0.0;               // central value u(0) from the bisection
    std::vector<double> r;        // 0 = r_0 < ... < r_M = R
    std::vector<double> u;        // profile values, u.back() == 0
};

namespace detail {

// F(a) = int_0^a ds/(K h(s)+eps) - R, strictly increasing in a.
inline double shooting_mismatch(const RadialProblem& p, double a, double quad_tol) {
    if (a == 0.0) return -p.R;
    auto integrand = [&p](double s) { return 1.0 / (p.K * p.spec(s) + p.eps); };
    return integrate_adaptive(integrand, 0.0, a, quad_tol).value - p.R;
}

} // namespace detail

/// Builds the profile: monotone bisection for the central value a with
/// |F(a)| <= tol, then fixed-step RK4 on -u' = K h(u) + eps integrated from
/// the boundary value u(R) = 0 toward r = 0 on `steps` uniform steps.
inline RadialSolution solve_radial(const RadialProblem& p, int steps, double tol) {
    if (steps < 1) throw std::invalid_argument("solve_radial: steps must be >= 1");
    if (!(tol > 0.0)) throw std::domain_error("solve_radial: tol must be positive");

    const double quad_tol = std::min(tol * 0.125, 1e-12);
    double lo = 0.0, hi = 1.0;
    double f_hi = detail::shooting_mismatch(p, hi, quad_tol);
    while (f_hi < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            throw RootBracketFailure(
                "no central value below 1e12 satisfies the shooting identity; "
                "the existence verdict is inconsistent with the data");
        }
        f_hi = detail::shooting_mismatch(p, hi, quad_tol);
    }
    double a = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fm = detail::shooting_mismatch(p, a, quad_tol);
        if (std::abs(fm) <= tol) break;
        (fm < 0.0 ? lo : hi) = a;
        a = 0.5 * (lo + hi);
    }

    RadialSolution sol;
    sol.a = a;
    sol.r.resize(steps + 1);
    sol.u.resize(steps + 1);
    const double dtau = p.R / steps;  // tau = R - r
    auto slope = [&p](double u) { return p.K * p.spec(u) + p.eps; };
    double u = 0.0;
    sol.r[steps] = p.R;
    sol.u[steps] = 0.0;
    for (int j = 1; j <= steps; ++j) {
        const double k1 = slope(u);
        const double k2 = slope(u + 0.5 * dtau * k1);
        const double k3 = slope(u + 0.5 * dtau * k2);
        const double k4 = slope(u + dtau * k3);
        u += dtau * (k1 + 2.0 * (k2 + k3) + k4) / 6.0;
        if (!std::isfinite(u)) {
            throw std::domain_error("solve_radial: profile blew up inside (0, R); "
                                    "the problem is outside the existence regime");
        }
        sol.r[steps - j] = p.R - j * dtau;
        sol.u[steps - j] = u;
    }
    return sol;
}

/// Closed form for h(s) = s^2 (reaction case -u' = K u^2 + eps):
/// u(r) = sqrt(eps/K) tan(sqrt(K eps)(R - r)), valid for sqrt(K eps) R < pi/2.
inline double analytic_tan(double K, double eps, double R, double r) {
    if (!(K > 0.0) || !(eps > 0.0)) throw std::domain_error("analytic_tan: K, eps > 0");
    const double omega = std::sqrt(K * eps);
    if (!(omega * R < M_PI / 2.0)) {
        throw std::domain_error("analytic_tan: sqrt(K eps) R >= pi/2, no bounded profile");
    }
    if (r < 0.0 || r > R) throw std::domain_error("analytic_tan: r outside [0, R]");
    return std::sqrt(eps / K) * std::tan(omega * (R - r));
}

/// Closed form for the absorption case -u' = -K u^2 + eps:
/// u(r) = sqrt(eps/K) tanh(sqrt(K eps)(R - r)), defined for all K, eps, R.
inline double analytic_tanh(double K, double eps, double R, double r) {
    if (!(K > 0.0) || !(eps > 0.0)) throw std::domain_error("analytic_tanh: K, eps > 0");
    if (r < 0.0 || r > R) throw std::domain_error("analytic_tanh: r outside [0, R]");
    return std::sqrt(eps / K) * std::tanh(std::sqrt(K * eps) * (R - r));
}

struct BlowupVerdict {
    bool blows_up = false;
    double r_star = 0.0;  // blow-up radius in [0, R), meaningful when blows_up
};

/// Integrating -u' = K h(u) + eps backwards from u(R) = 0, the profile
/// escapes to infinity at r* = R - int_0^inf ds/(Kh+eps) whenever that
/// integral is smaller than R.
inline BlowupVerdict blowup_time(const NonlinearitySpec& spec, double K, double eps, double R,
                                 double tol) {
    const ImproperValue I = blowup_integral(spec, K, eps, tol);
    BlowupVerdict v;
    if (I.is_infinite() || I.value() >= R) return v;
    v.blows_up = true;
    v.r_star = R - I.value();
    return v;
}

/// Debug mode: chase the ODE solution until it exceeds `cap` (default 1e12)
/// with slope-limited RK4 steps. Cross-checks blowup_time, nothing more.
inline BlowupVerdict chase_blowup(const NonlinearitySpec& spec, double K, double eps, double R,
                                  double cap = 1e12, double dtau_max = 1e-3) {
    auto slope = [&](double u) { return K * spec(u) + eps; };
    double u = 0.0;
    double tau = 0.0;
    BlowupVerdict v;
    while (tau < R) {
        const double g = slope(u);
        double dtau = std::min(dtau_max, 0.05 * (1.0 + u) / g);
        dtau = std::min(dtau, R - tau);
        const double k1 = g;
        const double k2 = slope(u + 0.5 * dtau * k1);
        const double k3 = slope(u + 0.5 * dtau * k2);
        const double k4 = slope(u + dtau * k3);
        u += dtau * (k1 + 2.0 * (k2 + k3) + k4) / 6.0;
        tau += dtau;
        if (!std::isfinite(u) || u > cap) {
            v.blows_up = true;
            v.r_star = R - tau;
            return v;
        }
    }
    return v;
}

/// CSV export: header "r,u", '.' decimal, one row per node.
inline void write_profile_csv(std::ostream& os, const RadialSolution& sol) {
    os << "r,u\n";
    for (std::size_t i = 0; i < sol.r.size(); ++i) {
        write_csv_row(os, {sol.r[i], sol.u[i]});
    }
}

} // namespace supconv
