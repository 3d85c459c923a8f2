#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "supconv/radial.hpp"
#include "support/oracles.hpp"

using namespace supconv;
using Catch::Approx;

namespace {
constexpr double kTan1 = 1.5574077246549022;          // tan(1)
constexpr double kHalfTanPoint4 = 0.2113966093690809; // 0.5 tan(0.4)
constexpr double kTanh5 = 0.9999092042625951;
constexpr double kTwoTanh2 = 1.9280551601516338;
constexpr double kIntInvCubicPlus1 = 1.2091995761561452;  // int_0^inf ds/(s^3+1) = 2pi/(3 sqrt 3)
constexpr double kLogPowerCentral = 2.0724697035116839;   // K=eps=R=1, h = s log(e+s)
}

TEST_CASE("existence verdict against the blow-up criterion", "[radial]") {
    const auto sp1 = NonlinearitySpec::signed_power(1.0);
    CHECK(existence_verdict({1.0, 1.0, 1.0, 3, sp1}, 1e-9) == Existence::Exists);
    CHECK(existence_verdict({1.0, 1.0, 2.0, 3, sp1}, 1e-9) == Existence::NotExists);
    CHECK(existence_verdict({1.0, 1.0, M_PI / 2.0, 3, sp1}, 1e-6) == Existence::Boundary);
    CHECK(existence_verdict({5.0, 0.2, 30.0, 3, NonlinearitySpec::linear()}, 1e-9) ==
          Existence::Exists);
    CHECK_THROWS_AS(RadialProblem(1.0, 1.0, 1.0, 2, sp1), std::invalid_argument);
    CHECK_THROWS_AS(RadialProblem(-1.0, 1.0, 1.0, 3, sp1), std::invalid_argument);
}

TEST_CASE("radial profile for the quadratic family matches the tan closed form", "[radial]") {
    const RadialProblem p{1.0, 1.0, 1.0, 3, NonlinearitySpec::signed_power(1.0)};
    const auto sol = solve_radial(p, 2000, 1e-10);
    REQUIRE(sol.r.size() == 2001);
    CHECK(sol.u.back() == 0.0);
    CHECK(sol.r.front() == 0.0);
    CHECK(sol.r.back() == 1.0);
    double sup = 0.0;
    for (std::size_t i = 0; i < sol.r.size(); ++i) {
        sup = std::max(sup, std::abs(sol.u[i] - analytic_tan(1.0, 1.0, 1.0, sol.r[i])));
    }
    CHECK(sup < 1e-9);
    CHECK(sol.u.front() == Approx(kTan1).margin(1e-9));
    CHECK(sol.a == Approx(kTan1).margin(1e-9));
    // |u(0) - a| <= C (R/M)^4 + tol
    CHECK(std::abs(sol.u.front() - sol.a) < 1e-8);
}

TEST_CASE("radial profile is strictly decreasing", "[radial]") {
    const RadialProblem p{2.0, 0.5, 0.8, 4, NonlinearitySpec::log_power(1.0)};
    const auto sol = solve_radial(p, 500, 1e-9);
    for (std::size_t i = 0; i + 1 < sol.u.size(); ++i) {
        CHECK(sol.u[i] > sol.u[i + 1]);
    }
}

TEST_CASE("log-power central value against a fine Euler oracle", "[radial]") {
    const auto spec = NonlinearitySpec::log_power(1.0);
    const RadialProblem p{1.0, 1.0, 1.0, 3, spec};
    const auto sol = solve_radial(p, 10000, 1e-10);
    const double euler = oracle::euler_ode(
        [&spec](double u) { return spec(u) + 1.0; }, 0.0, 0.0, 1.0, 1000000);
    CHECK(std::abs(sol.u.front() - euler) < 1e-5);
    CHECK(sol.u.front() == Approx(kLogPowerCentral).margin(1e-8));
}

TEST_CASE("RK4 profile converges at fourth order", "[radial]") {
    const RadialProblem p{1.0, 1.0, 1.0, 3, NonlinearitySpec::signed_power(1.0)};
    std::vector<double> errs;
    for (int M : {100, 200, 400}) {
        const auto sol = solve_radial(p, M, 1e-13);
        double sup = 0.0;
        for (std::size_t i = 0; i < sol.r.size(); ++i) {
            sup = std::max(sup, std::abs(sol.u[i] - analytic_tan(1.0, 1.0, 1.0, sol.r[i])));
        }
        errs.push_back(sup);
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CHECK(order1 >= 3.8);
    CHECK(order2 >= 3.8);
}

TEST_CASE("supercritical data cannot be bracketed", "[radial]") {
    const RadialProblem p{1.0, 1.0, 2.0, 3, NonlinearitySpec::signed_power(1.0)};
    CHECK_THROWS_AS(solve_radial(p, 100, 1e-9), RootBracketFailure);
}

TEST_CASE("tan closed form", "[radial]") {
    CHECK(analytic_tan(1.0, 1.0, 1.0, 0.0) == Approx(kTan1).epsilon(1e-12));
    CHECK(analytic_tan(1.0, 1.0, 1.0, 1.0) == 0.0);
    CHECK(analytic_tan(4.0, 1.0, 0.3, 0.1) == Approx(kHalfTanPoint4).epsilon(1e-12));
    CHECK_THROWS_AS(analytic_tan(1.0, 1.0, 2.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(analytic_tan(1.0, 1.0, 1.0, 1.5), std::domain_error);
    // residual of the reaction ODE -u' = K u^2 + eps via central differences
    const double K = 4.0, eps = 1.0, R = 0.3, d = 1e-6;
    for (double r : {0.05, 0.15, 0.25}) {
        const double du =
            (analytic_tan(K, eps, R, r + d) - analytic_tan(K, eps, R, r - d)) / (2.0 * d);
        const double u = analytic_tan(K, eps, R, r);
        CHECK(-du == Approx(K * u * u + eps).margin(1e-5));
    }
}

TEST_CASE("tanh closed form", "[radial]") {
    CHECK(analytic_tanh(1.0, 1.0, 1.0, 1.0) == 0.0);
    CHECK(analytic_tanh(1.0, 1.0, 5.0, 0.0) == Approx(kTanh5).epsilon(1e-12));
    CHECK(analytic_tanh(1.0, 4.0, 1.0, 0.0) == Approx(kTwoTanh2).epsilon(1e-12));
    // exact absorption identity: -u' = eps sech^2 = -K u^2 + eps
    for (double r : {0.0, 0.4, 2.3}) {
        const double K = 0.7, eps = 1.3, R = 3.0;
        const double x = std::sqrt(K * eps) * (R - r);
        const double minus_du = eps / (std::cosh(x) * std::cosh(x));
        const double u = analytic_tanh(K, eps, R, r);
        CHECK(minus_du == Approx(-K * u * u + eps).margin(1e-12));
    }
    // no size restriction: defined for any K, eps, R
    CHECK_NOTHROW(analytic_tanh(10.0, 10.0, 100.0, 0.0));
}

TEST_CASE("blow-up radius from the integral identity", "[radial]") {
    const auto sp1 = NonlinearitySpec::signed_power(1.0);
    const auto b1 = blowup_time(sp1, 1.0, 1.0, 2.0, 1e-10);
    REQUIRE(b1.blows_up);
    CHECK(b1.r_star == Approx(2.0 - M_PI / 2.0).margin(1e-9));

    CHECK_FALSE(blowup_time(NonlinearitySpec::linear(), 1.0, 1.0, 10.0, 1e-9).blows_up);

    const auto sp2 = NonlinearitySpec::signed_power(2.0);  // h(s) = s^3 on s >= 0
    const auto b2 = blowup_time(sp2, 1.0, 1.0, 3.0, 1e-10);
    REQUIRE(b2.blows_up);
    CHECK(b2.r_star == Approx(3.0 - kIntInvCubicPlus1).margin(1e-9));

    SECTION("overflow chase agrees with the identity") {
        const auto chased = chase_blowup(sp1, 1.0, 1.0, 2.0);
        REQUIRE(chased.blows_up);
        CHECK(chased.r_star == Approx(b1.r_star).margin(5e-3));
        CHECK_FALSE(chase_blowup(sp1, 1.0, 1.0, 1.0).blows_up);
    }
}

TEST_CASE("verdict and blow-up are dual", "[radial]") {
    for (double theta : {0.5, 1.0, 2.0}) {
        for (double K : {0.5, 1.0, 2.0}) {
            for (double R : {0.3, 1.0, 2.5, 6.0}) {
                const auto spec = NonlinearitySpec::signed_power(theta);
                const RadialProblem p{K, 0.8, R, 3, spec};
                const auto verdict = existence_verdict(p, 1e-9);
                if (verdict == Existence::Boundary) continue;
                const auto blow = blowup_time(spec, K, 0.8, R, 1e-10);
                CHECK((verdict == Existence::NotExists) == blow.blows_up);
                if (blow.blows_up) CHECK(blow.r_star >= 0.0);
            }
        }
    }
}

TEST_CASE("power-family scaling law", "[radial]") {
    // u_{K,eps}(r) = (eps/K)^{1/(1+theta)} u_{1,1}((K eps^theta)^{1/(1+theta)} r)
    const double theta = 1.0, K = 1.0, eps = 4.0, R = 0.5;
    const auto spec = NonlinearitySpec::signed_power(theta);
    const double arg_scale = std::pow(K * std::pow(eps, theta), 1.0 / (1.0 + theta));
    const double val_scale = std::pow(eps / K, 1.0 / (1.0 + theta));
    const RadialProblem scaled{K, eps, R, 3, spec};
    const RadialProblem unit{1.0, 1.0, R * arg_scale, 3, spec};
    const int M = 4000;
    const auto s1 = solve_radial(scaled, M, 1e-11);
    const auto s2 = solve_radial(unit, M, 1e-11);
    for (std::size_t i = 0; i < s1.r.size(); i += 97) {
        CHECK(s1.u[i] == Approx(val_scale * s2.u[i]).margin(1e-7));
    }
}

TEST_CASE("profile CSV export", "[radial]") {
    const RadialProblem p{1.0, 1.0, 0.5, 3, NonlinearitySpec::signed_power(1.0)};
    const auto sol = solve_radial(p, 10, 1e-9);
    std::ostringstream os;
    write_profile_csv(os, sol);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "r,u");
    int rows = 0;
    std::string line;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 11);
}
