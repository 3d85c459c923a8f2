#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <json.hpp>

#include "supconv/nonlinearity.hpp"
#include "support/oracles.hpp"

using namespace supconv;
using Catch::Approx;

namespace {

// frozen with an independent high-precision script (tail bracketed by
// 1/log(e+X) <= int_X^inf <= 1/log(X) around a finite body integral)
constexpr double kBlowupLogPowerTheta2 = 1.6865422030647013;  // int ds/(s log^2(e+s)+1)
constexpr double kHLogPowerTheta1At1e6 = 3.4594493720350491;
constexpr double kPhiSupSignedPowerTheta2 = 0.8061330507707635;  // int ds/(s^3+1)^2

std::vector<NonlinearitySpec> sample_families() {
    return {NonlinearitySpec::linear(),
            NonlinearitySpec::log_power(0.5),
            NonlinearitySpec::log_power(1.0),
            NonlinearitySpec::signed_power(1.0),
            NonlinearitySpec::signed_power(2.3),
            NonlinearitySpec::abs_power(0.7),
            NonlinearitySpec::tabulated({{-2.0, -3.0}, {0.0, 0.0}, {1.0, 2.0}, {3.0, 9.0}})};
}

} // namespace

TEST_CASE("eval_h family formulas", "[nonlinearity]") {
    CHECK(eval_h(NonlinearitySpec::signed_power(1.0), 2.0) == 4.0);
    CHECK(eval_h(NonlinearitySpec::log_power(1.0), 0.0) == 0.0);
    CHECK(eval_h(NonlinearitySpec::linear(), -3.0) == -3.0);
    CHECK(eval_h(NonlinearitySpec::abs_power(1.0), -2.0) == 4.0);
    CHECK(eval_h(NonlinearitySpec::signed_power(2.0), -2.0) == Approx(-8.0));
    CHECK(eval_h(NonlinearitySpec::log_power(2.0), 5.0) ==
          Approx(5.0 * std::pow(std::log(M_E + 5.0), 2.0)));
    SECTION("h(0) = 0 for every family") {
        for (const auto& spec : sample_families()) CHECK(eval_h(spec, 0.0) == 0.0);
    }
    SECTION("oddness where the family is odd") {
        for (double s : {0.3, 1.7, 12.0}) {
            CHECK(eval_h(NonlinearitySpec::linear(), -s) == -eval_h(NonlinearitySpec::linear(), s));
            CHECK(eval_h(NonlinearitySpec::log_power(1.3), -s) ==
                  Approx(-eval_h(NonlinearitySpec::log_power(1.3), s)));
            CHECK(eval_h(NonlinearitySpec::signed_power(0.4), -s) ==
                  Approx(-eval_h(NonlinearitySpec::signed_power(0.4), s)));
            CHECK(eval_h(NonlinearitySpec::abs_power(0.4), -s) >= 0.0);
        }
    }
}

TEST_CASE("tabulated nonlinearities", "[nonlinearity]") {
    auto tab = NonlinearitySpec::tabulated({{-1.0, -2.0}, {0.0, 0.0}, {2.0, 1.0}});
    CHECK(eval_h(tab, 1.0) == Approx(0.5));           // interpolation
    CHECK(eval_h(tab, 4.0) == Approx(2.0));           // last-slope extrapolation
    CHECK(eval_h(tab, -3.0) == Approx(-6.0));         // first-slope extrapolation
    CHECK_THROWS_AS(NonlinearitySpec::tabulated({{0.0, 0.0}, {0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(NonlinearitySpec::tabulated({{-1.0, 0.5}, {1.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(NonlinearitySpec::tabulated({{0.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("truncation clamps and is idempotent", "[nonlinearity]") {
    CHECK(eval_h(truncate_h(NonlinearitySpec::linear(), 5.0), 10.0) == 5.0);
    CHECK(eval_h(truncate_h(NonlinearitySpec::signed_power(1.0), 100.0), 3.0) == 9.0);
    CHECK(eval_h(truncate_h(NonlinearitySpec::log_power(2.0), 1.0), -10.0) == -1.0);
    CHECK_THROWS_AS(truncate_h(NonlinearitySpec::linear(), 0.0), std::domain_error);

    std::mt19937 rng(11u);
    std::uniform_real_distribution<double> ss(-40.0, 40.0);
    for (const auto& spec : sample_families()) {
        const auto t5 = truncate_h(spec, 5.0);
        const auto t5then50 = truncate_h(t5, 50.0);
        for (int k = 0; k < 50; ++k) {
            const double s = ss(rng);
            CHECK(std::abs(eval_h(t5, s)) <= 5.0);
            if (std::abs(eval_h(spec, s)) <= 5.0) CHECK(eval_h(t5, s) == eval_h(spec, s));
            CHECK(eval_h(t5then50, s) == eval_h(t5, s));  // composition keeps the tighter level
        }
    }
}

TEST_CASE("H transform closed forms and oracle agreement", "[nonlinearity]") {
    SECTION("linear family: H(s) = log(1+s) for s >= 0") {
        const auto lin = NonlinearitySpec::linear();
        CHECK(eval_H(lin, M_E - 1.0, 1e-10) == Approx(1.0).margin(1e-10));
        for (double s : {0.1, 1.0, 7.5, 42.0, 100.0}) {
            CHECK(eval_H(lin, s, 1e-10) == Approx(std::log1p(s)).margin(1e-10));
        }
    }
    SECTION("empty integral") {
        for (const auto& spec : sample_families()) CHECK(eval_H(spec, 0.0, 1e-10) == 0.0);
    }
    SECTION("large-argument log-power value against fixed-panel Simpson") {
        const auto spec = NonlinearitySpec::log_power(1.0);
        auto integrand = [&spec](double t) { return 1.0 / (std::abs(spec(t)) + 1.0); };
        const double simpson = oracle::composite_simpson(integrand, 0.0, 1e6, 40000000);
        const double val = eval_H(spec, 1e6, 1e-8);
        CHECK(std::abs(val - simpson) < 1e-7);
        CHECK(val == Approx(kHLogPowerTheta1At1e6).margin(1e-7));
    }
    SECTION("invalid tolerance") {
        CHECK_THROWS_AS(eval_H(NonlinearitySpec::linear(), 1.0, 0.0), std::domain_error);
    }
}

TEST_CASE("H is strictly increasing and odd", "[nonlinearity]") {
    std::mt19937 rng(23u);
    std::uniform_real_distribution<double> ss(-30.0, 30.0);
    for (const auto& spec : sample_families()) {
        for (int k = 0; k < 20; ++k) {
            double s1 = ss(rng), s2 = ss(rng);
            if (s1 == s2) continue;
            if (s1 > s2) std::swap(s1, s2);
            CHECK(eval_H(spec, s1, 1e-11) < eval_H(spec, s2, 1e-11));
        }
    }
    for (const auto& spec : {NonlinearitySpec::linear(), NonlinearitySpec::log_power(1.0),
                             NonlinearitySpec::signed_power(1.5)}) {
        for (double s : {0.4, 3.0, 17.0}) {
            CHECK(eval_H(spec, -s, 1e-12) == Approx(-eval_H(spec, s, 1e-12)).margin(1e-11));
        }
    }
}

TEST_CASE("phi transform and its uniform bound", "[nonlinearity]") {
    CHECK(eval_phi(NonlinearitySpec::signed_power(1.0), 0.0, 1e-10) == 0.0);
    CHECK(eval_phi(NonlinearitySpec::linear(), 1.0, 1e-10) == Approx(0.5).margin(1e-10));

    SECTION("phi stays below its sup for power families") {
        const auto spec = NonlinearitySpec::signed_power(1.0);
        const auto cap = phi_sup(spec, 1e-10);
        REQUIRE_FALSE(cap.is_infinite());
        CHECK(cap.value() == Approx(M_PI / 4.0).margin(1e-9));  // int ds/(s^2+1)^2
        for (double s : {0.5, 2.0, 50.0, 1e4}) {
            CHECK(eval_phi(spec, s, 1e-10) <= cap.value() + 1e-9);
        }
    }
    SECTION("sup against frozen oracle value, theta = 2") {
        const auto cap = phi_sup(NonlinearitySpec::signed_power(2.0), 1e-10);
        REQUIRE_FALSE(cap.is_infinite());
        CHECK(cap.value() == Approx(kPhiSupSignedPowerTheta2).margin(1e-8));
    }
    SECTION("linear family has a finite phi sup too") {
        const auto cap = phi_sup(NonlinearitySpec::linear(), 1e-10);
        REQUIRE_FALSE(cap.is_infinite());
        CHECK(cap.value() == Approx(1.0).margin(1e-9));  // int ds/(1+s)^2
    }
    SECTION("bounded tabulated tail is vacuous") {
        const auto flat = NonlinearitySpec::tabulated({{0.0, 0.0}, {1.0, 1.0}, {2.0, 1.0}});
        CHECK(phi_sup(flat, 1e-8).is_infinite());
    }
}

TEST_CASE("randomized quadrature transforms track the Simpson oracle", "[nonlinearity]") {
    std::mt19937 rng(31u);
    std::uniform_real_distribution<double> thetas(0.3, 2.5);
    std::uniform_real_distribution<double> args(0.5, 50.0);
    const double tol = 1e-9;
    for (int trial = 0; trial < 10; ++trial) {
        NonlinearitySpec spec = (trial % 3 == 0)   ? NonlinearitySpec::log_power(thetas(rng))
                                : (trial % 3 == 1) ? NonlinearitySpec::signed_power(thetas(rng))
                                                   : NonlinearitySpec::abs_power(thetas(rng));
        const double s = args(rng);
        auto ih = [&spec](double t) { return 1.0 / (std::abs(spec(t)) + 1.0); };
        auto ip = [&spec](double t) {
            const double d = std::abs(spec(t)) + 1.0;
            return 1.0 / (d * d);
        };
        CHECK(std::abs(eval_H(spec, s, tol) - oracle::composite_simpson(ih, 0.0, s, 40000)) <
              10.0 * tol);
        CHECK(std::abs(eval_phi(spec, s, tol) - oracle::composite_simpson(ip, 0.0, s, 40000)) <
              10.0 * tol);
    }
}

TEST_CASE("growth classification", "[nonlinearity]") {
    CHECK(classify_growth(NonlinearitySpec::linear()).divergent());
    CHECK(classify_growth(NonlinearitySpec::log_power(1.0)).divergent());
    CHECK(classify_growth(NonlinearitySpec::log_power(0.3)).divergent());

    const auto sp = classify_growth(NonlinearitySpec::signed_power(1.0), 1e-10);
    REQUIRE_FALSE(sp.divergent());
    CHECK(sp.limit_pos == Approx(M_PI / 2.0).margin(1e-8));
    CHECK(sp.limit_neg == Approx(-M_PI / 2.0).margin(1e-8));
    CHECK(sp.limit_pos > 0.0);
    CHECK(sp.limit_neg < 0.0);

    // calculus fact: the log-power transform converges iff theta > 1
    const auto lp2 = classify_growth(NonlinearitySpec::log_power(2.0), 1e-9);
    REQUIRE_FALSE(lp2.divergent());
    CHECK(lp2.limit_pos == Approx(kBlowupLogPowerTheta2).margin(1e-7));

    CHECK(classify_growth(truncate_h(NonlinearitySpec::signed_power(1.0), 10.0)).divergent());
    CHECK(classify_growth(
              NonlinearitySpec::tabulated({{-1.0, -5.0}, {0.0, 0.0}, {1.0, 5.0}}))
              .divergent());
}

TEST_CASE("blow-up integral values and markers", "[nonlinearity]") {
    const auto sp1 = NonlinearitySpec::signed_power(1.0);
    SECTION("closed forms for the quadratic family") {
        const auto v = blowup_integral(sp1, 1.0, 1.0, 1e-11);
        REQUIRE_FALSE(v.is_infinite());
        CHECK(v.value() == Approx(M_PI / 2.0).margin(1e-10));
        const auto v4 = blowup_integral(sp1, 4.0, 1.0, 1e-11);
        CHECK(v4.value() == Approx(M_PI / 4.0).margin(1e-10));
    }
    SECTION("divergence markers") {
        CHECK(blowup_integral(NonlinearitySpec::linear(), 1.0, 1.0, 1e-10).is_infinite());
        CHECK(blowup_integral(NonlinearitySpec::log_power(1.0), 1.0, 1.0, 1e-10).is_infinite());
        CHECK(blowup_integral(NonlinearitySpec::log_power(0.5), 2.0, 3.0, 1e-10).is_infinite());
        CHECK(blowup_integral(truncate_h(sp1, 7.0), 1.0, 1.0, 1e-10).is_infinite());
    }
    SECTION("power families match the closed form (pi/p)/sin(pi/p), p = 1+theta") {
        for (double theta : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
            const double p = 1.0 + theta;
            const double exact = (M_PI / p) / std::sin(M_PI / p);
            for (const auto& spec :
                 {NonlinearitySpec::signed_power(theta), NonlinearitySpec::abs_power(theta)}) {
                const auto v = blowup_integral(spec, 1.0, 1.0, 1e-10);
                REQUIRE_FALSE(v.is_infinite());
                CHECK(v.value() == Approx(exact).margin(1e-9));
            }
        }
    }
    SECTION("convergent log-power tail against the frozen oracle") {
        const auto v = blowup_integral(NonlinearitySpec::log_power(2.0), 1.0, 1.0, 1e-9);
        REQUIRE_FALSE(v.is_infinite());
        CHECK(v.value() == Approx(kBlowupLogPowerTheta2).margin(1e-7));
        // general K, eps; frozen via the u = log(e+s) substitution route
        const auto w = blowup_integral(NonlinearitySpec::log_power(2.0), 2.0, 0.5, 1e-9);
        REQUIRE_FALSE(w.is_infinite());
        CHECK(w.value() == Approx(1.2707817576202414).margin(1e-7));
    }
    SECTION("tabulated tails") {
        const auto rising = NonlinearitySpec::tabulated({{0.0, 0.0}, {1.0, 2.0}, {2.0, 5.0}});
        CHECK(blowup_integral(rising, 1.0, 1.0, 1e-8).is_infinite());
        const auto falling = NonlinearitySpec::tabulated({{0.0, 0.0}, {1.0, 2.0}, {2.0, 1.0}});
        CHECK_THROWS_AS(blowup_integral(falling, 1.0, 1.0, 1e-8), IndeterminateTail);
        const auto negative = NonlinearitySpec::tabulated({{0.0, 0.0}, {1.0, -1.0}, {2.0, 3.0}});
        CHECK_THROWS_AS(blowup_integral(negative, 1.0, 1.0, 1e-8), std::domain_error);
    }
    SECTION("finite blow-up integral matches a convergent growth verdict") {
        for (double theta : {0.5, 1.0, 2.0}) {
            const auto spec = NonlinearitySpec::signed_power(theta);
            const auto v = blowup_integral(spec, 1.7, 0.9, 1e-9);
            REQUIRE_FALSE(v.is_infinite());
            CHECK_FALSE(classify_growth(spec).divergent());
        }
    }
    SECTION("preconditions") {
        CHECK_THROWS_AS(blowup_integral(sp1, 0.0, 1.0, 1e-8), std::domain_error);
        CHECK_THROWS_AS(blowup_integral(sp1, 1.0, -1.0, 1e-8), std::domain_error);
    }
}

TEST_CASE("lipschitz window per family", "[nonlinearity]") {
    CHECK(NonlinearitySpec::linear().lipschitz_bound(100.0) == 1.0);
    CHECK(NonlinearitySpec::signed_power(1.0).lipschitz_bound(3.0) == Approx(6.0));
    CHECK(NonlinearitySpec::abs_power(2.0).lipschitz_bound(2.0) == Approx(12.0));
    CHECK(NonlinearitySpec::log_power(1.0).lipschitz_bound(0.0) == Approx(1.0));
    const auto tab = NonlinearitySpec::tabulated({{-1.0, -4.0}, {0.0, 0.0}, {2.0, 1.0}});
    CHECK(tab.lipschitz_bound(0.5) == Approx(4.0));
    // the bound dominates finite differences of h on [-M, M]
    for (const auto& spec : sample_families()) {
        const double M = 8.0, L = spec.lipschitz_bound(M);
        for (int i = 0; i < 40; ++i) {
            const double s = -M + (2.0 * M) * i / 39.0;
            const double t = std::min(M, s + 1e-4);
            CHECK(std::abs(eval_h(spec, t) - eval_h(spec, s)) <= L * (t - s) + 1e-12);
        }
    }
}

TEST_CASE("nonlinearity JSON round trip", "[nonlinearity]") {
    std::mt19937 rng(5u);
    std::uniform_real_distribution<double> ss(-20.0, 20.0);
    for (const auto& spec : sample_families()) {
        const auto trunc = truncate_h(spec, 4.5);
        for (const auto& s0 : {spec, trunc}) {
            nlohmann::json j = s0;
            const auto back = j.get<NonlinearitySpec>();
            for (int k = 0; k < 20; ++k) {
                const double s = ss(rng);
                CHECK(eval_h(back, s) == eval_h(s0, s));
            }
        }
    }
    const nlohmann::json unknown{{"family", "exp"}};
    CHECK_THROWS_AS(unknown.get<NonlinearitySpec>(), std::invalid_argument);
}
