#pragma once

// Scalar nonlinearities h(s) with superlinear growth and the transforms
// built from them: the truncation h_n, the decay transform
// H(s) = int_0^s dt/(|h(t)|+1), the bounded test transform
// phi(s) = int_0^s dt/(|h(t)|+1)^2, the growth classification, and the
// blow-up integral int_0^inf ds/(K h(s) + eps).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "supconv/errors.hpp"
#include "supconv/quadrature.hpp"

namespace supconv {

enum class Family { Linear, LogPower, SignedPower, AbsPower, Tabulated };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::Linear: return "linear";
        case Family::LogPower: return "log_power";
        case Family::SignedPower: return "signed_power";
        case Family::AbsPower: return "abs_power";
        case Family::Tabulated: return "tabulated";
    }
    return "?";
}

/// One concrete nonlinearity. Immutable after construction; cheap to copy
/// and safe to share between threads. An optional truncation level n turns
/// the spec into h_n(s) = clamp(h(s), -n, n) without losing the family.
class NonlinearitySpec {
public:
    NonlinearitySpec() = default;  // the linear family

    static NonlinearitySpec linear() { return NonlinearitySpec(Family::Linear, 0.0); }

    static NonlinearitySpec log_power(double theta) {
        require_positive_theta(theta);
        return NonlinearitySpec(Family::LogPower, theta);
    }

    static NonlinearitySpec signed_power(double theta) {
        require_positive_theta(theta);
        return NonlinearitySpec(Family::SignedPower, theta);
    }

    static NonlinearitySpec abs_power(double theta) {
        require_positive_theta(theta);
        return NonlinearitySpec(Family::AbsPower, theta);
    }

    /// Piecewise-linear nonlinearity through (s_i, h_i); s_i strictly
    /// increasing and one sample must pin h(0) = 0. Extrapolates with the
    /// first/last segment slope.
    static NonlinearitySpec tabulated(std::vector<std::pair<double, double>> samples) {
        if (samples.size() < 2) throw std::invalid_argument("tabulated: need at least two samples");
        bool has_origin = false;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (i > 0 && !(samples[i - 1].first < samples[i].first)) {
                throw std::invalid_argument("tabulated: abscissae must be strictly increasing");
            }
            if (samples[i].first == 0.0 && samples[i].second == 0.0) has_origin = true;
        }
        if (!has_origin) throw std::invalid_argument("tabulated: a sample (0, 0) is required");
        NonlinearitySpec spec(Family::Tabulated, 0.0);
        spec.samples_ = std::move(samples);
        return spec;
    }

    Family family() const { return family_; }
    double theta() const { return theta_; }
    const std::vector<std::pair<double, double>>& samples() const { return samples_; }
    std::optional<double> truncation() const { return truncation_; }

    /// h(s) for this family (clamped when a truncation level is set).
    double operator()(double s) const {
        double v = raw(s);
        if (truncation_) v = std::clamp(v, -*truncation_, *truncation_);
        return v;
    }

    /// Local Lipschitz bound of h on [-M, M]. For the analytic families
    /// |h'| is even and nondecreasing in |s|, so the bound is |h'(M)|.
    /// A set truncation can only lower the true constant, so the untruncated
    /// value stays a valid bound.
    double lipschitz_bound(double M) const {
        if (M < 0.0) throw std::domain_error("lipschitz_bound: M must be nonnegative");
        switch (family_) {
            case Family::Linear: return 1.0;
            case Family::LogPower: {
                const double L = std::log(M_E + M);
                return std::pow(L, theta_) +
                       theta_ * M * std::pow(L, theta_ - 1.0) / (M_E + M);
            }
            case Family::SignedPower:
            case Family::AbsPower:
                return (1.0 + theta_) * std::pow(M, theta_);
            case Family::Tabulated: {
                // end-segment slopes also govern extrapolation, and the end
                // segments overlap [-M, M] whenever extrapolation is reached
                double bound = 0.0;
                for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
                    const auto& [s0, h0] = samples_[i];
                    const auto& [s1, h1] = samples_[i + 1];
                    if (s0 > M || s1 < -M) continue;
                    bound = std::max(bound, std::abs((h1 - h0) / (s1 - s0)));
                }
                return bound;
            }
        }
        return 0.0;
    }

    friend void to_json(nlohmann::json& j, const NonlinearitySpec& spec) {
        j = nlohmann::json{{"family", family_name(spec.family_)}};
        if (spec.family_ != Family::Linear && spec.family_ != Family::Tabulated) {
            j["theta"] = spec.theta_;
        }
        if (spec.family_ == Family::Tabulated) {
            auto arr = nlohmann::json::array();
            for (const auto& [s, h] : spec.samples_) arr.push_back({s, h});
            j["samples"] = arr;
        }
        if (spec.truncation_) j["truncation"] = *spec.truncation_;
    }

    friend void from_json(const nlohmann::json& j, NonlinearitySpec& spec) {
        const std::string fam = j.at("family").get<std::string>();
        if (fam == "linear") {
            spec = linear();
        } else if (fam == "log_power") {
            spec = log_power(j.at("theta").get<double>());
        } else if (fam == "signed_power") {
            spec = signed_power(j.at("theta").get<double>());
        } else if (fam == "abs_power") {
            spec = abs_power(j.at("theta").get<double>());
        } else if (fam == "tabulated") {
            std::vector<std::pair<double, double>> samples;
            for (const auto& row : j.at("samples")) {
                samples.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
            }
            spec = tabulated(std::move(samples));
        } else {
            throw std::invalid_argument("unknown nonlinearity family: " + fam);
        }
        if (j.contains("truncation")) {
            spec = truncate_h(spec, j.at("truncation").get<double>());
        }
    }

private:
    NonlinearitySpec(Family f, double theta) : family_(f), theta_(theta) {}

    static void require_positive_theta(double theta) {
        if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
    }

    double raw(double s) const {
        switch (family_) {
            case Family::Linear: return s;
            case Family::LogPower: return s * std::pow(std::log(M_E + std::abs(s)), theta_);
            case Family::SignedPower: return s * std::pow(std::abs(s), theta_);
            case Family::AbsPower: return std::pow(std::abs(s), 1.0 + theta_);
            case Family::Tabulated: return interpolate(s);
        }
        return 0.0;
    }

    double interpolate(double s) const {
        const auto lo = samples_.front();
        const auto hi = samples_.back();
        if (s <= lo.first) {
            const auto& next = samples_[1];
            const double slope = (next.second - lo.second) / (next.first - lo.first);
            return lo.second + slope * (s - lo.first);
        }
        if (s >= hi.first) {
            const auto& prev = samples_[samples_.size() - 2];
            const double slope = (hi.second - prev.second) / (hi.first - prev.first);
            return hi.second + slope * (s - hi.first);
        }
        auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                                   [](double v, const auto& p) { return v < p.first; });
        const auto& [s1, h1] = *it;
        const auto& [s0, h0] = *(it - 1);
        const double t = (s - s0) / (s1 - s0);
        return h0 + t * (h1 - h0);
    }

    friend NonlinearitySpec truncate_h(const NonlinearitySpec&, double);

    Family family_ = Family::Linear;
    double theta_ = 0.0;
    std::vector<std::pair<double, double>> samples_;
    std::optional<double> truncation_;
};

inline double eval_h(const NonlinearitySpec& spec, double s) { return spec(s); }

/// h_n(s) = T_n(h(s)). Composing truncations keeps the tighter level, so
/// truncating again with n' >= n is a no-op.
inline NonlinearitySpec truncate_h(const NonlinearitySpec& spec, double n) {
    if (!(n > 0.0)) throw std::domain_error("truncate_h: level must be positive");
    NonlinearitySpec out = spec;
    out.truncation_ = spec.truncation_ ? std::min(*spec.truncation_, n) : n;
    return out;
}

/// H(s) = int_0^s dt / (|h(t)| + 1), adaptive quadrature with absolute
/// error <= tol.
inline double eval_H(const NonlinearitySpec& spec, double s, double tol) {
    if (!(tol > 0.0)) throw std::domain_error("eval_H: tol must be positive");
    if (s == 0.0) return 0.0;
    auto integrand = [&spec](double t) { return 1.0 / (std::abs(spec(t)) + 1.0); };
    return integrate_adaptive(integrand, 0.0, s, tol).value;
}

/// phi(s) = int_0^s dt / (|h(t)| + 1)^2.
inline double eval_phi(const NonlinearitySpec& spec, double s, double tol) {
    if (!(tol > 0.0)) throw std::domain_error("eval_phi: tol must be positive");
    if (s == 0.0) return 0.0;
    auto integrand = [&spec](double t) {
        const double d = std::abs(spec(t)) + 1.0;
        return 1.0 / (d * d);
    };
    return integrate_adaptive(integrand, 0.0, s, tol).value;
}

namespace detail {

// int_0^inf g(s) ds split at s = 1; the tail is inverted with x = 1/s so
// any integrable endpoint singularity lands at x = 0, where doubles are
// dense enough for the adaptive subdivision to exhaust it. Gauss nodes are
// interior, so the singular point itself is never evaluated.
template <class G>
IntegralEstimate improper_algebraic(G&& g, double tol, int max_segments = 4000) {
    const auto body = integrate_adaptive(g, 0.0, 1.0, 0.5 * tol, max_segments);
    auto inverted = [&g](double x) { return (g(1.0 / x) / x) / x; };
    const auto tail = integrate_adaptive(inverted, 0.0, 1.0, 0.5 * tol, max_segments);
    return {body.value + tail.value, body.error + tail.error};
}

// int_0^inf ds / (K s log^theta(e+s) + eps) for theta > 1, via the double
// substitution s = e^v - 1, v = w/(1-w). The exponentials are folded into
// the integrand so no intermediate overflows for w near 1.
inline IntegralEstimate logpower_improper(double theta, double K, double eps, double tol) {
    auto transformed = [=](double w) {
        const double omw = 1.0 - w;
        const double v = w / omw;
        const double L = (v > 30.0) ? v + std::log1p((M_E - 1.0) * std::exp(-v))
                                    : std::log(M_E + std::expm1(v));
        const double denom = K * (-std::expm1(-v)) * std::pow(L, theta) + eps * std::exp(-v);
        return 1.0 / (denom * omw * omw);
    };
    return integrate_adaptive(transformed, 0.0, 1.0, tol, 8000);
}

} // namespace detail

/// sup_s |phi(s)| = int_0^inf dt/(|h(t)|+1)^2; the Infinity marker signals
/// a bounded tabulated nonlinearity for which the bound is vacuous.
inline ImproperValue phi_sup(const NonlinearitySpec& spec, double tol) {
    if (!(tol > 0.0)) throw std::domain_error("phi_sup: tol must be positive");
    if (spec.truncation()) return ImproperValue::infinity();  // bounded h
    if (spec.family() == Family::Tabulated) {
        // a flat tail segment makes one of the two one-sided integrals diverge
        const auto& s = spec.samples();
        const double left_slope = (s[1].second - s[0].second) / (s[1].first - s[0].first);
        const double right_slope = (s[s.size() - 1].second - s[s.size() - 2].second) /
                                   (s[s.size() - 1].first - s[s.size() - 2].first);
        if (left_slope == 0.0 || right_slope == 0.0) return ImproperValue::infinity();
    }
    auto integrand = [&spec](double t) {
        const double d = std::abs(spec(t)) + 1.0;
        return 1.0 / (d * d);
    };
    const auto positive = detail::improper_algebraic(integrand, 0.5 * tol);
    auto negative_integrand = [&spec](double t) {
        const double d = std::abs(spec(-t)) + 1.0;
        return 1.0 / (d * d);
    };
    const auto negative = detail::improper_algebraic(negative_integrand, 0.5 * tol);
    return ImproperValue::finite(std::max(positive.value, negative.value),
                                 positive.error + negative.error);
}

struct GrowthVerdict {
    enum class Kind { Divergent, Convergent };
    Kind kind = Kind::Divergent;
    double limit_pos = 0.0;  // lim_{s->+inf} H(s), finite only when Convergent
    double limit_neg = 0.0;

    bool divergent() const { return kind == Kind::Divergent; }
};

/// Decides whether |H(s)| -> infinity. Log-power nonlinearities diverge
/// exactly for theta <= 1 (the integral comparison test); power families
/// always converge; tabulated/truncated ones grow at most linearly and
/// diverge.
inline GrowthVerdict classify_growth(const NonlinearitySpec& spec, double tol = 1e-9) {
    GrowthVerdict verdict;
    if (spec.truncation() || spec.family() == Family::Tabulated ||
        spec.family() == Family::Linear) {
        return verdict;  // divergent
    }
    if (spec.family() == Family::LogPower) {
        if (spec.theta() <= 1.0) return verdict;
        const auto est = detail::logpower_improper(spec.theta(), 1.0, 1.0, tol);
        verdict.kind = GrowthVerdict::Kind::Convergent;
        verdict.limit_pos = est.value;
        verdict.limit_neg = -est.value;
        return verdict;
    }
    // SignedPower / AbsPower: |h(s)| = |s|^{1+theta} is even, so H is odd.
    const double theta = spec.theta();
    auto integrand = [theta](double s) { return 1.0 / (std::pow(s, 1.0 + theta) + 1.0); };
    const auto est = detail::improper_algebraic(integrand, tol);
    verdict.kind = GrowthVerdict::Kind::Convergent;
    verdict.limit_pos = est.value;
    verdict.limit_neg = -est.value;
    return verdict;
}

/// int_0^inf ds / (K h(s) + eps). Requires h >= 0 on s >= 0. Divergence is
/// certified analytically per family; tabulated tails with negative slope
/// leave the integrand sign uncertain and raise IndeterminateTail.
inline ImproperValue blowup_integral(const NonlinearitySpec& spec, double K, double eps,
                                     double tol) {
    if (!(K > 0.0) || !(eps > 0.0)) throw std::domain_error("blowup_integral: K, eps > 0 required");
    if (!(tol > 0.0)) throw std::domain_error("blowup_integral: tol must be positive");

    if (spec.truncation()) return ImproperValue::infinity();

    switch (spec.family()) {
        case Family::Linear:
            return ImproperValue::infinity();
        case Family::LogPower:
            if (spec.theta() <= 1.0) return ImproperValue::infinity();
            {
                const auto est = detail::logpower_improper(spec.theta(), K, eps, tol);
                return ImproperValue::finite(est.value, est.error);
            }
        case Family::SignedPower:
        case Family::AbsPower: {
            const double theta = spec.theta();
            auto integrand = [=](double s) {
                return 1.0 / (K * std::pow(s, 1.0 + theta) + eps);
            };
            const auto est = detail::improper_algebraic(integrand, tol, 8000);
            return ImproperValue::finite(est.value, est.error);
        }
        case Family::Tabulated: {
            const auto& samples = spec.samples();
            for (const auto& [s, h] : samples) {
                if (s >= 0.0 && h < 0.0) {
                    throw std::domain_error("blowup_integral: h must be nonnegative on s >= 0");
                }
            }
            const auto& a = samples[samples.size() - 2];
            const auto& b = samples.back();
            const double slope = (b.second - a.second) / (b.first - a.first);
            if (slope < 0.0) {
                throw IndeterminateTail(
                    "tabulated nonlinearity decreases at the right end; the integrand "
                    "sign beyond the samples is not certified");
            }
            return ImproperValue::infinity();  // at most linear growth
        }
    }
    return ImproperValue::infinity();
}

} // namespace supconv
