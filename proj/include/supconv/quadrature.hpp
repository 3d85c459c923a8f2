#pragma once

// Adaptive Gauss quadrature with a Kronrod-style error estimate: each
// segment is integrated with 15- and 7-point Gauss-Legendre rules and the
// discrepancy drives a global worst-segment-first subdivision until the
// summed error estimate drops below the requested absolute tolerance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "supconv/errors.hpp"

namespace supconv {

struct IntegralEstimate {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

struct GaussRule {
    std::vector<double> node;   // on [-1, 1]
    std::vector<double> weight;
};

// Legendre nodes by Newton iteration on the three-term recurrence.
inline GaussRule make_gauss_rule(int n) {
    GaussRule rule;
    rule.node.resize(n);
    rule.weight.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        rule.node[i] = -z;
        rule.node[n - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weight[i] = w;
        rule.weight[n - 1 - i] = w;
    }
    return rule;
}

inline const GaussRule& gauss7() {
    static const GaussRule rule = make_gauss_rule(7);
    return rule;
}

inline const GaussRule& gauss15() {
    static const GaussRule rule = make_gauss_rule(15);
    return rule;
}

template <class F>
double gauss_panel(F& f, const GaussRule& rule, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double halfwidth = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.node.size(); ++i) {
        sum += rule.weight[i] * f(mid + halfwidth * rule.node[i]);
    }
    return sum * halfwidth;
}

struct Segment {
    double a, b;
    double value;
    double error;
};

} // namespace detail

/// Integrate f over [a, b] with target absolute error abs_tol. Throws
/// QuadratureFailure when the segment budget is exhausted or the integrand
/// evaluates to a non-finite value.
template <class F>
IntegralEstimate integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    int max_segments = 4000) {
    if (a == b) return {0.0, 0.0};
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }

    auto& fn = f;
    auto evaluate = [&](double lo, double hi) {
        detail::Segment seg;
        seg.a = lo;
        seg.b = hi;
        seg.value = detail::gauss_panel(fn, detail::gauss15(), lo, hi);
        const double coarse = detail::gauss_panel(fn, detail::gauss7(), lo, hi);
        if (!std::isfinite(seg.value) || !std::isfinite(coarse)) {
            throw QuadratureFailure("non-finite integrand value on [" +
                                    std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        seg.error = std::abs(seg.value - coarse);
        return seg;
    };

    auto worse = [](const detail::Segment& l, const detail::Segment& r) {
        return l.error < r.error;
    };

    std::vector<detail::Segment> segs;
    segs.push_back(evaluate(a, b));
    double frozen_value = 0.0;  // segments too narrow to split further
    double frozen_error = 0.0;

    auto total_error = [&] {
        double e = frozen_error;
        for (const auto& s : segs) e += s.error;
        return e;
    };

    std::make_heap(segs.begin(), segs.end(), worse);
    while (total_error() > abs_tol) {
        if (static_cast<int>(segs.size()) >= max_segments) {
            throw QuadratureFailure("quadrature did not reach tolerance within " +
                                    std::to_string(max_segments) + " segments");
        }
        std::pop_heap(segs.begin(), segs.end(), worse);
        const detail::Segment worst = segs.back();
        segs.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            frozen_value += worst.value;
            frozen_error += worst.error;
            if (frozen_error > abs_tol) {
                throw QuadratureFailure("irreducible segment error exceeds tolerance");
            }
            continue;
        }
        segs.push_back(evaluate(worst.a, mid));
        std::push_heap(segs.begin(), segs.end(), worse);
        segs.push_back(evaluate(mid, worst.b));
        std::push_heap(segs.begin(), segs.end(), worse);
    }

    IntegralEstimate out;
    double acc = frozen_value;
    for (const auto& s : segs) acc += s.value;
    out.value = sign * acc;
    out.error = total_error();
    return out;
}

/// Value of an improper integral that may be certified divergent.
class ImproperValue {
public:
    static ImproperValue finite(double v, double err = 0.0) { return ImproperValue(v, err, false); }
    static ImproperValue infinity() {
        return ImproperValue(0.0, 0.0, true);
    }

    bool is_infinite() const { return infinite_; }
    double value() const {
        if (infinite_) throw std::logic_error("ImproperValue: value() on the Infinity marker");
        return value_;
    }
    double error() const { return error_; }

    /// Compares against a finite threshold treating Infinity as larger.
    bool greater_than(double threshold) const { return infinite_ || value_ > threshold; }

private:
    ImproperValue(double v, double e, bool inf) : value_(v), error_(e), infinite_(inf) {}
    double value_;
    double error_;
    bool infinite_;
};

} // namespace supconv
