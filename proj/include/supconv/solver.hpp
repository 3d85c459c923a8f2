#pragma once

// Two solution schemes for -div(M grad u) + mu u = -div(h(u) E) + f:
//
//  * picard_solve / solve: frozen-coefficient (Picard) iteration on the
//    truncated problems h_n = T_n(h), E_n, f_n, climbing a truncation
//    ladder; "clamp never active at the final level" stands in for the
//    passage to the limit.
//  * fixed_point_solve: the untruncated map v -> S(v) = w restricted to the
//    invariant ball of radius R* certified by the smallness condition
//    ||f||_m ||E||_r^{1/theta} <= (theta/S)(alpha 2*/(S m**(1+theta)))^{1+1/theta}.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "supconv/errors.hpp"
#include "supconv/mesh.hpp"
#include "supconv/nonlinearity.hpp"

namespace supconv {

struct ProblemSpec {
    Grid grid;
    MatrixField M;
    VectorField E;
    ScalarField f;
    double mu = 0.0;
    NonlinearitySpec h = NonlinearitySpec::linear();
    int analysis_n = 3;          // dimension used in the estimate formulas
    double m_exp = 1.2;          // declared summability of f
    double r_exp = 6.0;          // declared summability of E
    std::optional<double> sobolev_override;

    ProblemSpec(Grid g, MatrixField M_, VectorField E_, ScalarField f_, double mu_,
                NonlinearitySpec h_, int analysisN, double m, double r)
        : grid(std::move(g)), M(std::move(M_)), E(std::move(E_)), f(std::move(f_)), mu(mu_),
          h(std::move(h_)), analysis_n(analysisN), m_exp(m), r_exp(r) {
        if (grid != M.grid() || grid != E.grid() || grid != f.grid()) {
            throw std::invalid_argument("ProblemSpec: component grids differ");
        }
        if (mu < 0.0) throw std::invalid_argument("ProblemSpec: mu must be nonnegative");
        if (analysis_n < 3) throw std::invalid_argument("ProblemSpec: analysis dimension >= 3");
        if (!f.all_finite()) throw std::invalid_argument("ProblemSpec: f has non-finite entries");
    }

    double sobolev() const {
        return sobolev_override ? *sobolev_override : sobolev_constant(analysis_n);
    }
};

struct SolverConfig {
    std::vector<double> ladder{10.0, 100.0, 1000.0, 10000.0};
    double picard_tol = 1e-10;   // relative successive difference in L2
    int max_iterations = 200;
    double damping = 1.0;        // omega in (0, 1]
    double divergence_cap = 1e8; // L2 norm bound

    void validate() const {
        if (ladder.empty()) throw std::invalid_argument("SolverConfig: empty ladder");
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            if (!(ladder[i] > 0.0) || (i > 0 && !(ladder[i] > ladder[i - 1]))) {
                throw std::invalid_argument("SolverConfig: ladder must be positive increasing");
            }
        }
        if (!(picard_tol > 0.0)) throw std::invalid_argument("SolverConfig: picard_tol > 0");
        if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations >= 1");
        if (!(damping > 0.0) || damping > 1.0) throw std::invalid_argument("SolverConfig: damping in (0,1]");
        if (!(divergence_cap > 0.0)) throw std::invalid_argument("SolverConfig: divergence_cap > 0");
    }
};

enum class Verdict { Solved, NonexistenceSuspected, NotConverged };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Solved: return "Solved";
        case Verdict::NonexistenceSuspected: return "NonexistenceSuspected";
        case Verdict::NotConverged: return "NotConverged";
    }
    return "?";
}

struct IterationRecord {
    double diff_rel;   // ||u_{k+1} - u_k||_2 / ||u_{k+1}||_2
    double norm_l2;
    double omega;
};

struct LevelHistory {
    double level = std::numeric_limits<double>::infinity();
    std::vector<IterationRecord> iterations;
    bool converged = false;
    bool cap_exceeded = false;
};

/// delta, K, the ball radius R* = (delta(1+theta))^{-1/theta} and the
/// admissible K_delta = R* theta/(1+theta); satisfied iff K <= K_delta.
/// All norms are the discrete surrogates of the continuum ones.
struct SmallnessCertificate {
    double theta = 0.0;
    double m_dstar = 0.0;
    double sobolev_used = 0.0;
    double alpha_used = 0.0;
    double norm_E_r = 0.0;
    double norm_f_m = 0.0;
    double delta = 0.0;
    double K = 0.0;
    bool rstar_infinite = false;  // E == 0 makes delta = 0 and R* infinite
    double rstar = 0.0;
    double K_delta = 0.0;
    double product_lhs = 0.0;     // ||f||_m ||E||_r^{1/theta}
    double product_rhs = 0.0;     // threshold form of the smallness condition
    bool satisfied = false;
};

struct SolveReport {
    Verdict verdict = Verdict::NotConverged;
    ScalarField field;
    std::vector<LevelHistory> levels;
    std::vector<double> truncation_levels;
    int analysis_n = 3;
    double sobolev_used = 0.0;
    double alpha_used = 0.0;
    std::optional<SmallnessCertificate> certificate;
    std::vector<double> iterate_norms_mstar;  // fixed-point path only
    bool ball_violation = false;
    double worst_iterate_norm = 0.0;
    std::string note;

    explicit SolveReport(ScalarField f) : field(std::move(f)) {}
};

/// m** = mN/(N-2m) for 2N/(N+2) <= m < N/2.
inline double m_doublestar(double m, int N) {
    if (N < 3) throw std::domain_error("m_doublestar: N >= 3 required");
    const double nn = static_cast<double>(N);
    const double lo = 2.0 * nn / (nn + 2.0);
    if (!(m >= lo) || !(m < 0.5 * nn)) {
        throw std::domain_error("m_doublestar: m outside [2N/(N+2), N/2)");
    }
    return m * nn / (nn - 2.0 * m);
}

/// The exponent compatibility 0 < 1/N - 1/r = theta/m** (within 1e-12).
inline bool compatibility_check(double theta, double m, double r, int N) {
    if (!(theta > 0.0) || !(m > 0.0) || !(r > 0.0) || N < 3) return false;
    const double nn = static_cast<double>(N);
    if (!(m >= 2.0 * nn / (nn + 2.0)) || !(m < 0.5 * nn)) return false;
    const double lhs = 1.0 / nn - 1.0 / r;
    if (!(lhs > 0.0)) return false;
    return std::abs(lhs - theta / m_doublestar(m, N)) <= 1e-12;
}

inline SmallnessCertificate smallness_certificate(const ProblemSpec& p, double theta) {
    if (!(theta > 0.0)) throw std::domain_error("smallness_certificate: theta > 0 required");
    SmallnessCertificate cert;
    cert.theta = theta;
    cert.m_dstar = m_doublestar(p.m_exp, p.analysis_n);
    cert.sobolev_used = p.sobolev();
    cert.alpha_used = p.M.alpha();
    cert.norm_E_r = lebesgue_norm(p.E, p.r_exp);
    cert.norm_f_m = lebesgue_norm(p.f, p.m_exp);

    const double two_star = 2.0 * p.analysis_n / (p.analysis_n - 2.0);
    const double front = cert.sobolev_used * cert.m_dstar / (cert.alpha_used * two_star);
    cert.delta = front * cert.norm_E_r;
    cert.K = front * cert.sobolev_used * cert.norm_f_m;

    cert.product_lhs = cert.norm_f_m * std::pow(cert.norm_E_r, 1.0 / theta);
    cert.product_rhs =
        theta / cert.sobolev_used *
        std::pow(cert.alpha_used * two_star /
                     (cert.sobolev_used * cert.m_dstar * (1.0 + theta)),
                 1.0 + 1.0 / theta);

    if (cert.delta == 0.0) {
        cert.rstar_infinite = true;
        cert.satisfied = true;  // degenerate: no convection, one linear solve
        return cert;
    }
    cert.rstar = std::pow(cert.delta * (theta + 1.0), -1.0 / theta);
    cert.K_delta = cert.rstar * theta / (theta + 1.0);
    cert.satisfied = cert.K <= cert.K_delta;
    return cert;
}

namespace detail {

class LinearizedOperator {
public:
    LinearizedOperator(const MatrixField& M, double mu)
        : grid_(M.grid()), A_(assemble_diffusion(M, mu)) {
        solver_.compute(A_);
        if (solver_.info() != Eigen::Success) {
            throw LinearSolveFailure("sparse Cholesky factorization failed");
        }
    }

    const Eigen::SparseMatrix<double>& matrix() const { return A_; }

    ScalarField solve(const ScalarField& rhs) const {
        Eigen::Map<const Eigen::VectorXd> b(rhs.values().data(), rhs.size());
        Eigen::VectorXd x = solver_.solve(b);
        if (solver_.info() != Eigen::Success) {
            throw LinearSolveFailure("sparse triangular solve failed");
        }
        ScalarField out(grid_);
        for (int k = 0; k < out.size(); ++k) out[k] = x[k];
        return out;
    }

private:
    Grid grid_;
    Eigen::SparseMatrix<double> A_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

struct PicardState {
    ScalarField field;
    LevelHistory history;
};

// One Picard sweep at a fixed truncation level. `hn`, `En`, `fn` are the
// already truncated data; `op` holds the factorized diffusion operator.
inline PicardState picard_sweep(const LinearizedOperator& op, const NonlinearitySpec& hn,
                                const VectorField& En, const ScalarField& fn,
                                const SolverConfig& cfg, ScalarField u, double level) {
    PicardState st{std::move(u), {}};
    st.history.level = level;
    double omega = cfg.damping;
    const double omega_floor = std::min(0.125, cfg.damping);
    double prev_diff = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iterations; ++it) {
        ScalarField g = st.field;
        for (int k = 0; k < g.size(); ++k) g[k] = hn(g[k]);
        ScalarField rhs = assemble_convection_rhs(En, g);
        rhs += fn;
        ScalarField unew = op.solve(rhs);
        if (omega != 1.0) {
            unew *= omega;
            unew += (1.0 - omega) * st.field;
        }
        ScalarField delta = unew;
        delta -= st.field;
        const double norm_new = norm_l2(unew);
        const double diff = norm_l2(delta) / std::max(norm_new, 1e-300);
        st.history.iterations.push_back({diff, norm_new, omega});
        st.field = std::move(unew);
        if (!std::isfinite(norm_new) || norm_new > cfg.divergence_cap) {
            st.history.cap_exceeded = true;
            break;
        }
        if (diff <= cfg.picard_tol) {
            st.history.converged = true;
            break;
        }
        // auto-halve the damping on residual increase, with a floor so a
        // genuine blow-up still outruns the cap
        omega = (diff > prev_diff) ? std::max(0.5 * omega, omega_floor)
                                   : std::min(cfg.damping, 1.25 * omega);
        prev_diff = diff;
    }
    return st;
}

} // namespace detail

/// Solves the linear problem -div(M grad w) + mu w = -div(g E) + f for a
/// frozen transported density g (the map S with h(v) supplied explicitly).
inline ScalarField solve_linearized(const ProblemSpec& p, const ScalarField& g) {
    p.f.check_same_grid(g);
    detail::LinearizedOperator op(p.M, p.mu);
    ScalarField rhs = assemble_convection_rhs(p.E, g);
    rhs += p.f;
    return op.solve(rhs);
}

struct PicardResult {
    ScalarField field;
    LevelHistory history;
};

/// Picard iteration at one truncation level n: data are truncated at n and
/// the iterates are u^{k+1} = (1-omega) u^k + omega A^{-1}(conv(E_n, h_n(u^k)) + f_n).
inline PicardResult picard_solve(const ProblemSpec& p, double level, const SolverConfig& cfg,
                                 const ScalarField& warm) {
    cfg.validate();
    if (!(level > 0.0)) throw std::domain_error("picard_solve: truncation level must be positive");
    p.f.check_same_grid(warm);
    detail::LinearizedOperator op(p.M, p.mu);
    auto st = detail::picard_sweep(op, truncate_h(p.h, level), p.E.clamped(level),
                                   p.f.clamped(level), cfg, warm, level);
    return {std::move(st.field), std::move(st.history)};
}

/// Climbs the truncation ladder with warm starts. Solved requires the final
/// level to converge, the last two levels to agree in relative L2 (within
/// 10x the Picard tolerance; consecutive fixed points carry iteration noise
/// of that order), and the final clamp to stay inactive.
inline SolveReport solve(const ProblemSpec& p, const SolverConfig& cfg) {
    cfg.validate();
    detail::LinearizedOperator op(p.M, p.mu);
    SolveReport report{ScalarField(p.grid)};
    report.analysis_n = p.analysis_n;
    report.sobolev_used = p.sobolev();
    report.alpha_used = p.M.alpha();

    ScalarField prev_level{p.grid};
    bool have_prev = false;
    for (double n : cfg.ladder) {
        auto st = detail::picard_sweep(op, truncate_h(p.h, n), p.E.clamped(n), p.f.clamped(n),
                                       cfg, report.field, n);
        report.truncation_levels.push_back(n);
        report.levels.push_back(st.history);
        if (st.history.cap_exceeded) {
            report.field = std::move(st.field);
            report.verdict = Verdict::NonexistenceSuspected;
            report.note = "L2 divergence cap " + format_double(cfg.divergence_cap) +
                          " exceeded at truncation level " + format_double(n) +
                          "; heuristic verdict, not a nonexistence proof";
            return report;
        }
        prev_level = std::exchange(report.field, std::move(st.field));
        have_prev = true;
    }

    const bool final_converged = report.levels.back().converged;
    double level_diff = 0.0;
    if (have_prev && cfg.ladder.size() > 1) {
        ScalarField d = report.field;
        d -= prev_level;
        level_diff = norm_l2(d) / std::max(norm_l2(report.field), 1e-300);
    }
    double h_max = 0.0;
    for (int k = 0; k < report.field.size(); ++k) {
        h_max = std::max(h_max, std::abs(p.h(report.field[k])));
    }
    const bool clamp_inactive = h_max < cfg.ladder.back();
    if (final_converged && level_diff <= 10.0 * cfg.picard_tol && clamp_inactive) {
        report.verdict = Verdict::Solved;
    } else {
        report.verdict = Verdict::NotConverged;
        report.note = !final_converged ? "final truncation level did not converge"
                      : !clamp_inactive
                          ? "clamp still active at the final truncation level (max |h(u)| = " +
                                format_double(h_max) + ")"
                          : "last two truncation levels disagree (relative L2 " +
                                format_double(level_diff) + ")";
    }
    return report;
}

/// The untruncated fixed-point scheme w = S(v) under the smallness
/// certificate: every iterate is expected to stay in the ball of radius R*
/// in the discrete L^{m**} norm; leaving it is recorded, not fatal.
inline SolveReport fixed_point_solve(const ProblemSpec& p, double theta, const SolverConfig& cfg) {
    cfg.validate();
    if (!(theta > 0.0)) {
        throw std::domain_error("fixed_point_solve: theta > 0 required (h(s)=s is excluded)");
    }
    if (p.h.family() != Family::SignedPower && p.h.family() != Family::AbsPower) {
        throw std::invalid_argument("fixed_point_solve: power-type nonlinearity required");
    }
    if (std::abs(p.h.theta() - theta) > 1e-12) {
        throw std::invalid_argument("fixed_point_solve: theta disagrees with the nonlinearity");
    }
    if (!compatibility_check(theta, p.m_exp, p.r_exp, p.analysis_n)) {
        throw std::domain_error("fixed_point_solve: exponents fail 1/N - 1/r = theta/m**");
    }
    SmallnessCertificate cert = smallness_certificate(p, theta);
    if (!cert.satisfied) {
        throw std::domain_error("fixed_point_solve: smallness condition not satisfied");
    }

    detail::LinearizedOperator op(p.M, p.mu);
    SolveReport report{ScalarField(p.grid)};
    report.analysis_n = p.analysis_n;
    report.sobolev_used = cert.sobolev_used;
    report.alpha_used = cert.alpha_used;
    report.certificate = cert;
    report.levels.emplace_back();
    LevelHistory& hist = report.levels.back();

    double omega = cfg.damping;
    const double omega_floor = std::min(0.125, cfg.damping);
    double prev_diff = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg.max_iterations; ++it) {
        ScalarField g = report.field;
        for (int k = 0; k < g.size(); ++k) g[k] = p.h(g[k]);
        ScalarField rhs = assemble_convection_rhs(p.E, g);
        rhs += p.f;
        ScalarField w = op.solve(rhs);  // w = S(v)
        if (omega != 1.0) {
            w *= omega;
            w += (1.0 - omega) * report.field;
        }
        const double norm_mstar = lebesgue_norm(w, cert.m_dstar);
        report.iterate_norms_mstar.push_back(norm_mstar);
        report.worst_iterate_norm = std::max(report.worst_iterate_norm, norm_mstar);
        if (!cert.rstar_infinite && norm_mstar > cert.rstar + 1e-9) {
            report.ball_violation = true;
        }
        ScalarField delta = w;
        delta -= report.field;
        const double norm_new = norm_l2(w);
        const double diff = norm_l2(delta) / std::max(norm_new, 1e-300);
        hist.iterations.push_back({diff, norm_new, omega});
        report.field = std::move(w);
        if (!std::isfinite(norm_new) || norm_new > cfg.divergence_cap) {
            hist.cap_exceeded = true;
            break;
        }
        if (diff <= cfg.picard_tol) {
            hist.converged = true;
            break;
        }
        omega = (diff > prev_diff) ? std::max(0.5 * omega, omega_floor)
                                   : std::min(cfg.damping, 1.25 * omega);
        prev_diff = diff;
    }

    if (hist.cap_exceeded) {
        report.verdict = Verdict::NonexistenceSuspected;
        report.note = "L2 divergence cap exceeded in the fixed-point scheme";
    } else if (hist.converged) {
        report.verdict = Verdict::Solved;
        if (report.ball_violation) {
            report.note = "iterate left the certified ball (worst discrete L^{m**} norm " +
                          format_double(report.worst_iterate_norm) + " vs R* " +
                          format_double(cert.rstar) + "); certificate/discretization mismatch";
        }
    } else {
        report.verdict = Verdict::NotConverged;
    }
    return report;
}

} // namespace supconv
