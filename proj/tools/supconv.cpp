// Command-line front end: problem ingestion, solve orchestration, radial
// tooling, estimate verification, and CSV/JSON export.
//
// Exit codes: 0 success/Solved/all checks pass, 1 usage or IO error,
// 2 NonexistenceSuspected, 3 NotConverged, 4 a verification check failed.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "supconv/problem_io.hpp"
#include "supconv/radial.hpp"
#include "supconv/solver.hpp"
#include "supconv/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace supconv;

namespace {

int thread_budget() {
    if (const char* env = std::getenv("SUPCONV_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

NonlinearitySpec make_family(const std::string& family, std::optional<double> theta) {
    auto need_theta = [&]() {
        if (!theta) throw CLI::ValidationError("--theta is required for family " + family);
        return *theta;
    };
    if (family == "linear") return NonlinearitySpec::linear();
    if (family == "log_power") return NonlinearitySpec::log_power(need_theta());
    if (family == "signed_power" || family == "power") {
        return NonlinearitySpec::signed_power(need_theta());
    }
    if (family == "abs_power") return NonlinearitySpec::abs_power(need_theta());
    throw CLI::ValidationError("unknown family: " + family);
}

struct Range {
    std::vector<double> values;
};

// "start:stop:count" or a single number
Range parse_range(const std::string& text) {
    Range r;
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) {
        r.values.push_back(std::stod(text));
        return r;
    }
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("range needs start:stop:count");
    const double start = std::stod(text.substr(0, c1));
    const double stop = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const long count = std::stol(text.substr(c2 + 1));
    if (count < 1) throw std::invalid_argument("range count must be >= 1");
    for (long i = 0; i < count; ++i) {
        r.values.push_back(count == 1 ? start
                                      : start + (stop - start) * static_cast<double>(i) /
                                            static_cast<double>(count - 1));
    }
    return r;
}

json config_to_json(const SolverConfig& cfg, bool fixed_point) {
    return json{{"ladder", cfg.ladder},
                {"picard_tol", cfg.picard_tol},
                {"max_iterations", cfg.max_iterations},
                {"damping", cfg.damping},
                {"divergence_cap", cfg.divergence_cap},
                {"fixed_point", fixed_point}};
}

int solve_exit_code(Verdict v) {
    switch (v) {
        case Verdict::Solved: return 0;
        case Verdict::NonexistenceSuspected: return 2;
        case Verdict::NotConverged: return 3;
    }
    return 1;
}

int run_solve(const std::string& spec_path, const std::string& out_dir, bool fixed_point,
              std::optional<double> theta, const SolverConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ProblemSpec p = load_problem(spec_path);
    fs::create_directories(out_dir);

    SolveReport rep = [&] {
        if (fixed_point) {
            const double th = theta ? *theta : p.h.theta();
            return fixed_point_solve(p, th, cfg);
        }
        return solve(p, cfg);
    }();

    const fs::path report_path = fs::path(out_dir) / "report.json";
    const fs::path field_path = fs::path(out_dir) / "field.csv";
    const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
    {
        std::ofstream os(report_path);
        os << to_json(rep).dump(2) << '\n';
    }
    {
        std::ofstream os(field_path);
        write_field_csv(os, rep.field);
    }
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    {
        json manifest{{"input", spec_path},
                      {"config", config_to_json(cfg, fixed_point)},
                      {"outputs", {report_path.string(), field_path.string()}},
                      {"verdict", to_string(rep.verdict)},
                      {"elapsed_ms", elapsed.count()}};
        std::ofstream os(manifest_path);
        os << manifest.dump(2) << '\n';
    }
    std::cout << "verdict: " << to_string(rep.verdict) << '\n';
    if (!rep.note.empty()) std::cout << "note: " << rep.note << '\n';
    return solve_exit_code(rep.verdict);
}

int run_radial(double K, double eps, double R, int N, const std::string& family,
               std::optional<double> theta, int nodes, double tol, const std::string& out,
               const std::string& oracle) {
    const RadialProblem p{K, eps, R, N, make_family(family, theta)};
    const ImproperValue I = blowup_integral(p.spec, K, eps, std::min(tol * 0.1, 1e-10));
    const Existence verdict = existence_verdict(p, tol);
    std::cout << "verdict: " << to_string(verdict) << '\n';
    std::cout << "blowup_integral: " << (I.is_infinite() ? "inf" : format_double(I.value()))
              << '\n';
    if (verdict == Existence::NotExists) {
        const auto blow = blowup_time(p.spec, K, eps, R, tol);
        if (blow.blows_up) std::cout << "blowup_radius: " << format_double(blow.r_star) << '\n';
    }
    if (verdict != Existence::Exists) return 0;

    const RadialSolution sol = solve_radial(p, nodes, tol);
    std::cout << "central_value: " << format_double(sol.a) << '\n';
    std::ofstream os(out);
    if (!os) {
        std::cerr << "cannot open " << out << '\n';
        return 1;
    }
    if (oracle.empty()) {
        write_profile_csv(os, sol);
    } else {
        double sup = 0.0;
        os << "r,u,u_exact\n";
        for (std::size_t i = 0; i < sol.r.size(); ++i) {
            const double exact = oracle == "tan" ? analytic_tan(K, eps, R, sol.r[i])
                                                 : analytic_tanh(K, eps, R, sol.r[i]);
            sup = std::max(sup, std::abs(exact - sol.u[i]));
            write_csv_row(os, {sol.r[i], sol.u[i], exact});
        }
        std::cout << "oracle_sup_error: " << format_double(sup) << '\n';
    }
    return 0;
}

struct SweepRow {
    double K, eps, R, theta;
    std::string verdict;
    std::string integral;
    std::string blowup_radius;
};

int run_sweep(const std::string& family, const Range& Ks, const Range& epss, const Range& Rs,
              const Range& thetas, double tol, const std::string& out_path) {
    struct Case {
        double K, eps, R, theta;
    };
    std::vector<Case> cases;
    for (double K : Ks.values)
        for (double eps : epss.values)
            for (double R : Rs.values)
                for (double th : thetas.values) cases.push_back({K, eps, R, th});
    if (cases.empty()) {
        std::cerr << "sweep: empty parameter grid\n";
        return 1;
    }
    std::vector<SweepRow> rows(cases.size());
    const int workers = std::min<int>(thread_budget(), static_cast<int>(cases.size()));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= cases.size()) return;
            const Case& c = cases[idx];
            SweepRow row{c.K, c.eps, c.R, c.theta, "", "", ""};
            try {
                const NonlinearitySpec spec =
                    make_family(family, family == "linear" ? std::optional<double>{}
                                                           : std::optional<double>{c.theta});
                const RadialProblem p{c.K, c.eps, c.R, 3, spec};
                const ImproperValue I = blowup_integral(spec, c.K, c.eps, std::min(tol * 0.1, 1e-10));
                row.verdict = to_string(existence_verdict(p, tol));
                row.integral = I.is_infinite() ? "inf" : format_double(I.value());
                const auto blow = blowup_time(spec, c.K, c.eps, c.R, tol);
                row.blowup_radius = blow.blows_up ? format_double(blow.r_star) : "";
            } catch (const std::exception& e) {
                row.verdict = std::string("error: ") + e.what();
            }
            rows[idx] = std::move(row);
        }
    };
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    std::ostringstream os;
    os << "K,eps,R,theta,verdict,blowup_integral,blowup_radius\n";
    for (const auto& r : rows) {
        os << format_double(r.K) << ',' << format_double(r.eps) << ',' << format_double(r.R)
           << ',' << format_double(r.theta) << ',' << r.verdict << ',' << r.integral << ','
           << r.blowup_radius << '\n';
    }
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        std::ofstream f(out_path);
        if (!f) {
            std::cerr << "cannot open " << out_path << '\n';
            return 1;
        }
        f << os.str();
    }
    return 0;
}

int run_verify(const std::string& spec_path, const std::string& field_path,
               const std::string& spec2_path, const std::string& field2_path,
               std::vector<std::string> checks, const std::string& out_dir,
               const SolverConfig& cfg) {
    ProblemSpec p = load_problem(spec_path);
    fs::create_directories(out_dir);

    auto field_for = [&](const ProblemSpec& prob, const std::string& path) {
        if (!path.empty()) {
            std::ifstream is(path);
            if (!is) throw std::invalid_argument("cannot open field csv: " + path);
            return read_field_csv(prob.grid, is);
        }
        const auto rep = solve(prob, cfg);
        if (rep.verdict != Verdict::Solved) {
            throw std::runtime_error(std::string("prior solve verdict: ") + to_string(rep.verdict));
        }
        return rep.field;
    };

    const ScalarField u = field_for(p, field_path);
    json blocks = json::array();
    bool all_pass = true;
    for (const std::string& name : checks) {
        if (name == "decay") {
            const auto rep = check_decay(u, p.h, p.E, p.f, p.analysis_n, p.M.alpha(),
                                         p.sobolev_override);
            blocks.push_back(to_json(rep));
            all_pass = all_pass && rep.pass;
            std::ofstream os(fs::path(out_dir) / "decay.csv");
            write_decay_csv(os, rep);
        } else if (name == "l1") {
            if (!(p.mu > 0.0)) {
                std::cerr << "l1 check needs mu > 0\n";
                return 1;
            }
            const bool ok = check_L1(u, p.f, p.mu);
            blocks.push_back(json{{"check", "l1"}, {"pass", ok}});
            all_pass = all_pass && ok;
        } else if (name == "comparison") {
            if (spec2_path.empty()) {
                std::cerr << "comparison check needs --spec2\n";
                return 1;
            }
            ProblemSpec p2 = load_problem(spec2_path);
            const ScalarField u2 = field_for(p2, field2_path);
            const bool ok = check_comparison(u, u2, 1e-9);
            blocks.push_back(json{{"check", "comparison"}, {"pass", ok}});
            all_pass = all_pass && ok;
        } else if (name == "nonexistence") {
            if (p.grid.dim() != 1) {
                std::cerr << "nonexistence check needs a 1D radial grid\n";
                return 1;
            }
            const auto rep = check_nonexistence_necessary(p.f, p.h.theta(), p.analysis_n);
            blocks.push_back(to_json(rep));
            all_pass = all_pass && rep.holds;
        } else {
            std::cerr << "unknown check: " << name << '\n';
            return 1;
        }
    }
    {
        std::ofstream os(fs::path(out_dir) / "checks.json");
        os << blocks.dump(2) << '\n';
    }
    for (const auto& b : blocks) {
        const std::string name = b.at("check").get<std::string>();
        const bool ok = b.contains("pass") ? b.at("pass").get<bool>() : b.at("holds").get<bool>();
        std::cout << name << ": " << (ok ? "pass" : "fail") << '\n';
    }
    return all_pass ? 0 : 4;
}

int run_inspect(const std::string& family, std::optional<double> theta, double K, double eps,
                double smin, double smax, int count, double tol) {
    const NonlinearitySpec spec = make_family(family, theta);
    try {
        const ImproperValue I = blowup_integral(spec, K, eps, tol);
        std::cout << "blowup_integral: " << (I.is_infinite() ? "inf" : format_double(I.value()))
                  << '\n';
    } catch (const IndeterminateTail& e) {
        std::cout << "blowup_integral: indeterminate (" << e.what() << ")\n";
    }
    const auto growth = classify_growth(spec);
    std::cout << "growth: " << (growth.divergent() ? "Divergent" : "Convergent") << '\n';
    if (!growth.divergent()) {
        std::cout << "H_limits: " << format_double(growth.limit_neg) << ' '
                  << format_double(growth.limit_pos) << '\n';
    }
    std::cout << "s,h,H,phi\n";
    for (int i = 0; i < count; ++i) {
        const double s = count == 1 ? smin : smin + (smax - smin) * i / (count - 1);
        write_csv_row(std::cout, {s, eval_h(spec, s), eval_H(spec, s, tol), eval_phi(spec, s, tol)});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for Dirichlet problems with superlinear convection"};
    app.require_subcommand(1);

    SolverConfig cfg;
    std::string ladder_text = "10,100,1000,10000";
    auto add_config_flags = [&](CLI::App* cmd) {
        cmd->add_option("--picard-tol", cfg.picard_tol, "relative successive-difference tolerance")
            ->capture_default_str();
        cmd->add_option("--max-iterations", cfg.max_iterations, "Picard iteration cap")
            ->capture_default_str();
        cmd->add_option("--damping", cfg.damping, "damping factor omega in (0,1]")
            ->capture_default_str();
        cmd->add_option("--divergence-cap", cfg.divergence_cap, "L2 norm divergence cap")
            ->capture_default_str();
        cmd->add_option("--ladder", ladder_text, "comma-separated truncation levels")
            ->capture_default_str();
    };
    auto parse_ladder = [&]() {
        cfg.ladder.clear();
        std::istringstream is(ladder_text);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            if (!tok.empty()) cfg.ladder.push_back(std::stod(tok));
        }
    };

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "solve a ProblemSpec JSON document");
    std::string spec_path, out_dir = ".";
    bool fixed_point = false;
    std::optional<double> theta_opt;
    double theta_val = 0.0;
    solve_cmd->add_option("--spec", spec_path, "problem spec JSON path")->required();
    solve_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    solve_cmd->add_flag("--fixed-point", fixed_point, "use the invariant-ball fixed-point scheme");
    auto* theta_flag = solve_cmd->add_option("--theta", theta_val, "power exponent for --fixed-point");
    add_config_flags(solve_cmd);

    // radial
    auto* radial_cmd = app.add_subcommand("radial", "radial existence verdict and profile");
    double K = 1.0, eps = 1.0, R = 1.0, rtol = 1e-10;
    int N = 3, nodes = 10000;
    std::string family = "signed_power", oracle, profile_out = "profile.csv";
    double theta_radial = 0.0;
    radial_cmd->add_option("--K", K, "drift magnitude")->capture_default_str();
    radial_cmd->add_option("--eps", eps, "source scale")->capture_default_str();
    radial_cmd->add_option("--R", R, "ball radius")->capture_default_str();
    radial_cmd->add_option("--N", N, "space dimension (> 2)")->capture_default_str();
    radial_cmd->add_option("--family", family, "nonlinearity family")->capture_default_str();
    auto* rtheta_flag = radial_cmd->add_option("--theta", theta_radial, "family exponent");
    radial_cmd->add_option("--nodes", nodes, "RK4 step count")->capture_default_str();
    radial_cmd->add_option("--tol", rtol, "verdict/bisection tolerance")->capture_default_str();
    radial_cmd->add_option("--out", profile_out, "profile CSV path")->capture_default_str();
    radial_cmd->add_option("--oracle", oracle, "closed-form column: tan or tanh")
        ->check(CLI::IsMember({"tan", "tanh"}));

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "verdict table over parameter ranges");
    std::string K_range = "1", eps_range = "1", R_range = "1", theta_range = "1",
                sweep_out, sweep_family = "signed_power";
    double sweep_tol = 1e-9;
    sweep_cmd->add_option("--K", K_range, "range start:stop:count or value")->capture_default_str();
    sweep_cmd->add_option("--eps", eps_range, "range")->capture_default_str();
    sweep_cmd->add_option("--R", R_range, "range")->capture_default_str();
    sweep_cmd->add_option("--theta", theta_range, "range")->capture_default_str();
    sweep_cmd->add_option("--family", sweep_family, "nonlinearity family")->capture_default_str();
    sweep_cmd->add_option("--tol", sweep_tol, "verdict tolerance")->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "CSV output path (default stdout)");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "run estimate checks on a solve");
    std::string vspec, vfield, vspec2, vfield2, vout = ".", checks_text = "decay,l1";
    verify_cmd->add_option("--spec", vspec, "problem spec JSON path")->required();
    verify_cmd->add_option("--field", vfield, "field CSV (skips the solve)");
    verify_cmd->add_option("--spec2", vspec2, "second spec for the comparison check");
    verify_cmd->add_option("--field2", vfield2, "second field CSV");
    verify_cmd->add_option("--checks", checks_text, "comma list: decay,l1,comparison,nonexistence")
        ->capture_default_str();
    verify_cmd->add_option("--out", vout, "output directory")->capture_default_str();
    add_config_flags(verify_cmd);

    // inspect
    auto* inspect_cmd = app.add_subcommand("inspect", "print h, H, phi and the blow-up integral");
    std::string ifamily = "signed_power";
    double itheta_val = 0.0, iK = 1.0, ieps = 1.0, ismin = 0.0, ismax = 10.0, itol = 1e-10;
    int icount = 21;
    inspect_cmd->add_option("--family", ifamily, "nonlinearity family")->capture_default_str();
    auto* itheta_flag = inspect_cmd->add_option("--theta", itheta_val, "family exponent");
    inspect_cmd->add_option("--K", iK, "blow-up integral drift factor")->capture_default_str();
    inspect_cmd->add_option("--eps", ieps, "blow-up integral source scale")->capture_default_str();
    inspect_cmd->add_option("--smin", ismin, "sample range start")->capture_default_str();
    inspect_cmd->add_option("--smax", ismax, "sample range stop")->capture_default_str();
    inspect_cmd->add_option("--count", icount, "sample count")->capture_default_str();
    inspect_cmd->add_option("--tol", itol, "quadrature tolerance")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) {
            parse_ladder();
            if (theta_flag->count() > 0) theta_opt = theta_val;
            return run_solve(spec_path, out_dir, fixed_point, theta_opt, cfg);
        }
        if (radial_cmd->parsed()) {
            std::optional<double> th;
            if (rtheta_flag->count() > 0) th = theta_radial;
            return run_radial(K, eps, R, N, family, th, nodes, rtol, profile_out, oracle);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep(sweep_family, parse_range(K_range), parse_range(eps_range),
                             parse_range(R_range), parse_range(theta_range), sweep_tol, sweep_out);
        }
        if (verify_cmd->parsed()) {
            parse_ladder();
            std::vector<std::string> checks;
            std::istringstream is(checks_text);
            std::string tok;
            while (std::getline(is, tok, ',')) {
                if (!tok.empty()) checks.push_back(tok);
            }
            return run_verify(vspec, vfield, vspec2, vfield2, std::move(checks), vout, cfg);
        }
        if (inspect_cmd->parsed()) {
            std::optional<double> th;
            if (itheta_flag->count() > 0) th = itheta_val;
            return run_inspect(ifamily, th, iK, ieps, ismin, ismax, icount, itol);
        }
    } catch (const IndeterminateTail& e) {
        std::cerr << "indeterminate tail: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
