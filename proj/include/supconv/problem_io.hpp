#pragma once

// JSON ingestion of ProblemSpec documents and JSON emission of SolveReport
// and check results. Coefficient blocks accept a constant, an inline value
// table, or a CSV reference; two generators cover the radial-derived
// configurations (inward drift, center Dirac load).

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "supconv/mesh.hpp"
#include "supconv/solver.hpp"
#include "supconv/verify.hpp"

namespace supconv {

namespace detail {

inline MatrixField matrix_from_json(const Grid& grid, const nlohmann::json& j,
                                    const std::string& base_dir) {
    const std::string type = j.value("type", "identity");
    if (type == "csv") {
        const std::string path = base_dir + j.at("path").get<std::string>();
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("matrix csv: cannot open " + path);
        return read_matrix_field_csv(grid, in);
    }
    if (type == "identity") {
        return MatrixField::identity(grid, j.value("scale", 1.0));
    }
    if (type == "constant") {
        if (grid.dim() == 1) {
            const double v = j.at("value").get<double>();
            return MatrixField::from_function(grid, [v](double) { return v; });
        }
        const std::array<double, 3> m{j.at("mxx").get<double>(), j.value("mxy", 0.0),
                                      j.at("myy").get<double>()};
        return MatrixField::from_function(grid, [m](double, double) { return m; });
    }
    if (type == "table") {
        if (grid.dim() == 1) {
            const auto v = j.at("values").get<std::vector<double>>();
            if (static_cast<int>(v.size()) != grid.cells_x()) {
                throw std::invalid_argument("matrix table: need one value per cell");
            }
            return MatrixField::from_function(grid, [&](double x) {
                int c = static_cast<int>((x - grid.ax()) / grid.hx());
                return v[std::clamp(c, 0, grid.cells_x() - 1)];
            });
        }
        const auto mxx = j.at("mxx").get<std::vector<double>>();
        const auto myy = j.at("myy").get<std::vector<double>>();
        std::vector<double> mxy(mxx.size(), 0.0);
        if (j.contains("mxy")) mxy = j.at("mxy").get<std::vector<double>>();
        const int ncell = grid.cells_x() * grid.cells_y();
        if (static_cast<int>(mxx.size()) != ncell || static_cast<int>(myy.size()) != ncell ||
            static_cast<int>(mxy.size()) != ncell) {
            throw std::invalid_argument("matrix table: need one entry per cell");
        }
        return MatrixField::from_function(grid, [&](double x, double y) {
            int ci = std::clamp(static_cast<int>((x - grid.ax()) / grid.hx()), 0,
                                grid.cells_x() - 1);
            int cj = std::clamp(static_cast<int>((y - grid.ay()) / grid.hy()), 0,
                                grid.cells_y() - 1);
            const int c = cj * grid.cells_x() + ci;
            return std::array<double, 3>{mxx[c], mxy[c], myy[c]};
        });
    }
    throw std::invalid_argument("matrix block: unknown type '" + type + "'");
}

inline VectorField vector_from_json(const Grid& grid, const nlohmann::json& j,
                                    const std::string& base_dir) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "csv") {
        const std::string path = base_dir + j.at("path").get<std::string>();
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("E csv: cannot open " + path);
        return read_vector_field_csv(grid, in);
    }
    if (type == "constant") {
        const auto v = j.at("value").get<std::vector<double>>();
        if (static_cast<int>(v.size()) != grid.dim()) {
            throw std::invalid_argument("E constant: need one component per dimension");
        }
        return VectorField::constant(grid, v[0], grid.dim() == 2 ? v[1] : 0.0);
    }
    if (type == "inward") {
        const double K = j.at("K").get<double>();
        if (grid.dim() == 1) {
            const double xc = 0.5 * (grid.ax() + grid.bx());
            return VectorField::from_function(grid, [K, xc](double x) {
                return x > xc ? -K : (x < xc ? K : 0.0);
            });
        }
        const double xc = 0.5 * (grid.ax() + grid.bx());
        const double yc = 0.5 * (grid.ay() + grid.by());
        auto fx = [K, xc, yc](double x, double y) {
            const double d = std::hypot(x - xc, y - yc);
            return d == 0.0 ? 0.0 : -K * (x - xc) / d;
        };
        auto fy = [K, xc, yc](double x, double y) {
            const double d = std::hypot(x - xc, y - yc);
            return d == 0.0 ? 0.0 : -K * (y - yc) / d;
        };
        return VectorField::from_function(grid, fx, fy);
    }
    if (type == "table") {
        VectorField out(grid);
        const auto ex = j.at("ex").get<std::vector<double>>();
        if (grid.dim() == 1) {
            if (static_cast<int>(ex.size()) != grid.cells_x()) {
                throw std::invalid_argument("E table: need one ex value per edge");
            }
            for (int i = 0; i < grid.cells_x(); ++i) out.x_edge(i) = ex[i];
            return out;
        }
        const auto ey = j.at("ey").get<std::vector<double>>();
        if (static_cast<int>(ex.size()) != grid.cells_x() * (grid.cells_y() + 1) ||
            static_cast<int>(ey.size()) != (grid.cells_x() + 1) * grid.cells_y()) {
            throw std::invalid_argument("E table: edge array sizes mismatch");
        }
        int k = 0;
        for (int j2 = 0; j2 <= grid.cells_y(); ++j2)
            for (int i = 0; i < grid.cells_x(); ++i) out.x_edge(i, j2) = ex[k++];
        k = 0;
        for (int j2 = 0; j2 < grid.cells_y(); ++j2)
            for (int i = 0; i <= grid.cells_x(); ++i) out.y_edge(i, j2) = ey[k++];
        return out;
    }
    throw std::invalid_argument("E block: unknown type '" + type + "'");
}

inline ScalarField scalar_from_json(const Grid& grid, const nlohmann::json& j,
                                    const std::string& base_dir) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") {
        const double v = j.at("value").get<double>();
        ScalarField out(grid);
        for (int k = 0; k < out.size(); ++k) out[k] = v;
        return out;
    }
    if (type == "table") {
        const auto v = j.at("values").get<std::vector<double>>();
        if (static_cast<int>(v.size()) != grid.interior_count()) {
            throw std::invalid_argument("f table: need one value per interior node");
        }
        ScalarField out(grid);
        for (int k = 0; k < out.size(); ++k) out[k] = v[k];
        return out;
    }
    if (type == "center_dirac") {
        // point load of total weight w on the interior node nearest to the
        // domain center, entered as the density w / h^d
        const double w = j.at("weight").get<double>();
        ScalarField out(grid);
        if (grid.dim() == 1) {
            const double xc = 0.5 * (grid.ax() + grid.bx());
            int best = 1;
            for (int i = 2; i < grid.cells_x(); ++i) {
                if (std::abs(grid.x_node(i) - xc) < std::abs(grid.x_node(best) - xc)) best = i;
            }
            out[grid.interior_index(best)] = w / grid.cell_measure();
        } else {
            const double xc = 0.5 * (grid.ax() + grid.bx());
            const double yc = 0.5 * (grid.ay() + grid.by());
            const int bi = std::clamp(static_cast<int>(std::lround((xc - grid.ax()) / grid.hx())),
                                      1, grid.cells_x() - 1);
            const int bj = std::clamp(static_cast<int>(std::lround((yc - grid.ay()) / grid.hy())),
                                      1, grid.cells_y() - 1);
            out[grid.interior_index(bi, bj)] = w / grid.cell_measure();
        }
        return out;
    }
    if (type == "csv") {
        const std::string path = base_dir + j.at("path").get<std::string>();
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("f csv: cannot open " + path);
        return read_field_csv(grid, in);
    }
    throw std::invalid_argument("f block: unknown type '" + type + "'");
}

} // namespace detail

/// Builds a ProblemSpec from its JSON document. `base_dir` resolves CSV
/// references relative to the document location.
inline ProblemSpec problem_from_json(const nlohmann::json& j, const std::string& base_dir = "") {
    const Grid grid = j.at("grid").get<Grid>();
    MatrixField M =
        detail::matrix_from_json(grid, j.value("matrix", nlohmann::json::object()), base_dir);
    VectorField E = detail::vector_from_json(grid, j.at("E"), base_dir);
    ScalarField f = detail::scalar_from_json(grid, j.at("f"), base_dir);
    NonlinearitySpec h = j.at("nonlinearity").get<NonlinearitySpec>();
    ProblemSpec p(grid, std::move(M), std::move(E), std::move(f), j.value("mu", 0.0),
                  std::move(h), j.value("analysis_n", 3), j.value("m", 1.2), j.value("r", 6.0));
    if (j.contains("sobolev_constant")) {
        p.sobolev_override = j.at("sobolev_constant").get<double>();
    }
    return p;
}

inline ProblemSpec load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open problem spec: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    std::string dir;
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash + 1);
    return problem_from_json(j, dir);
}

inline nlohmann::json to_json(const SmallnessCertificate& c) {
    nlohmann::json j{{"theta", c.theta},
                     {"m_doublestar", c.m_dstar},
                     {"sobolev", c.sobolev_used},
                     {"alpha", c.alpha_used},
                     {"norm_E_r", c.norm_E_r},
                     {"norm_f_m", c.norm_f_m},
                     {"delta", c.delta},
                     {"K", c.K},
                     {"satisfied", c.satisfied},
                     {"product_lhs", c.product_lhs},
                     {"product_rhs", c.product_rhs},
                     {"discrete_norms", true}};
    if (c.rstar_infinite) {
        j["rstar"] = "infinite";
    } else {
        j["rstar"] = c.rstar;
        j["K_delta"] = c.K_delta;
    }
    return j;
}

inline nlohmann::json to_json(const SolveReport& rep) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lvl : rep.levels) {
        nlohmann::json iters = nlohmann::json::array();
        for (const auto& it : lvl.iterations) {
            iters.push_back({{"diff_rel", it.diff_rel}, {"norm_l2", it.norm_l2},
                             {"omega", it.omega}});
        }
        nlohmann::json lj{{"converged", lvl.converged},
                          {"cap_exceeded", lvl.cap_exceeded},
                          {"iterations", iters}};
        if (std::isfinite(lvl.level)) lj["level"] = lvl.level;
        levels.push_back(lj);
    }
    nlohmann::json j{{"verdict", to_string(rep.verdict)},
                     {"grid", rep.field.grid()},
                     {"levels", levels},
                     {"truncation_levels", rep.truncation_levels},
                     {"analysis_n", rep.analysis_n},
                     {"sobolev", rep.sobolev_used},
                     {"alpha", rep.alpha_used},
                     {"note", rep.note}};
    if (rep.certificate) {
        j["certificate"] = to_json(*rep.certificate);
        j["iterate_norms_mstar"] = rep.iterate_norms_mstar;
        j["ball_violation"] = rep.ball_violation;
        j["worst_iterate_norm"] = rep.worst_iterate_norm;
    }
    return j;
}

inline nlohmann::json to_json(const DecayReport& rep) {
    return nlohmann::json{{"check", "decay"},
                          {"pass", rep.pass},
                          {"k", rep.k},
                          {"measured", rep.measured},
                          {"bound", rep.bound},
                          {"C_used", rep.C_used},
                          {"C1", rep.C1_infinite ? nlohmann::json("infinite")
                                                 : nlohmann::json(rep.C1)},
                          {"data_integral", rep.data_integral},
                          {"worst_ratio", rep.worst_ratio},
                          {"empirical_C", rep.empirical_C},
                          {"sobolev", rep.sobolev_used},
                          {"alpha", rep.alpha_used}};
}

inline nlohmann::json to_json(const NonexistenceReport& rep) {
    return nlohmann::json{{"check", "nonexistence_necessary"},
                          {"holds", rep.holds},
                          {"lhs", rep.lhs},
                          {"bound", rep.bound},
                          {"C_used", rep.C_used}};
}

} // namespace supconv
