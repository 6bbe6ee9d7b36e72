#include "hpsem/study.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hpsem {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& v, int line) {
    std::vector<int> out;
    std::string piece;
    std::istringstream ss(v);
    while (std::getline(ss, piece, ',')) {
        piece = trim(piece);
        if (piece.empty()) continue;
        size_t pos = 0;
        int x = std::stoi(piece, &pos);
        if (pos != piece.size() || x < 1)
            throw std::runtime_error("config line " + std::to_string(line) +
                                     ": bad sweep point '" + piece + "'");
        out.push_back(x);
    }
    return out;
}

double parse_double(const std::string& v, int line) {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size())
        throw std::runtime_error("config line " + std::to_string(line) +
                                 ": bad number '" + v + "'");
    return x;
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_display(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6E", x);
    return buf;
}

}  // namespace

StudyConfig parse_study_config(std::istream& in) {
    StudyConfig c;
    std::string raw;
    int line = 0;
    bool have_points = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        size_t hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line) +
                                     ": expected key = value");
        std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
        if (key == "problem") {
            c.problem = val;
        } else if (key == "sweep") {
            if (val == "p")
                c.sweep = SweepKind::P;
            else if (val == "h")
                c.sweep = SweepKind::H;
            else if (val == "hp")
                c.sweep = SweepKind::HP;
            else
                throw std::runtime_error("config line " + std::to_string(line) +
                                         ": sweep must be p, h, or hp");
        } else if (key == "points") {
            c.points = parse_int_list(val, line);
            have_points = true;
        } else if (key == "hp_ratio") {
            c.hp_ratio = parse_double(val, line);
        } else if (key == "n") {
            c.fixed_n = (int)parse_double(val, line);
        } else if (key == "w") {
            c.fixed_w = (int)parse_double(val, line);
        } else if (key == "mu_v") {
            c.mu_v = parse_double(val, line);
        } else if (key == "mu_e") {
            c.mu_e = parse_double(val, line);
        } else if (key == "mu1") {
            c.mu1 = parse_double(val, line);
        } else if (key == "mu2") {
            c.mu2 = parse_double(val, line);
        } else if (key == "tol") {
            c.tol = parse_double(val, line);
        } else if (key == "max_iter") {
            c.max_iter = (int)parse_double(val, line);
        } else if (key == "out") {
            c.out_dir = val;
        } else {
            throw std::runtime_error("config line " + std::to_string(line) +
                                     ": unknown key '" + key + "'");
        }
    }
    if (c.problem.empty()) throw std::runtime_error("config: missing problem name");
    if (!have_points || c.points.empty())
        throw std::runtime_error("config: empty sweep point list");
    if (!(c.tol > 0.0)) throw std::runtime_error("config: tol must be > 0");
    if (c.max_iter < 1) throw std::runtime_error("config: max_iter must be >= 1");
    if (c.hp_ratio <= 0.0) throw std::runtime_error("config: hp_ratio must be > 0");
    return c;
}

StudyConfig parse_study_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    return parse_study_config(in);
}

std::vector<StudyRow> run_study(const StudyConfig& config) {
    EllipticProblem prob = catalog(config.problem);  // throws on unknown name
    if (config.mu_v) prob.mesh.mu_v = *config.mu_v;
    if (config.mu_e) prob.mesh.mu_e = *config.mu_e;
    if (config.mu1) prob.mesh.mu1 = *config.mu1;
    if (config.mu2) prob.mesh.mu2 = *config.mu2;

    std::vector<StudyRow> rows;
    for (int point : config.points) {
        int W = 0, n = 0;
        switch (config.sweep) {
            case SweepKind::P: W = point, n = config.fixed_n; break;
            case SweepKind::H: W = config.fixed_w, n = point; break;
            case SweepKind::HP:
                n = point;
                W = std::max(1, (int)std::lround(config.hp_ratio * point));
                break;
        }
        Mesh mesh = problem_mesh(prob, W, n);
        Assembly assembly(prob, mesh);
        SeparablePrecond precond(mesh, assembly.layout());
        auto [U, rep] = solve_least_squares(assembly, precond, config.tol,
                                            config.max_iter);
        StudyRow row;
        row.param = point;
        row.dof = rep.dof;
        row.iterations = rep.iterations;
        row.converged = rep.residual_history.back() <=
                        config.tol * rep.residual_history.front();
        if (prob.has_exact && prob.u_ex)
            row.rel_error = h1_relative_error(prob, mesh, assembly.layout(), U);
        row.functional_final = rep.functional_final;
        row.wall_time = rep.wall_time;
        rows.push_back(row);
    }
    return rows;
}

std::string study_csv(const std::vector<StudyRow>& rows) {
    std::string out =
        "param,dof,iterations,converged,rel_error_percent,functional_final,"
        "wall_time,rel_error_display\n";
    for (const StudyRow& r : rows) {
        out += std::to_string(r.param) + ',' + std::to_string(r.dof) + ',' +
               std::to_string(r.iterations) + ',' + (r.converged ? "1" : "0") + ',' +
               fmt(r.rel_error) + ',' + fmt(r.functional_final) + ',' +
               fmt(r.wall_time) + ',' + fmt_display(r.rel_error) + '\n';
    }
    return out;
}

LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    LinFit f;
    f.n = (int)xs.size();
    if (xs.size() != ys.size()) throw std::invalid_argument("linear_fit: size mismatch");
    if (f.n < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += xs[i], sy += ys[i];
        sxx += xs[i] * xs[i], sxy += xs[i] * ys[i];
    }
    const double det = f.n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("linear_fit: degenerate abscissa");
    f.slope = (f.n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / f.n;
    if (f.n >= 3) {
        double sse = 0, sst = 0, ym = sy / f.n;
        for (int i = 0; i < f.n; ++i) {
            double e = ys[i] - (f.slope * xs[i] + f.intercept);
            sse += e * e;
            sst += (ys[i] - ym) * (ys[i] - ym);
        }
        f.r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
    }
    return f;
}

PlotData emit_plot_data(Frame frame, const std::vector<StudyRow>& rows) {
    PlotData pd;
    switch (frame) {
        case Frame::Regular: pd.dof_exponent_q = 3; break;
        case Frame::Vertex:
        case Frame::Edge: pd.dof_exponent_q = 4; break;
        case Frame::VertexEdge: pd.dof_exponent_q = 5; break;
    }
    std::vector<double> ps, ds, ls;
    for (const StudyRow& r : rows) {
        if (!(r.rel_error > 0.0)) continue;
        ps.push_back((double)r.param);
        ds.push_back(std::pow((double)r.dof, 1.0 / pd.dof_exponent_q));
        ls.push_back(std::log10(r.rel_error));
    }
    auto emit = [&](const std::vector<double>& xs, const char* label) {
        std::string out = std::string("# ") + label + " log10_rel_error\n";
        for (size_t i = 0; i < xs.size(); ++i)
            out += fmt(xs[i]) + ' ' + fmt(ls[i]) + '\n';
        if (xs.size() >= 2) {
            LinFit f = linear_fit(xs, ls);
            out += "# fit slope=" + fmt(f.slope) + " r2=" + fmt(f.r2) + '\n';
        }
        return out;
    };
    pd.param_file = emit(ps, "param");
    std::string label = "dof^(1/" + std::to_string(pd.dof_exponent_q) + ")";
    pd.dof_file = emit(ds, label.c_str());
    return pd;
}

}  // namespace hpsem
