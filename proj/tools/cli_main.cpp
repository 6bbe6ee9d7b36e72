// Command-line driver: single solves, batch convergence studies, the
// preconditioner condition-number table, and mesh inspection.
//
// Exit codes: 0 full success, 2 when any solve failed to converge within
// max_iter, 1 on configuration errors.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "hpsem/study.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNotConverged = 2;

struct CommonFlags {
    std::string config;
    std::string out_dir;
    double tol = -1.0;      // < 0: keep the config value
    int max_iter = -1;      // < 0: keep the config value
};

void add_common(CLI::App* cmd, CommonFlags& fl, bool need_config) {
    auto* c = cmd->add_option("--config", fl.config, "study config file (key = value)");
    if (need_config) c->required();
    cmd->add_option("--tol", fl.tol, "relative PCG tolerance override");
    cmd->add_option("--max-iter", fl.max_iter, "PCG iteration cap override");
    cmd->add_option("--out", fl.out_dir, "output directory");
}

hpsem::StudyConfig load_config(const CommonFlags& fl) {
    hpsem::StudyConfig cfg = hpsem::parse_study_config_file(fl.config);
    if (fl.tol > 0.0) cfg.tol = fl.tol;
    if (fl.max_iter > 0) cfg.max_iter = fl.max_iter;
    if (!fl.out_dir.empty()) cfg.out_dir = fl.out_dir;
    return cfg;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name);
    if (!out) throw std::runtime_error("cannot write " + dir + "/" + name);
    out << content;
}

int run_solve(const CommonFlags& fl) {
    hpsem::StudyConfig cfg = load_config(fl);
    if (cfg.points.size() != 1)
        throw std::runtime_error("solve expects exactly one sweep point (got " +
                                 std::to_string(cfg.points.size()) + ")");
    auto rows = hpsem::run_study(cfg);
    const hpsem::StudyRow& r = rows.front();
    std::printf("problem        %s\n", cfg.problem.c_str());
    std::printf("dof            %d\n", r.dof);
    std::printf("iterations     %d\n", r.iterations);
    std::printf("converged      %s\n", r.converged ? "yes" : "no");
    std::printf("functional     %.17g\n", r.functional_final);
    if (r.rel_error >= 0.0) std::printf("rel_error_pct  %.17g\n", r.rel_error);
    std::printf("wall_time_s    %.3f\n", r.wall_time);
    if (!cfg.out_dir.empty()) write_file(cfg.out_dir, "solve.csv", hpsem::study_csv(rows));
    return r.converged ? kExitOk : kExitNotConverged;
}

int run_study_cmd(const CommonFlags& fl) {
    hpsem::StudyConfig cfg = load_config(fl);
    auto rows = hpsem::run_study(cfg);
    std::string csv = hpsem::study_csv(rows);
    std::fputs(csv.c_str(), stdout);
    if (!cfg.out_dir.empty()) {
        hpsem::Frame frame = hpsem::problem_frame(hpsem::catalog(cfg.problem));
        hpsem::PlotData pd = hpsem::emit_plot_data(frame, rows);
        write_file(cfg.out_dir, "study.csv", csv);
        write_file(cfg.out_dir, "plot_param.dat", pd.param_file);
        write_file(cfg.out_dir, "plot_dof.dat", pd.dof_file);
    }
    for (const hpsem::StudyRow& r : rows)
        if (!r.converged) return kExitNotConverged;
    return kExitOk;
}

int run_condition_study(const CommonFlags& fl) {
    std::string csv = "W,kappa\n";
    for (int W = 2; W <= 16; W += 2) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", W,
                      hpsem::condition_number_study(W));
        csv += buf;
    }
    std::fputs(csv.c_str(), stdout);
    if (!fl.out_dir.empty()) write_file(fl.out_dir, "condition.csv", csv);
    return kExitOk;
}

int run_mesh_dump(const CommonFlags& fl) {
    hpsem::StudyConfig cfg = load_config(fl);
    hpsem::EllipticProblem prob = hpsem::catalog(cfg.problem);
    if (cfg.mu_v) prob.mesh.mu_v = *cfg.mu_v;
    if (cfg.mu_e) prob.mesh.mu_e = *cfg.mu_e;
    int W = cfg.points.front();
    int n = cfg.sweep == hpsem::SweepKind::P ? cfg.fixed_n : cfg.points.front();
    if (cfg.sweep == hpsem::SweepKind::H) W = cfg.fixed_w;
    hpsem::Mesh mesh = hpsem::problem_mesh(prob, W, n);
    std::string csv = hpsem::mesh_summary_csv(mesh);
    std::fputs(csv.c_str(), stdout);
    if (!cfg.out_dir.empty()) write_file(cfg.out_dir, "mesh.csv", csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonconforming least-squares h-p spectral element solver"};
    app.require_subcommand(1);

    CommonFlags fl_solve, fl_study, fl_cond, fl_mesh;
    CLI::App* solve = app.add_subcommand("solve", "solve one configured problem");
    add_common(solve, fl_solve, true);
    CLI::App* study = app.add_subcommand("study", "run a convergence sweep");
    add_common(study, fl_study, true);
    CLI::App* cond =
        app.add_subcommand("condition-study", "preconditioned condition numbers");
    add_common(cond, fl_cond, false);
    CLI::App* mesh = app.add_subcommand("mesh-dump", "print the element table");
    add_common(mesh, fl_mesh, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (solve->parsed()) return run_solve(fl_solve);
        if (study->parsed()) return run_study_cmd(fl_study);
        if (cond->parsed()) return run_condition_study(fl_cond);
        return run_mesh_dump(fl_mesh);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}
