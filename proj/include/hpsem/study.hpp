#pragma once
// Convergence-study harness: flat key = value configs, p- / h- / hp-sweeps
// over the problem catalog, stable CSV emission, and plot-ready data files
// with the region-appropriate DOF abscissa.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hpsem/solver.hpp"

namespace hpsem {

enum class SweepKind { P, H, HP };

struct StudyConfig {
    std::string problem;
    SweepKind sweep = SweepKind::P;
    std::vector<int> points;  // degree list (p), refinement list (h), N list (hp)
    double hp_ratio = 1.0;    // hp-sweep: W = max(1, round(hp_ratio * N))
    int fixed_n = 2;          // layers / refinements held fixed in a p-sweep
    int fixed_w = 2;          // degree held fixed in an h-sweep
    // Optional geometric-mesh parameter overrides (defaults live in the
    // catalog entry's MeshSpec).
    std::optional<double> mu_v, mu_e, mu1, mu2;
    double tol = 1e-8;
    int max_iter = 5000;
    std::string out_dir;
};

// Flat "key = value" lines, '#' comments, blank lines ignored. Keys:
// problem, sweep (p|h|hp), points (comma-separated), hp_ratio, n, w,
// mu_v, mu_e, mu1, mu2, tol, max_iter, out. Throws std::runtime_error
// with a line reference on unknown keys, bad values, or a missing /
// empty problem name.
StudyConfig parse_study_config(std::istream& in);
StudyConfig parse_study_config_file(const std::string& path);

struct StudyRow {
    int param = 0;  // the sweep value: W, refinements-per-axis, or N
    int dof = 0;
    int iterations = 0;
    bool converged = false;
    double rel_error = -1.0;  // percent; < 0 when no exact solution
    double functional_final = 0.0;
    double wall_time = 0.0;
};

// One row per sweep point; a non-converged row is recorded and the sweep
// continues. Deterministic except for the wall_time column.
std::vector<StudyRow> run_study(const StudyConfig& config);

// Schema: param,dof,iterations,converged,rel_error_percent,
// functional_final,wall_time,rel_error_display — full %.17g precision
// plus a 6-digit scientific display column.
std::string study_csv(const std::vector<StudyRow>& rows);

// Least-squares line through (x, y); r2 = 1 for n < 3 by convention.
struct LinFit {
    double slope = 0.0, intercept = 0.0, r2 = 1.0;
    int n = 0;
};
LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Two-column plot files over the rows that carry an error: the sweep
// parameter vs log10(error), and DOF^{1/q} vs log10(error) with q = 3 on
// regular domains, 4 near vertices/edges, 5 near vertex-edge corners.
// Each file ends with a "# fit slope=... r2=..." comment when it holds at
// least two points.
struct PlotData {
    std::string param_file;
    std::string dof_file;
    int dof_exponent_q = 3;
};
PlotData emit_plot_data(Frame frame, const std::vector<StudyRow>& rows);

}  // namespace hpsem
