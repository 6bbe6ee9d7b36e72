// Python bindings: catalog access, single solves, functional evaluation,
// matrix-free residuals, convergence studies, the condition-number table,
// and mesh summaries.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hpsem/study.hpp"

namespace py = pybind11;
using namespace hpsem;

namespace {

py::dict row_dict(const StudyRow& r) {
    py::dict d;
    d["param"] = r.param;
    d["dof"] = r.dof;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["rel_error_percent"] = r.rel_error;
    d["functional_final"] = r.functional_final;
    d["wall_time"] = r.wall_time;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Nonconforming least-squares h-p spectral element method for 3D "
        "elliptic problems with vertex/edge singularities";

    m.def("catalog_names", &catalog_names, "Names of the model-problem catalog");

    m.def(
        "mesh_summary",
        [](const std::string& problem, int W, int n) {
            EllipticProblem p = catalog(problem);
            return mesh_summary_csv(problem_mesh(p, W, n));
        },
        py::arg("problem"), py::arg("W"), py::arg("n"),
        "Element table (id, frame, kind, bounds, degrees, adjacency) as CSV");

    m.def(
        "mesh_dof",
        [](const std::string& problem, int W, int n) {
            EllipticProblem p = catalog(problem);
            return mesh_dof(problem_mesh(p, W, n));
        },
        py::arg("problem"), py::arg("W"), py::arg("n"),
        "Total unknown count of the study mesh");

    m.def(
        "functional_value",
        [](const std::string& problem, int W, int n, const std::vector<double>& U) {
            EllipticProblem p = catalog(problem);
            Mesh mesh = problem_mesh(p, W, n);
            FunctionalValue v = functional_value(p, mesh, U);
            py::dict d;
            d["total"] = v.total;
            d["pde_residual"] = v.pde_residual;
            d["interior_jumps"] = v.interior_jumps;
            d["dirichlet_terms"] = v.dirichlet_terms;
            d["neumann_terms"] = v.neumann_terms;
            return d;
        },
        py::arg("problem"), py::arg("W"), py::arg("n"), py::arg("U"),
        "Least-squares functional value and its term breakdown at U");

    m.def(
        "normal_residual",
        [](const std::string& problem, int W, int n, const std::vector<double>& U) {
            EllipticProblem p = catalog(problem);
            Mesh mesh = problem_mesh(p, W, n);
            return normal_residual(p, mesh, U);
        },
        py::arg("problem"), py::arg("W"), py::arg("n"), py::arg("U"),
        "Matrix-free normal-equation residual X U - YG (half-gradient)");

    m.def(
        "solve",
        [](const std::string& problem, int W, int n, double tol, int max_iter) {
            EllipticProblem p = catalog(problem);
            Mesh mesh = problem_mesh(p, W, n);
            Assembly assembly(p, mesh);
            SeparablePrecond precond(mesh, assembly.layout());
            auto [U, rep] = solve_least_squares(assembly, precond, tol, max_iter);
            py::dict d;
            d["solution"] = U;
            d["dof"] = rep.dof;
            d["iterations"] = rep.iterations;
            d["converged"] = rep.residual_history.back() <=
                             tol * rep.residual_history.front();
            d["functional_final"] = rep.functional_final;
            d["residual_history"] = rep.residual_history;
            d["wall_time"] = rep.wall_time;
            if (p.has_exact && p.u_ex)
                d["rel_error_percent"] =
                    h1_relative_error(p, mesh, assembly.layout(), U);
            return d;
        },
        py::arg("problem"), py::arg("W"), py::arg("n"), py::arg("tol") = 1e-8,
        py::arg("max_iter") = 5000,
        "PCG-minimize the least-squares functional on the study mesh");

    m.def("condition_number_study", &condition_number_study, py::arg("W"),
          "Preconditioned condition number of the degree-W model form");

    m.def(
        "run_study",
        [](const std::string& config_text) {
            std::istringstream in(config_text);
            StudyConfig cfg = parse_study_config(in);
            auto rows = run_study(cfg);
            py::list out;
            for (const StudyRow& r : rows) out.append(row_dict(r));
            return py::make_tuple(out, study_csv(rows));
        },
        py::arg("config_text"),
        "Run a sweep from config text; returns (rows, csv)");
}
