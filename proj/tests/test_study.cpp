#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hpsem/study.hpp"

using namespace hpsem;

TEST_CASE("config parsing: full example, defaults, comments") {
    std::istringstream in(
        "# poisson study\n"
        "problem = poisson-homogeneous\n"
        "sweep = p\n"
        "points = 1, 3\n"
        "n = 2\n"
        "tol = 1e-9   # solver tolerance\n"
        "max_iter = 400\n"
        "out = results\n");
    StudyConfig c = parse_study_config(in);
    CHECK(c.problem == "poisson-homogeneous");
    CHECK(c.sweep == SweepKind::P);
    CHECK(c.points == std::vector<int>{1, 3});
    CHECK(c.fixed_n == 2);
    CHECK(c.tol == doctest::Approx(1e-9));
    CHECK(c.max_iter == 400);
    CHECK(c.out_dir == "results");
    CHECK(!c.mu_v.has_value());

    std::istringstream minimal("problem = x\npoints = 2\n");
    StudyConfig d = parse_study_config(minimal);
    CHECK(d.sweep == SweepKind::P);
    CHECK(d.tol == doctest::Approx(1e-8));
    CHECK(d.max_iter == 5000);
}

TEST_CASE("config parsing rejects malformed input") {
    auto parse = [](const char* text) {
        std::istringstream in(text);
        return parse_study_config(in);
    };
    CHECK_THROWS(parse("points = 2\n"));                      // missing problem
    CHECK_THROWS(parse("problem =\npoints = 2\n"));           // empty problem
    CHECK_THROWS(parse("problem = x\n"));                     // no points
    CHECK_THROWS(parse("problem = x\npoints =\n"));           // empty points
    CHECK_THROWS(parse("problem = x\npoints = 0\n"));         // point < 1
    CHECK_THROWS(parse("problem = x\npoints = 2\nsweep = q\n"));
    CHECK_THROWS(parse("problem = x\npoints = 2\ntol = -1\n"));
    CHECK_THROWS(parse("problem = x\npoints = 2\nbogus = 1\n"));
    CHECK_THROWS(parse("problem = x\npoints = 2\nno equals sign\n"));
    CHECK_THROWS(parse_study_config_file("/nonexistent/config"));
}

TEST_CASE("p-sweep reproduces the regular-study DOF column and is deterministic") {
    StudyConfig c;
    c.problem = "poisson-homogeneous";
    c.sweep = SweepKind::P;
    c.points = {1, 3};
    c.fixed_n = 2;
    auto rows = run_study(c);
    REQUIRE(rows.size() == 2);
    // 2x2x2 mesh at degrees 1 and 3: the reference table's 64 / 512 DOF
    CHECK(rows[0].dof == 64);
    CHECK(rows[1].dof == 512);
    for (const StudyRow& r : rows) {
        CHECK(r.converged);
        CHECK(r.iterations > 0);
        CHECK(r.rel_error > 0.0);
        CHECK(r.functional_final >= 0.0);
        CHECK(r.wall_time > 0.0);
    }
    CHECK(rows[1].rel_error < rows[0].rel_error);

    // byte-identical CSV modulo the wall-time column
    auto strip_time = [](std::string csv) {
        std::string out;
        std::istringstream ss(csv);
        std::string line;
        while (std::getline(ss, line)) {
            size_t c1 = 0;
            for (int k = 0; k < 6; ++k) c1 = line.find(',', c1) + 1;
            size_t c2 = line.find(',', c1);
            out += line.substr(0, c1) + line.substr(c2 + 1) + '\n';
        }
        return out;
    };
    CHECK(strip_time(study_csv(rows)) == strip_time(study_csv(run_study(c))));

    std::string csv = study_csv(rows);
    CHECK(csv.rfind("param,dof,iterations,converged,rel_error_percent,", 0) == 0);
    CHECK(csv.find("E+") != std::string::npos);  // display column present
}

TEST_CASE("h-sweep refines the mesh at fixed degree and reduces the error") {
    StudyConfig c;
    c.problem = "laplace-dirichlet-cube";
    c.sweep = SweepKind::H;
    c.points = {1, 2};
    c.fixed_w = 2;
    auto rows = run_study(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].dof == 27);
    CHECK(rows[1].dof == 216);
    CHECK(rows[1].rel_error < rows[0].rel_error);
}

TEST_CASE("hp-sweep couples the degree to the layer count") {
    StudyConfig c;
    c.problem = "vertex-dirichlet";
    c.sweep = SweepKind::HP;
    c.points = {1, 2};
    c.max_iter = 3000;
    auto rows = run_study(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].dof > rows[0].dof);
    CHECK(rows[1].rel_error < rows[0].rel_error);
    CHECK_THROWS(run_study([] {
        StudyConfig bad;
        bad.problem = "no-such-problem";
        bad.points = {2};
        return bad;
    }()));
}

TEST_CASE("linear fit recovers exact lines and flags scatter") {
    LinFit f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
    LinFit g = linear_fit({1, 2, 3, 4}, {0, 1, 0, 1});
    CHECK(g.r2 < 0.6);
    CHECK(linear_fit({1}, {1}).n == 1);
    CHECK_THROWS(linear_fit({1, 1}, {0, 1}));  // degenerate abscissa
    CHECK_THROWS(linear_fit({1, 2}, {0}));
}

TEST_CASE("plot data: exponents by region, fit comment, single point") {
    std::vector<StudyRow> rows(3);
    for (int i = 0; i < 3; ++i) {
        rows[i].param = i + 1;
        rows[i].dof = 100 * (i + 1);
        rows[i].rel_error = std::pow(10.0, -i);
    }
    PlotData reg = emit_plot_data(Frame::Regular, rows);
    CHECK(reg.dof_exponent_q == 3);
    CHECK(emit_plot_data(Frame::Vertex, rows).dof_exponent_q == 4);
    CHECK(emit_plot_data(Frame::Edge, rows).dof_exponent_q == 4);
    CHECK(emit_plot_data(Frame::VertexEdge, rows).dof_exponent_q == 5);
    // param file: exact line of slope -1 through log10 errors {0,-1,-2}
    CHECK(reg.param_file.find("# fit slope=-1 ") != std::string::npos);
    CHECK(reg.dof_file.find("# fit slope=") != std::string::npos);

    PlotData single = emit_plot_data(Frame::Regular, {rows[0]});
    CHECK(single.param_file.find("# fit") == std::string::npos);

    // rows without an exact solution are skipped
    StudyRow blank;
    PlotData none = emit_plot_data(Frame::Regular, {blank});
    CHECK(none.param_file.find("# fit") == std::string::npos);
}
