#include <cmath>

#include "doctest.h"
#include "qci/quasimode.hpp"
#include "qci/spectral.hpp"

using namespace qci;

TEST_CASE("sphere decay integral matches -ln cos t to 1e-10 relative") {
    const Profile p = make_sphere();
    const double lambda = 100.0;
    const std::vector<double> grid = default_quasimode_grid(p, lambda);
    const QuasimodeField q = build(p, lambda, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = -std::log(std::cos(grid[i]));
        if (exact > 1e-12) CHECK(std::abs(q.A[i] - exact) / exact < 1e-10);
    }
}

TEST_CASE("peak value is lambda^(1/4) at the equator") {
    const Profile p = make_perturbed_sphere(0.05);
    const double lambda = 64.0;
    const QuasimodeField q = build(p, lambda, default_quasimode_grid(p, lambda));
    std::size_t imax = 0;
    for (std::size_t i = 0; i < q.u_abs.size(); ++i)
        if (q.u_abs[i] > q.u_abs[imax]) imax = i;
    CHECK(q.grid[imax] == doctest::Approx(q.t0).epsilon(1e-10));
    CHECK(q.u_abs[imax] == doctest::Approx(std::pow(lambda, 0.25)).epsilon(1e-12));
    CHECK(q.A[imax] == 0.0);
}

TEST_CASE("sphere point value: u(0.3) = lambda^(1/4) cos(0.3)^lambda") {
    const Profile p = make_sphere();
    const double lambda = 100.0;
    const QuasimodeField q = build(p, lambda, {0.0, 0.3});
    CHECK(q.u_abs[1] ==
          doctest::Approx(std::pow(lambda, 0.25) * std::pow(std::cos(0.3), lambda)).epsilon(1e-9));
}

TEST_CASE("build rejects profiles without the unit cap") {
    CHECK_THROWS_AS(build(make_spheroid(0.2), 100.0, {kPi / 2.0}), ParameterError);
    CHECK_THROWS_AS(build(make_sphere(), 5.0, {0.0}), ParameterError);
}

TEST_CASE("analytic residual on the sphere is exactly h") {
    const Profile p = make_sphere();
    for (double lambda : {50.0, 200.0}) {
        const QuasimodeField q = build(p, lambda, default_quasimode_grid(p, lambda));
        const ResidualReport rep = residual_analytic(p, q);
        CHECK(rep.analytic_sup == doctest::Approx(1.0 / lambda).epsilon(1e-12));
    }
}

TEST_CASE("analytic residual on the perturbed sphere stays below 1.2 h") {
    const Profile p = make_perturbed_sphere(0.05);
    for (double lambda : {50.0, 100.0, 200.0}) {
        const QuasimodeField q = build(p, lambda, default_quasimode_grid(p, lambda));
        const ResidualReport rep = residual_analytic(p, q);
        CHECK(rep.analytic_sup <= 1.2 / lambda);
        CHECK(rep.analytic_sup >= 1.0 / lambda);
    }
}

TEST_CASE("numeric residual agrees with the closed form to 1e-3") {
    for (const Profile& p : {make_sphere(), make_perturbed_sphere(0.05)}) {
        const double lambda = 100.0;
        const QuasimodeField q = build(p, lambda, default_quasimode_grid(p, lambda));
        const ResidualReport rep = residual_numeric(p, q);
        CHECK(rep.agreement < 1e-3);
        CHECK(rep.numeric_sup == doctest::Approx(rep.analytic_sup).epsilon(2e-3));
    }
}

TEST_CASE("numeric residual rejects a grid 10x too coarse") {
    const Profile p = make_sphere();
    const double lambda = 100.0;
    // Spacing 1/lambda instead of 1/(10 lambda).
    std::vector<double> coarse;
    for (int i = -60; i <= 60; ++i) coarse.push_back(i / lambda);
    const QuasimodeField q = build(p, lambda, coarse);
    CHECK_THROWS_AS(residual_numeric(p, q), ResolutionError);
}

TEST_CASE("monotone decay away from the equator") {
    const Profile p = make_perturbed_sphere(0.05);
    const QuasimodeField q = build(p, 120.0, default_quasimode_grid(p, 120.0));
    const std::size_t mid = q.grid.size() / 2;
    for (std::size_t i = mid; i + 1 < q.grid.size(); ++i) {
        if (q.u_abs[i + 1] > 0.0) CHECK(q.u_abs[i + 1] <= q.u_abs[i] * (1.0 + 1e-12));
    }
    for (std::size_t i = mid; i > 0; --i) {
        if (q.u_abs[i - 1] > 0.0) CHECK(q.u_abs[i - 1] <= q.u_abs[i] * (1.0 + 1e-12));
    }
}

TEST_CASE("exponential smallness off the equator at lambda = 200") {
    const Profile p = make_sphere();
    const QuasimodeField q = build(p, 200.0, {0.0, 0.5});
    const double bound = std::exp(-200.0 * (-std::log(std::cos(0.5)))) * (1.0 + 1e-12);
    CHECK(q.u_abs[1] / q.u_abs[0] <= bound);
}

TEST_CASE("defect and sup scaling fits on both bundled profiles") {
    for (const Profile& p : {make_sphere(), make_perturbed_sphere(0.05)}) {
        const QuasimodeScalings sc = defect_and_sup_scaling(p, quasimode_lambda_family());
        CHECK(std::abs(sc.sup_fit.exponent - 0.25) < 0.02);
        CHECK(std::abs(sc.defect_fit.exponent - (-1.0)) < 0.05);
        for (double a : sc.agreements) CHECK(a < 1e-3);
    }
}

TEST_CASE("quasimode matches the true highest-weight eigenfunction on the sphere") {
    const Profile p = make_sphere();
    const double lambda = 100.0;
    const QuasimodeField q = build(p, lambda, default_quasimode_grid(p, lambda));
    const double qm_sup = normalized_sup(p, q);
    const Mode mode = solve_highest_weight(p, 100, 3000);
    const SupNormProfile s = sup_norm_profile(mode, p);
    CHECK(std::abs(qm_sup - s.sup) / s.sup < 0.05);
}
