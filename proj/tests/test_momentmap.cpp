#include <cmath>

#include "doctest.h"
#include "qci/momentmap.hpp"

using namespace qci;

namespace {

SymbolSystem constant_liouville(double alpha, double beta) {
    return make_liouville_system([alpha](double) { return alpha; }, [](double) { return 0.0; },
                                 [beta](double) { return beta; }, [](double) { return 0.0; });
}

// Random point of the ellipsoid phase space: x on the unit sphere, xi in the
// fiber x . xi = 0.
void random_ellipsoid_point(Rng& rng, Point& x, Point& xi) {
    const double z = rng.uniform(-0.95, 0.95);
    const double ang = rng.uniform(0.0, kTwoPi);
    const double r = std::sqrt(1.0 - z * z);
    x = {r * std::cos(ang), r * std::sin(ang), z};
    Point raw = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    double d = raw[0] * x[0] + raw[1] * x[1] + raw[2] * x[2];
    xi = {raw[0] - d * x[0], raw[1] - d * x[1], raw[2] - d * x[2]};
}

}  // namespace

TEST_CASE("liouville constant system matches the cosphere restriction formula") {
    // alpha = 2, beta = 1: on the cosphere xi^2 + eta^2 = 3,
    // p2 = (1 xi^2 - 2 eta^2) / 3.
    const SymbolSystem sys = constant_liouville(2.0, 1.0);
    const Point z{0.3, 0.8};
    Rng rng(99);
    for (int i = 0; i < 50; ++i) {
        const double theta = rng.uniform(0.0, kTwoPi);
        const Point xi{std::sqrt(3.0) * std::cos(theta), std::sqrt(3.0) * std::sin(theta)};
        CHECK(sys.p[0](z, xi) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sys.p[1](z, xi) ==
              doctest::Approx((xi[0] * xi[0] - 2.0 * xi[1] * xi[1]) / 3.0).epsilon(1e-12));
        // Same as beta cos^2 - alpha sin^2 on the cosphere.
        CHECK(sys.p[1](z, xi) ==
              doctest::Approx(std::cos(theta) * std::cos(theta) - 2.0 * std::sin(theta) * std::sin(theta))
                  .epsilon(1e-12));
    }
}

TEST_CASE("liouville condition min a > max b is enforced") {
    CHECK_THROWS_AS(constant_liouville(1.0, 2.0), ParameterError);
}

TEST_CASE("ellipsoid: P = H / a2 on the hyperbolic geodesics") {
    const SymbolSystem sys = make_ellipsoid_system(3.0, 2.0, 1.0);
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        // x2 = xi2 = 0 with x on the unit circle in the (1,3)-plane.
        const double a = rng.uniform(0.0, kTwoPi);
        const Point x{std::cos(a), 0.0, std::sin(a)};
        const double c = rng.uniform(0.2, 2.0);
        const Point xi{-c * std::sin(a), 0.0, c * std::cos(a)};  // tangent, xi2 = 0
        CHECK(sys.p[1](x, xi) == doctest::Approx(sys.p[0](x, xi) / 2.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(make_ellipsoid_system(1.0, 2.0, 3.0), ParameterError);
}

TEST_CASE("flat torus momentum gradients are constant unit vectors") {
    const SymbolSystem sys = make_flat_torus_system(3, {2, 3});
    const Point x{0.0, 0.0, 0.0};
    const Point xi{0.3, -0.4, 0.8};
    const Point g = sys.grad_xi[1](x, xi);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 1.0);
    CHECK(g[2] == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(5150);
    const Profile sphere = make_sphere();
    std::vector<SymbolSystem> systems;
    systems.push_back(make_sor_system(sphere));
    systems.push_back(constant_liouville(2.0, 1.0));
    systems.push_back(make_liouville_system([](double x) { return 2.0 + 0.3 * std::cos(kTwoPi * x); },
                                            [](double x) { return -0.3 * kTwoPi * std::sin(kTwoPi * x); },
                                            [](double y) { return 1.0 + 0.2 * std::sin(kTwoPi * y); },
                                            [](double y) { return 0.2 * kTwoPi * std::cos(kTwoPi * y); }));
    systems.push_back(make_ellipsoid_system(3.0, 2.0, 1.0));
    systems.push_back(make_flat_torus_system(3, {2, 3}));

    for (const SymbolSystem& sys : systems) {
        for (int trial = 0; trial < 100; ++trial) {
            Point x(static_cast<std::size_t>(sys.dim_x)), xi(static_cast<std::size_t>(sys.dim_xi));
            if (sys.label == "sor") {
                x = {rng.uniform(-1.2, 1.2), rng.uniform(0.0, kTwoPi)};
                xi = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
            } else if (sys.label == "ellipsoid") {
                random_ellipsoid_point(rng, x, xi);
            } else {
                for (auto& v : x) v = rng.uniform(0.0, 1.0);
                for (auto& v : xi) v = rng.uniform(-1.0, 1.0);
            }
            double xi_norm = 0.0;
            for (double v : xi) xi_norm += v * v;
            if (xi_norm < 0.01) continue;  // keep |xi| away from the degree-1 cone point
            const double h = 1e-6;
            for (int j = 0; j < sys.n; ++j) {
                const Point g = sys.grad_xi[static_cast<std::size_t>(j)](x, xi);
                for (int d = 0; d < sys.dim_xi; ++d) {
                    Point xp = xi, xm = xi;
                    xp[static_cast<std::size_t>(d)] += h;
                    xm[static_cast<std::size_t>(d)] -= h;
                    const double fd =
                        (sys.p[static_cast<std::size_t>(j)](x, xp) - sys.p[static_cast<std::size_t>(j)](x, xm)) /
                        (2.0 * h);
                    CHECK(std::abs(g[static_cast<std::size_t>(d)] - fd) / std::max(1.0, std::abs(fd)) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("p1 homogeneity matches the declared degree") {
    Rng rng(31);
    const SymbolSystem deg2 = constant_liouville(2.0, 1.0);
    const SymbolSystem deg1 = make_flat_torus_system(3, {2, 3});
    for (int i = 0; i < 50; ++i) {
        const double c = rng.uniform(0.3, 3.0);
        const Point x{0.1, 0.2};
        const Point xi{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        CHECK(deg2.p[0](x, {c * xi[0], c * xi[1]}) == doctest::Approx(c * c * deg2.p[0](x, xi)).epsilon(1e-12));
        const Point x3{0.0, 0.0, 0.0};
        const Point xi3{rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0)};
        CHECK(deg1.p[0](x3, {c * xi3[0], c * xi3[1], c * xi3[2]}) ==
              doctest::Approx(c * deg1.p[0](x3, xi3)).epsilon(1e-12));
    }
}

TEST_CASE("cosphere_solve closed-form scalings") {
    SUBCASE("flat torus") {
        const SymbolSystem sys = make_flat_torus_system(2, {2});
        const Point xi = cosphere_solve(sys, {0.0, 0.0}, {3.0 / 5.0, 4.0 / 5.0});
        CHECK(xi[0] == doctest::Approx(0.6).epsilon(1e-12));
        CHECK(xi[1] == doctest::Approx(0.8).epsilon(1e-12));
    }
    SUBCASE("sor sphere at t = pi/3") {
        const SymbolSystem sys = make_sor_system(make_sphere());
        const Point xi = cosphere_solve(sys, {kPi / 3.0, 0.0}, {0.0, 1.0});
        CHECK(xi[0] == 0.0);
        CHECK(xi[1] == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("liouville") {
        const SymbolSystem sys = constant_liouville(2.0, 1.0);
        const Point xi = cosphere_solve(sys, {0.0, 0.0}, {1.0, 0.0});
        CHECK(xi[0] == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
    }
}

TEST_CASE("rank_at on the sor sphere: vertical covectors are degenerate") {
    const SymbolSystem sys = make_sor_system(make_sphere());
    const Point x{kPi / 4.0, 0.0};
    const double f = std::cos(kPi / 4.0);
    SUBCASE("xi_t = 0 gives rank 0") {
        const Point xi{0.0, f};  // theta = pi/2 on the ellipse
        CHECK(rank_at(sys, x, xi).rank == 0);
    }
    SUBCASE("xi_t != 0 gives rank 1") {
        const Point xi{std::cos(0.3), f * std::sin(0.3)};
        CHECK(rank_at(sys, x, xi).rank == 1);
    }
}

TEST_CASE("flat torus frames at the degenerate direction: rank n-2 vs n-1") {
    const Point x{0.0, 0.0, 0.0};
    const Point xi{0.0, 1.0, 0.0};
    const SymbolSystem frame_p = make_flat_torus_system(3, {2, 3});
    const SymbolSystem frame_q = make_flat_torus_system(3, {1, 3});
    CHECK(rank_at(frame_p, x, xi).rank == 1);
    CHECK(rank_at(frame_q, x, xi).rank == 2);
}

TEST_CASE("rank_at raises the principal-type error when grad p1 vanishes") {
    // A synthetic system with p1 whose gradient vanishes at xi = 0 is not
    // reachable on a cosphere; use the flat torus at xi = 0 surrogate via a
    // degenerate direction of the constrained ellipsoid instead: grad H is
    // never 0 on the cosphere, so build an artificial system.
    SymbolSystem sys;
    sys.n = 2;
    sys.dim_x = 1;
    sys.dim_xi = 2;
    sys.homogeneity = 2;
    sys.p = {[](const Point&, const Point& xi) { return xi[0] * xi[0] * xi[0] * xi[0] + xi[1] * xi[1]; },
             [](const Point&, const Point& xi) { return xi[1]; }};
    sys.grad_xi = {[](const Point&, const Point& xi) {
                       return Point{4.0 * xi[0] * xi[0] * xi[0], 2.0 * xi[1]};
                   },
                   [](const Point&, const Point&) {
                       return Point{0.0, 1.0};
                   }};
    CHECK_THROWS_AS(rank_at(sys, {0.0}, {0.0, 0.0}), PrincipalTypeError);
}

TEST_CASE("rank_scan finds the liouville degeneracies at multiples of pi/2") {
    const SymbolSystem sys = constant_liouville(2.0, 1.0);
    const RankScanSummary sum = rank_scan(sys, {0.1, 0.7}, 360);
    CHECK(sum.max_rank == 1);
    CHECK(sum.min_rank == 0);
    REQUIRE(sum.degenerate.size() == 4);
    const double cell = kTwoPi / 360.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double target = i * kPi / 2.0;
        CHECK(std::abs(wrap_pi(sum.degenerate[i].theta - target)) <= cell);
    }
}

TEST_CASE("rank_scan on the ellipsoid: directions tangent to the hyperbolic geodesic degenerate") {
    const SymbolSystem sys = make_ellipsoid_system(3.0, 2.0, 1.0);
    const double a = 0.7;
    const Point x{std::cos(a), 0.0, std::sin(a)};  // x2 = 0
    const RankScanSummary sum = rank_scan(sys, x, 720, 1e-8);
    CHECK(sum.max_rank == 1);
    // Tangent direction to {x2 = xi2 = 0}: xi2 = 0 within the fiber.
    int tangent_degenerate = 0;
    for (const auto& e : sum.degenerate) {
        const Point xi = cosphere_ellipse_point(sys, x, e.theta);
        if (std::abs(xi[1]) < 2e-2) ++tangent_degenerate;
    }
    CHECK(tangent_degenerate >= 2);
}

TEST_CASE("rank_scan on the flat 2-torus: degenerate exactly at xi = (0, +-1)") {
    const SymbolSystem sys = make_flat_torus_system(2, {2});
    const RankScanSummary sum = rank_scan(sys, {0.0, 0.0}, 360);
    REQUIRE(sum.degenerate.size() == 2);
    for (const auto& e : sum.degenerate) {
        const Point xi = cosphere_ellipse_point(sys, {0.0, 0.0}, e.theta);
        CHECK(std::abs(xi[0]) < 2e-2);
        CHECK(std::abs(std::abs(xi[1]) - 1.0) < 2e-4);
    }
}

TEST_CASE("morse_check on the liouville torus") {
    const SymbolSystem sys = constant_liouville(2.0, 1.0);
    const Combiner pick_p2 = [](const std::vector<double>& pv) { return pv[1]; };
    const MorseReport rep = morse_check(sys, pick_p2, {0.1, 0.7}, 360, 1e-6);
    REQUIRE(rep.critical_points.size() == 4);
    CHECK(rep.all_nondegenerate);
    // q(theta) = beta cos^2 - alpha sin^2: criticals at k pi/2 with
    // q'' = -+ 2 (alpha + beta), values in {beta, -alpha} = {1, -2}.
    for (const auto& c : rep.critical_points) {
        const double nearest = std::round(c.theta / (kPi / 2.0)) * (kPi / 2.0);
        CHECK(std::abs(wrap_pi(c.theta - nearest)) < 1e-8);
        const bool even = static_cast<long>(std::llround(c.theta / (kPi / 2.0))) % 2 == 0;
        CHECK(c.value == doctest::Approx(even ? 1.0 : -2.0).epsilon(1e-8));
        CHECK(c.second_derivative == doctest::Approx(even ? -6.0 : 6.0).epsilon(1e-5));
        CHECK(c.rank_degenerate);
    }
}

TEST_CASE("morse_check on the sor sphere at t = pi/4") {
    const SymbolSystem sys = make_sor_system(make_sphere());
    const Combiner pick_p2 = [](const std::vector<double>& pv) { return pv[1]; };
    const double f = std::cos(kPi / 4.0);
    const MorseReport rep = morse_check(sys, pick_p2, {kPi / 4.0, 0.0}, 256, 1e-6);
    REQUIRE(rep.critical_points.size() == 2);
    CHECK(rep.all_nondegenerate);
    // q(theta) = f sin(theta): criticals at +-pi/2 with q'' = -+f.
    for (const auto& c : rep.critical_points) {
        const bool top = std::abs(wrap_pi(c.theta - kPi / 2.0)) < 1e-8;
        CHECK(c.second_derivative == doctest::Approx(top ? -f : f).epsilon(1e-5));
        CHECK(c.rank_degenerate);
    }
}

TEST_CASE("morse_check on the ellipsoid flags the rank failure at critical directions") {
    const SymbolSystem sys = make_ellipsoid_system(3.0, 2.0, 1.0);
    const double a = 0.7;
    const Point x{std::cos(a), 0.0, std::sin(a)};
    const Combiner pick_P = [](const std::vector<double>& pv) { return pv[1]; };
    const MorseReport rep = morse_check(sys, pick_P, x, 256, 1e-6);
    REQUIRE(rep.critical_points.size() >= 2);
    int flagged = 0, tangent_at_E1_over_a2 = 0;
    for (const auto& c : rep.critical_points) {
        if (c.rank_degenerate) ++flagged;
        const Point xi = cosphere_ellipse_point(sys, x, c.theta);
        if (std::abs(xi[1]) < 1e-8) {
            // Tangent to the hyperbolic geodesic: P = H / a2 there.
            CHECK(c.value == doctest::Approx(1.0 / 2.0).epsilon(1e-8));
            ++tangent_at_E1_over_a2;
        }
    }
    CHECK(flagged == static_cast<int>(rep.critical_points.size()));
    CHECK(tangent_at_E1_over_a2 == 2);
}

TEST_CASE("rank is invariant under symbol rescaling and reordering") {
    Rng rng(808);
    const SymbolSystem base = make_flat_torus_system(3, {2, 3});
    const Point x{0.0, 0.0, 0.0};
    for (int i = 0; i < 100; ++i) {
        Point dir{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        double n2 = dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2];
        if (n2 < 0.05) continue;
        const Point xi = cosphere_solve(base, x, dir);
        const int r0 = rank_at(base, x, xi).rank;

        SymbolSystem scaled = base;
        const double c1 = rng.uniform(0.1, 5.0), c2 = rng.uniform(0.1, 5.0);
        scaled.p[1] = [c1](const Point& xx, const Point& xxi) { return c1 * xxi[1]; };
        scaled.grad_xi[1] = [c1](const Point&, const Point&) { return Point{0.0, c1, 0.0}; };
        scaled.p[2] = [c2](const Point& xx, const Point& xxi) { return c2 * xxi[2]; };
        scaled.grad_xi[2] = [c2](const Point&, const Point&) { return Point{0.0, 0.0, c2}; };
        CHECK(rank_at(scaled, x, xi).rank == r0);

        SymbolSystem reordered = base;
        std::swap(reordered.p[1], reordered.p[2]);
        std::swap(reordered.grad_xi[1], reordered.grad_xi[2]);
        CHECK(rank_at(reordered, x, xi).rank == r0);
    }
}

TEST_CASE("adding a dependent symbol never increases the rank") {
    const SymbolSystem base = make_flat_torus_system(3, {2, 3});
    SymbolSystem extended = base;
    extended.n = 4;
    // p4 = p2 + p3^2: gradient 1*e2 + 2 p3 e3, a combination of existing ones.
    extended.p.push_back([](const Point&, const Point& xi) { return xi[1] + xi[2] * xi[2]; });
    extended.grad_xi.push_back([](const Point&, const Point& xi) { return Point{0.0, 1.0, 2.0 * xi[2]}; });
    Rng rng(4711);
    const Point x{0.0, 0.0, 0.0};
    for (int i = 0; i < 100; ++i) {
        Point dir{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2] < 0.05) continue;
        const Point xi = cosphere_solve(base, x, dir);
        CHECK(rank_at(extended, x, xi).rank == rank_at(base, x, xi).rank);
    }
}

TEST_CASE("rank output is stable under tol refinement away from degeneracies") {
    const SymbolSystem sys = constant_liouville(2.0, 1.0);
    const Point x{0.2, 0.4};
    for (int i = 0; i < 64; ++i) {
        const double theta = kTwoPi * (i + 0.5) / 64.0;
        double dist = 1e300;
        for (int kq = 0; kq < 4; ++kq) dist = std::min(dist, std::abs(wrap_pi(theta - kq * kPi / 2.0)));
        if (dist < 1e-6) continue;
        const Point xi = cosphere_ellipse_point(sys, x, theta);
        CHECK(rank_at(sys, x, xi, 1e-8).rank == rank_at(sys, x, xi, 1e-9).rank);
    }
}

TEST_CASE("ellipsoid projected gradients respect the constraints") {
    const SymbolSystem sys = make_ellipsoid_system(3.0, 2.0, 1.0);
    Rng rng(2024);
    for (int i = 0; i < 100; ++i) {
        Point x, xi;
        random_ellipsoid_point(rng, x, xi);
        if (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] < 0.05) continue;
        const RankReport rep = rank_at(sys, x, xi);
        const Point g1 = sys.grad_xi[0](x, xi);
        for (const Point& b : rep.tangent_basis) {
            CHECK(std::abs(b[0] * x[0] + b[1] * x[1] + b[2] * x[2]) < 1e-10);
            CHECK(std::abs(b[0] * g1[0] + b[1] * g1[1] + b[2] * g1[2]) < 1e-9);
        }
    }
}

TEST_CASE("build_system dispatch and parameter errors") {
    SystemParams params;
    params.n = 3;
    params.momentum_indices = {2, 3};
    const SymbolSystem sys = build_system(SystemName::flat_torus, params);
    CHECK(sys.n == 3);
    CHECK_THROWS_AS(make_flat_torus_system(3, {2, 2}), ParameterError);
    CHECK_THROWS_AS(make_flat_torus_system(3, {2}), ParameterError);
    CHECK_THROWS_AS(make_flat_torus_system(1, {}), ParameterError);
}
