#pragma once

// Moment-map symbol systems of the bundled integrable examples, with the
// rank-k degeneracy check and the Morse check on the cosphere.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qci/common.hpp"
#include "qci/geometry.hpp"

namespace qci {

using Point = std::vector<double>;

using SymbolFn = std::function<double(const Point& x, const Point& xi)>;
using GradientFn = std::function<Point(const Point& x, const Point& xi)>;

// n-tuple of principal symbols p_1..p_n with analytic xi-gradients. p[0] is
// the Hamiltonian defining the cosphere; homogeneity is its degree in xi
// (2 for sor / liouville / ellipsoid, 1 for the flat torus). For embedded
// phase spaces (ellipsoid) fiber_normal gives the constraint normal in the
// xi-fiber (x itself, from x . xi = 0).
struct SymbolSystem {
    int n = 0;
    int dim_x = 0;
    int dim_xi = 0;
    int homogeneity = 2;
    std::vector<SymbolFn> p;
    std::vector<GradientFn> grad_xi;
    std::function<Point(const Point& x)> fiber_normal;  // null when unconstrained
    std::string label;
};

struct RankReport {
    int rank = 0;
    std::vector<double> singular_values;  // descending
    double tol_used = 0.0;
    std::vector<Point> tangent_basis;  // orthonormal basis of T_xi C_x
};

struct MorseCritical {
    double theta = 0.0;
    double value = 0.0;
    double second_derivative = 0.0;
    bool rank_degenerate = false;  // rank_at drops at this direction
};

struct MorseReport {
    std::vector<MorseCritical> critical_points;
    bool all_nondegenerate = false;
};

struct RankScanEntry {
    double theta = 0.0;  // angle (2-D fiber) or direction index in higher dim
    int rank = 0;
    std::vector<double> singular_values;
};

struct RankScanSummary {
    int min_rank = 0;
    int max_rank = 0;
    std::vector<RankScanEntry> entries;
    std::vector<RankScanEntry> degenerate;  // rank < max_rank
};

enum class SystemName { sor, liouville_torus, ellipsoid, flat_torus };

struct SystemParams {
    // sor
    std::optional<Profile> profile;
    // liouville_torus: a(x1), b(x2) and derivatives (periodic on [0,1])
    RealFn a, da, b, db;
    // ellipsoid semiaxis coefficients, 0 < a3 < a2 < a1
    double a1 = 0.0, a2 = 0.0, a3 = 0.0;
    // flat torus
    int n = 0;
    std::vector<int> momentum_indices;  // 1-based, size n-1
};

SymbolSystem build_system(SystemName name, const SystemParams& params);

SymbolSystem make_sor_system(const Profile& profile);
SymbolSystem make_liouville_system(RealFn a, RealFn da, RealFn b, RealFn db);
SymbolSystem make_ellipsoid_system(double a1, double a2, double a3);
SymbolSystem make_flat_torus_system(int n, const std::vector<int>& momentum_indices);

// Scale direction by a positive factor (1-D Newton from c = 1) so that
// p1(x, c * direction) = E1; residual <= 1e-12 or SolveError after 50 steps.
Point cosphere_solve(const SymbolSystem& sys, const Point& x, const Point& direction, double E1 = 1.0);

// Rank of span{grad p_2, ..., grad p_n} projected onto the tangent space of
// the cosphere at xi (singular values thresholded at tol * max(sigma_max, 1)).
// project_tangential = false keeps the raw fiber gradients (comparison flag
// for the unprojected reading of the rank condition).
RankReport rank_at(const SymbolSystem& sys, const Point& x, const Point& xi, double tol = 1e-8,
                   bool project_tangential = true);

// Per-direction rank over a parametrization of the cosphere: theta grid from
// the fiber ellipse in 2-D fibers, Fibonacci sphere design in higher dim.
RankScanSummary rank_scan(const SymbolSystem& sys, const Point& x, int samples, double tol = 1e-8);

// Parametrization used by rank_scan and morse_check for 2-D fibers: the
// cosphere ellipse through the inverse square root of the p1 quadratic form
// (degree-2 systems) or the scaled circle (degree-1 systems).
Point cosphere_ellipse_point(const SymbolSystem& sys, const Point& x, double theta, double E1 = 1.0);

using Combiner = std::function<double(const std::vector<double>& p_values)>;

// Critical points of q(theta) = combiner(p_1..p_n)(x, xi(theta)) on the
// cosphere ellipse: sign changes of dq/dtheta refined by bisection; second
// derivative by central differences. all_nondegenerate iff every
// |q''| > tol. Each critical direction is also rank-checked.
MorseReport morse_check(const SymbolSystem& sys, const Combiner& combiner, const Point& x, int grid,
                        double tol = 1e-6);

}  // namespace qci
