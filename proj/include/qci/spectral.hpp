#pragma once

// Separated Sturm-Liouville problem for joint eigenfunctions T(t) e^{i m phi}
// on a surface of revolution, L^2(M) normalization, and sup-norm scaling fits
// for the highest-weight family.

#include <vector>

#include "qci/fitting.hpp"
#include "qci/geometry.hpp"

namespace qci {

struct ModeProblem {
    Profile profile;
    int m = 0;          // angular quantum number, >= 0
    int grid_n = 0;     // number of interior nodes, >= 200
    std::vector<double> grid;  // strictly increasing interior t nodes, pole-clustered
};

struct Mode {
    int m = 0;
    double lambda = 0.0;       // frequency: eigenvalue of -Laplace is lambda^2
    std::vector<double> T;     // radial samples on problem.grid
    std::vector<double> grid;
    double l2_norm = 1.0;      // 2*pi * int |T|^2 f dt after normalization
    int index = 0;             // ordinal of lambda for fixed m (= interior sign changes)
};

// Symmetric tridiagonal discretization of the radial operator
//   -T'' - (f'/f) T' + (m^2/f^2) T
// in the weighted space L^2(f dt). Finite-volume fluxes with half-grid f
// values symmetrize exactly (the discrete form of the V = sqrt(f) T
// substitution); the zero-flux pole faces encode the even reflection for
// m = 0, and the m^2/f^2 potential enforces T -> 0 at the poles for m >= 1.
struct RadialOperator {
    std::vector<double> diag;
    std::vector<double> off;     // off.size() = diag.size() - 1
    std::vector<double> weight;  // f_i * w_i cell weights; T_i = U_i / sqrt(weight_i)
    std::vector<double> grid;
};

// Interior nodes with cosine clustering (node distance from each pole grows
// quadratically in the index).
std::vector<double> default_radial_grid(const Profile& p, int grid_n);

ModeProblem make_mode_problem(const Profile& p, int m, int grid_n);

RadialOperator assemble(const ModeProblem& problem);

// k-th smallest eigenvalue (lambda^2) by Sturm-sequence bisection.
double eigenvalue(const RadialOperator& op, int k);

// Eigenvector by inverse iteration at the bisection eigenvalue, returned as
// L^2(M)-normalized radial samples T.
Mode eigenmode(const ModeProblem& problem, const RadialOperator& op, int k);

// Index-0 mode for angular number m >= 1 (the lowest lambda: no interior sign
// changes; Y_l^l with l = m on the sphere). The eigenvalue is Richardson
// extrapolated from grid_n/2 and grid_n solves; samples are from the fine grid.
Mode solve_highest_weight(const Profile& p, int m, int grid_n);

// Richardson-extrapolated lambda^2 for (m, index) without the eigenvector.
double eigenvalue_extrapolated(const Profile& p, int m, int index, int grid_n);

struct SupNormProfile {
    double sup = 0.0;          // grid max of |T| with 3-point parabolic refinement
    double at_equator = 0.0;   // |T| at the equator
    double argmax_t = 0.0;
};

SupNormProfile sup_norm_profile(const Mode& mode, const Profile& p);

// Interior sign changes of the radial samples (Sturm oscillation index).
int sign_changes(const std::vector<double>& T);

// 2*pi * int |T|^2 f dt by composite trapezoid on the grid (pole endpoints
// contribute zero weight).
double l2_norm_squared(const Profile& p, const std::vector<double>& grid, const std::vector<double>& T);

// Sup norms of the highest-weight family over the given m values; grid_n
// scales linearly with m. Returns (lambda, sup) samples ready for fit_scaling.
std::vector<std::pair<double, double>> highest_weight_sup_series(const Profile& p, const std::vector<int>& ms);

// The bundled geometric m family {20, 30, 45, 67, 100, 150, 225}.
std::vector<int> highest_weight_family();

}  // namespace qci
