#pragma once

// Highest-weight quasimode u = lambda^(1/4) exp(-lambda A(t)) e^(i lambda phi)
// with A the equator decay integral, its residual identity checked both in
// closed form and by finite differences, and the h^(-1/4) / O(h) scaling fits.

#include <vector>

#include "qci/fitting.hpp"
#include "qci/geometry.hpp"

namespace qci {

struct QuasimodeField {
    double lambda = 0.0;       // frequency, h = 1/lambda
    std::vector<double> A;     // decay integral, A(t0) = 0, nondecreasing in |t - t0|
    std::vector<double> u_abs; // lambda^(1/4) exp(-lambda A); phi factor has modulus 1
    std::vector<double> grid;
    double t0 = 0.0;           // equator
};

struct ResidualReport {
    double analytic_sup = 0.0;  // sup |(-h^2 Lap - 1) u| / sup |u|, closed form
    double numeric_sup = 0.0;   // same via 4th-order finite differences
    double agreement = 0.0;     // |analytic - numeric| / analytic
    double h = 0.0;
};

// A(t) = | int_{t0}^{t} sqrt(max(1 - f^2, 0)) / f |, adaptive Simpson with the
// t - t0 = tau^2 substitution (the integrand has an |t - t0| kink at the
// equator). Requires cap_at_one and a unique equator with f(t0) = 1.
QuasimodeField build(const Profile& p, double lambda, const std::vector<double>& grid);

// Uniform grid centered at the equator, clipped away from the poles, spaced
// <= 1/(10 lambda), wide enough that lambda * A reaches ~45 at the ends.
std::vector<double> default_quasimode_grid(const Profile& p, double lambda);

// Closed-form residual: (-h^2 Lap - 1) u = -h sigma(t) f' / sqrt(1 - f^2) u,
// with the 0/0 at the equator resolved by the Taylor limit sqrt(-f''(t0)).
ResidualReport residual_analytic(const Profile& p, const QuasimodeField& q);

// Radial part of (-h^2 Lap - 1) applied to u_abs by 4th-order central
// differences (d_phi^2 -> -lambda^2 exactly). Fills numeric_sup and agreement
// of the analytic report.
ResidualReport residual_numeric(const Profile& p, const QuasimodeField& q);

struct QuasimodeScalings {
    ScalingFit sup_fit;     // exponent ~ +1/4 in lambda
    ScalingFit defect_fit;  // exponent ~ -1 in lambda (O(h) defect)
    std::vector<double> agreements;  // analytic/numeric gap per lambda
};

// Normalizes each field in L^2(M), fits (lambda, sup) and (lambda, defect).
QuasimodeScalings defect_and_sup_scaling(const Profile& p, const std::vector<double>& lambdas);

// The bundled geometric lambda family {50, 75, 112, 169, 253, 380}.
std::vector<double> quasimode_lambda_family();

// L^2(M)-normalized peak value of the field.
double normalized_sup(const Profile& p, const QuasimodeField& q);

}  // namespace qci
