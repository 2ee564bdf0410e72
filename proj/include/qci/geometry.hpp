#pragma once

// Surface-of-revolution metrics ds^2 = dt^2 + f(t)^2 dphi^2: profile
// validation, equator location and the cosphere ellipse.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qci/common.hpp"

namespace qci {

using RealFn = std::function<double(double)>;

// Generatrix of a surface of revolution. f > 0 strictly inside (t_minus,
// t_plus); when poles exist f vanishes at both endpoints. pole_smooth asserts
// |f'(pole)| = 1 (first-order metric smoothness); cap_at_one asserts
// max f = 1, required by the quasimode construction.
struct Profile {
    double t_minus = 0.0;
    double t_plus = 0.0;
    RealFn f;
    RealFn df;
    RealFn d2f;
    bool pole_smooth = false;
    bool cap_at_one = false;
    bool derivatives_from_fd = false;  // set when df/d2f fall back to stencils
    std::string name = "custom";
};

struct SurfacePoint {
    double t = 0.0;
    double phi = 0.0;  // reduced mod 2*pi
};

struct Covector {
    double xi_t = 0.0;
    double xi_phi = 0.0;
};

struct ValidationReport {
    std::vector<double> positivity_violations;       // interior t where f <= 0
    double pole_value_minus = 0.0;                   // f(t_minus)
    double pole_value_plus = 0.0;                    // f(t_plus)
    double pole_slope_dev_minus = 0.0;               // ||f'(t_minus)| - 1|
    double pole_slope_dev_plus = 0.0;                // ||f'(t_plus)| - 1|
    std::vector<std::pair<double, double>> equators; // (t0, f''(t0)), ordered by t
    double max_f = 0.0;
    double max_derivative_mismatch = 0.0;            // df vs centered FD, relative

    bool positivity_ok = false;
    bool poles_ok = false;           // f(t_pm) = 0 when pole_smooth asserted
    bool pole_slope_ok = false;      // within 1e-8 of +-1
    bool cone_point_warning = false; // slope off by more than 1e-8 but poles exist
    bool derivatives_ok = false;     // df/d2f consistent with finite differences
    bool equators_nondegenerate = false;
    bool cap_ok = false;             // max f = 1 when cap_at_one asserted
    bool pass = false;

    std::string summary() const;
};

// Checks the standing assumptions: interior positivity, poles (f = 0 at the
// endpoints when asserted), |f'(pole)| = 1 within 1e-8 (deviation downgraded
// to a cone-point warning), nondegenerate equators (f'' != 0 at roots of f'),
// and derivative consistency at 100 deterministic interior sample points.
ValidationReport validate_profile(const Profile& p);

// Roots t0 of f' with |f''(t0)| > tol, ordered by t. Sign-change scan on a
// 2048-point grid refined by bisection.
std::vector<std::pair<double, double>> equator_locate(const Profile& p, double tol);

// Unit covector (cos theta, f(t) sin theta) on the cosphere ellipse
// xi_t^2 + xi_phi^2 / f^2 = 1.
Covector cosphere_embed(const Profile& p, double t, double theta);

// Angle parameter of a unit covector, inverse of cosphere_embed.
double cosphere_angle(const Profile& p, double t, const Covector& xi);

// Bundled profile builders. "custom" profiles come from a sampled table file
// (two columns: t, f(t)) with derivatives from a natural cubic spline.
Profile make_sphere();
Profile make_perturbed_sphere(double eps);  // f = cos t (1 - eps sin^2 t) on [-pi/2, pi/2]
Profile make_spheroid(double eps);          // f = sin t (1 - eps sin^2 t) on [0, pi]
Profile make_profile_from_table(const std::vector<double>& t, const std::vector<double>& f);
Profile load_profile_table(const std::string& path);

// Builder dispatch by CLI name: "sphere", "perturbed-sphere(eps)",
// "spheroid(eps)", or a path to a table file.
Profile make_profile(const std::string& spec);

}  // namespace qci
