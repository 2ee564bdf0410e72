#pragma once

// Geodesic (Clairaut) flow on a surface of revolution: adaptive RK5(4)
// integration, equator first-return data, Zoll detection, recurrence
// classification and the shortest-loop quantity.

#include <optional>
#include <vector>

#include "qci/geometry.hpp"

namespace qci {

// Arclength-parametrized phase point. Unit speed: dt_ds^2 + f^2 dphi_ds^2 = 1.
struct GeodesicState {
    double t = 0.0;
    double phi = 0.0;
    double dt_ds = 0.0;
    double dphi_ds = 0.0;
};

struct Trajectory {
    std::vector<double> s;
    std::vector<GeodesicState> states;
    bool pole_truncated = false;   // stopped at a domain end or by step underflow
    double max_unit_drift = 0.0;   // |dt^2 + f^2 dphi^2 - 1| along the run
    double max_clairaut_drift = 0.0;
};

// First equator return of the geodesic launched at angle psi to the meridian.
struct ReturnSample {
    double psi = 0.0;
    double S = 0.0;    // arclength of first return, > 0
    double Phi = 0.0;  // longitude increment, reduced to (0, 2*pi)
};

struct RecurrenceVerdict {
    bool rational = false;
    std::optional<std::pair<long, long>> p_over_q;  // best approximant with q <= q_max
    double distance = 0.0;                          // |Phi/(2*pi) - p/q|
};

struct ZollVerdict {
    bool is_zoll = false;
    double spread = 0.0;  // max - min of Phi over the grid
    std::vector<ReturnSample> samples;
};

struct LoopResult {
    bool closed = false;  // false: no loop within s_max (the infinity marker)
    double length = 0.0;
    int near_returns = 0;  // entries into the position delta-ball before acceptance
};

// State (t0, phi0, cos psi, sin psi / f(t0)): unit speed holds exactly.
GeodesicState initial_state(const Profile& p, double t0, double phi0, double psi);

// Clairaut invariant gamma = f(t)^2 dphi_ds (= f sin psi under unit speed).
double clairaut(const Profile& p, const GeodesicState& s);

// Dormand-Prince RK5(4) with PI step control; tol in [1e-13, 1e-6] is used as
// absolute and relative tolerance with fixed per-component scales so that
// trajectories are exactly equivariant under phi-shifts. max_step caps the
// accepted step (0 = no cap). Stops at the first domain-end crossing with the
// pole flag set.
Trajectory integrate_geodesic(const Profile& p, const GeodesicState& init, double s_max, double tol,
                              double max_step = 0.0);

// Single dense evaluation: the state at arclength s along the trajectory
// starting from init (re-integrates; used by tests).
GeodesicState evaluate_at(const Profile& p, const GeodesicState& init, double s, double tol);

// First s > 0 with t(s) = t0 for a launch from the equator at angle
// psi in (0, pi/2); crossing refined by bisection to |t - t0| <= tol.
ReturnSample first_return(const Profile& p, double psi, double tol, double s_max);

// k-th equator return (composition of the return map); longitude accumulates.
ReturnSample nth_return(const Profile& p, double psi, int k, double tol, double s_max);

// True iff max-min of Phi over the psi grid is <= 10*tol.
ZollVerdict zoll_test(const Profile& p, const std::vector<double>& psi_grid, double tol, double s_max = 100.0);

// Best rational approximation p/q to Phi/(2*pi) with q <= q_max (continued
// fractions with semiconvergents); rational iff the distance is <= eps.
RecurrenceVerdict rational_classify(double Phi, long q_max, double eps);

// Shortest loop at (x, xi) returning delta-close in position (metric-weighted
// chart distance) and direction (cosphere angle gap), searched up to s_max.
LoopResult loop_length(const Profile& p, const SurfacePoint& x, const Covector& xi, double delta, double s_max,
                       double tol = 1e-10);

}  // namespace qci
