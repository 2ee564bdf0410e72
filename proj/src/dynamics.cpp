#include "qci/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qci {

namespace {

using Y = std::array<double, 4>;  // (t, phi, dt_ds, dphi_ds)

// Geodesic equations for ds^2 = dt^2 + f^2 dphi^2:
//   t''   =  f f' (phi')^2
//   phi'' = -2 (f'/f) t' phi'
Y rhs(const Profile& p, const Y& y) {
    const double f = p.f(y[0]);
    const double df = p.df(y[0]);
    Y dy;
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = f * df * y[3] * y[3];
    // phi' = 0 exactly on meridians; skip the division so poles stay finite.
    dy[3] = (y[3] == 0.0) ? 0.0 : -2.0 * df * y[2] * y[3] / f;
    return dy;
}

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 4th-order embedded weights.
constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                 e6 = 187.0 / 2100, e7 = 1.0 / 40;

struct StepResult {
    Y y;
    double err;  // scaled error norm
};

// One RK5(4) step of size h from y; k1 = rhs(y) may be reused across retries.
StepResult dopri5_step(const Profile& p, const Y& y, const Y& k1, double h, const Y& scale) {
    auto axpy = [&](std::initializer_list<std::pair<double, const Y*>> terms) {
        Y out = y;
        for (const auto& [c, k] : terms)
            for (int i = 0; i < 4; ++i) out[i] += h * c * (*k)[i];
        return out;
    };
    const Y k2 = rhs(p, axpy({{a21, &k1}}));
    const Y k3 = rhs(p, axpy({{a31, &k1}, {a32, &k2}}));
    const Y k4 = rhs(p, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Y k5 = rhs(p, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Y k6 = rhs(p, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    Y y5;
    for (int i = 0; i < 4; ++i)
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const Y k7 = rhs(p, y5);
    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double y4 = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double d = (y5[i] - y4) / scale[i];
        err += d * d;
    }
    return {y5, std::sqrt(err / 4.0)};
}

struct Stepper {
    const Profile& p;
    double tol;
    Y scale;
    double h;           // current step proposal
    double err_prev = 1.0;

    Stepper(const Profile& prof, double tol_, double domain_len) : p(prof), tol(tol_) {
        // Fixed per-component scales: t and the angle phi use domain-sized
        // scales, velocities are O(1). Keeping them state-independent makes
        // trajectories exactly equivariant under phi-shifts.
        scale = {tol * (1.0 + domain_len), tol * (1.0 + kTwoPi), tol * 2.0, tol * 2.0};
        h = 0.1 * std::sqrt(tol > 0 ? tol / 1e-12 : 1.0);
        h = std::min(h, 0.1);
    }

    // Advance by one accepted step; returns the step size actually taken.
    double advance(Y& y, double max_step) {
        const Y k1 = rhs(p, y);
        for (int attempt = 0; attempt < 64; ++attempt) {
            double hs = h;
            if (max_step > 0.0) hs = std::min(hs, max_step);
            const StepResult st = dopri5_step(p, y, k1, hs, scale);
            const double err = std::max(st.err, 1e-12);
            if (st.err <= 1.0) {
                // PI controller (Gustafsson): order-5 exponents 0.7/5, 0.4/5.
                double fac = 0.9 * std::pow(err, -0.14) * std::pow(err_prev, 0.08);
                fac = std::clamp(fac, 0.2, 5.0);
                err_prev = err;
                h = hs * fac;
                y = st.y;
                return hs;
            }
            h = hs * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
            if (h < 1e-14 * (1.0 + std::abs(y[0]))) return 0.0;  // underflow
        }
        return 0.0;
    }
};

double unit_speed_defect(const Profile& p, const Y& y) {
    const double f = p.f(y[0]);
    return std::abs(y[2] * y[2] + f * f * y[3] * y[3] - 1.0);
}

GeodesicState to_state(const Y& y) { return GeodesicState{y[0], y[1], y[2], y[3]}; }
Y to_y(const GeodesicState& s) { return Y{s.t, s.phi, s.dt_ds, s.dphi_ds}; }

}  // namespace

GeodesicState initial_state(const Profile& p, double t0, double phi0, double psi) {
    const double f0 = p.f(t0);
    if (f0 <= 0.0) throw PoleError("initial_state: launch at a pole (f(t0) <= 0)");
    return GeodesicState{t0, phi0, std::cos(psi), std::sin(psi) / f0};
}

double clairaut(const Profile& p, const GeodesicState& s) {
    const double f = p.f(s.t);
    return f * f * s.dphi_ds;
}

Trajectory integrate_geodesic(const Profile& p, const GeodesicState& init, double s_max, double tol,
                              double max_step) {
    if (!(tol >= 1e-13 && tol <= 1e-6)) throw ParameterError("integrate_geodesic: tol outside [1e-13, 1e-6]");
    Trajectory traj;
    Y y = to_y(init);
    double s = 0.0;
    const double gamma0 = clairaut(p, init);
    Stepper stepper(p, tol, p.t_plus - p.t_minus);

    traj.s.push_back(s);
    traj.states.push_back(init);
    const double margin = 1e-12 * (p.t_plus - p.t_minus);

    while (s < s_max) {
        const double cap = std::min(s_max - s, max_step > 0.0 ? max_step : s_max);
        Y y_prev = y;
        const double taken = stepper.advance(y, cap);
        if (taken == 0.0) {
            traj.pole_truncated = true;
            break;
        }
        s += taken;
        // Domain-end crossing: bisect the step down to the boundary and stop.
        if (y[0] <= p.t_minus + margin || y[0] >= p.t_plus - margin) {
            double lo = 0.0, hi = taken;
            Y cut = y;
            for (int i = 0; i < 80 && (hi - lo) > 1e-14; ++i) {
                const double mid = 0.5 * (lo + hi);
                const Y k1 = rhs(p, y_prev);
                cut = dopri5_step(p, y_prev, k1, mid, stepper.scale).y;
                if (cut[0] <= p.t_minus + margin || cut[0] >= p.t_plus - margin)
                    hi = mid;
                else
                    lo = mid;
            }
            s += hi - taken;
            y = cut;
            traj.pole_truncated = true;
            traj.s.push_back(s);
            traj.states.push_back(to_state(y));
            break;
        }
        traj.s.push_back(s);
        traj.states.push_back(to_state(y));
        traj.max_unit_drift = std::max(traj.max_unit_drift, unit_speed_defect(p, y));
        traj.max_clairaut_drift = std::max(traj.max_clairaut_drift, std::abs(clairaut(p, to_state(y)) - gamma0));
    }
    return traj;
}

GeodesicState evaluate_at(const Profile& p, const GeodesicState& init, double s, double tol) {
    Trajectory tr = integrate_geodesic(p, init, s, tol);
    return tr.states.back();
}

namespace {

// Event detection: first sign change of event(y) after |event| has once
// exceeded arm_band (launches start exactly on the event surface). On a
// bracketing step the crossing is refined by bisection, each probe being a
// single RK5 step from the step start.
struct EventSearch {
    double s = 0.0;
    Y y;
    bool found = false;
};

template <typename EventFn>
EventSearch find_event(const Profile& p, const Y& y0, EventFn event, double arm_band, double s_max, double tol,
                       double refine_tol) {
    Stepper stepper(p, tol, p.t_plus - p.t_minus);
    Y y = y0;
    double s = 0.0;
    bool armed = false;
    double g_prev = event(y);
    while (s < s_max) {
        const Y y_prev = y;
        const double taken = stepper.advance(y, s_max - s);
        if (taken == 0.0) break;
        s += taken;
        const double g = event(y);
        if (!armed) {
            if (std::abs(g) > arm_band) armed = true;
            g_prev = g;
            continue;
        }
        if (g == 0.0 || (g > 0.0) != (g_prev > 0.0)) {
            double lo = 0.0, hi = taken;
            Y best = y;
            const Y k1 = rhs(p, y_prev);
            double g_lo = g_prev;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                const Y ym = dopri5_step(p, y_prev, k1, mid, stepper.scale).y;
                const double gm = event(ym);
                if (std::abs(gm) <= refine_tol || (hi - lo) < 1e-15 * (1.0 + s)) {
                    best = ym;
                    lo = hi = mid;
                    break;
                }
                if ((gm > 0.0) == (g_lo > 0.0)) {
                    lo = mid;
                    g_lo = gm;
                } else {
                    hi = mid;
                }
            }
            return {s - taken + 0.5 * (lo + hi), best, true};
        }
        g_prev = g;
    }
    return {s, y, false};
}

}  // namespace

ReturnSample first_return(const Profile& p, double psi, double tol, double s_max) {
    return nth_return(p, psi, 1, tol, s_max);
}

ReturnSample nth_return(const Profile& p, double psi, int k, double tol, double s_max) {
    if (!(psi > 0.0 && psi < kPi / 2.0))
        throw ParameterError("first_return: psi must be strictly in (0, pi/2)");
    const auto eq = equator_locate(p, 1e-8);
    if (eq.empty()) throw BracketError("first_return: profile has no equator");
    const double t0 = eq.front().first;

    Y y = to_y(initial_state(p, t0, 0.0, psi));
    double s_total = 0.0;
    const double arm_band = std::max(10.0 * tol, 1e-7);
    for (int crossing = 0; crossing < k; ++crossing) {
        auto ev = find_event(
            p, y, [&](const Y& z) { return z[0] - t0; }, arm_band, s_max - s_total, tol, tol);
        if (!ev.found)
            throw NonReturnError("first_return: no equator crossing before s_max (possibly asymptotic)");
        s_total += ev.s;
        y = ev.y;
    }
    ReturnSample r;
    r.psi = psi;
    r.S = s_total;
    const double raw = y[1];
    double phi = wrap_2pi(raw);
    if (phi == 0.0) phi = kTwoPi;  // reduce to (0, 2*pi]
    r.Phi = (k == 1) ? phi : raw;  // composed returns keep the accumulated longitude
    return r;
}

ZollVerdict zoll_test(const Profile& p, const std::vector<double>& psi_grid, double tol, double s_max) {
    if (psi_grid.size() < 8) throw ParameterError("zoll_test: need a grid of >= 8 angles");
    ZollVerdict v;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (double psi : psi_grid) {
        ReturnSample r = first_return(p, psi, tol, s_max);
        v.samples.push_back(r);
        if (first) {
            lo = hi = r.Phi;
            first = false;
        } else {
            lo = std::min(lo, r.Phi);
            hi = std::max(hi, r.Phi);
        }
    }
    v.spread = hi - lo;
    v.is_zoll = v.spread <= 10.0 * tol;
    return v;
}

RecurrenceVerdict rational_classify(double Phi, long q_max, double eps) {
    if (!std::isfinite(Phi)) throw ParameterError("rational_classify: Phi not finite");
    if (q_max < 1) throw ParameterError("rational_classify: q_max must be >= 1");
    const double x = Phi / kTwoPi;

    // Continued-fraction convergents with the final semiconvergent sweep gives
    // the best rational approximation with denominator <= q_max.
    long p_prev = 1, q_prev = 0;  // h_{-1}/k_{-1}
    long p_cur = static_cast<long>(std::floor(x)), q_cur = 1;
    double frac = x - std::floor(x);
    long best_p = p_cur, best_q = 1;
    double best_d = std::abs(x - static_cast<double>(p_cur));
    auto consider = [&](long pp, long qq) {
        const double d = std::abs(x - static_cast<double>(pp) / static_cast<double>(qq));
        if (d < best_d) {
            best_d = d;
            best_p = pp;
            best_q = qq;
        }
    };
    for (int iter = 0; iter < 64 && frac > 1e-16; ++iter) {
        const double inv = 1.0 / frac;
        const double a_f = std::floor(inv);
        if (a_f > 1e18) break;
        const long a = static_cast<long>(a_f);
        frac = inv - a_f;
        const long p_next = a * p_cur + p_prev;
        const long q_next = a * q_cur + q_prev;
        if (q_next > q_max) {
            // Largest admissible semiconvergent of this step.
            const long kmax = (q_max - q_prev) / q_cur;
            if (kmax >= 1) consider(kmax * p_cur + p_prev, kmax * q_cur + q_prev);
            break;
        }
        consider(p_next, q_next);
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p_next;
        q_cur = q_next;
    }
    RecurrenceVerdict v;
    v.p_over_q = std::make_pair(best_p, best_q);
    v.distance = best_d;
    v.rational = best_d <= eps;
    return v;
}

LoopResult loop_length(const Profile& p, const SurfacePoint& x, const Covector& xi, double delta, double s_max,
                       double tol) {
    if (!(delta > 0.0)) throw ParameterError("loop_length: delta must be positive");
    const double f_x = p.f(x.t);
    if (f_x <= 0.0) throw PoleError("loop_length: base point at a pole");
    const double unit = std::abs(xi.xi_t * xi.xi_t + xi.xi_phi * xi.xi_phi / (f_x * f_x) - 1.0);
    if (unit > 1e-8) throw ParameterError("loop_length: xi is not a unit covector");

    const double theta0 = cosphere_angle(p, x.t, xi);
    GeodesicState init{x.t, x.phi, xi.xi_t, xi.xi_phi / (f_x * f_x)};

    // Metric-weighted chart distance to the base point; valid for small delta.
    auto chart_dist = [&](const GeodesicState& st) {
        const double dt = st.t - x.t;
        const double dphi = wrap_pi(st.phi - x.phi);
        const double fm = p.f(st.t);
        return std::sqrt(dt * dt + fm * fm * dphi * dphi);
    };
    auto direction_gap = [&](const GeodesicState& st) {
        const double th = std::atan2(p.f(st.t) * st.dphi_ds, st.dt_ds);
        return std::abs(wrap_pi(th - theta0));
    };

    // Step cap delta/4 so the ball cannot be crossed unseen.
    Trajectory tr = integrate_geodesic(p, init, s_max, tol, delta / 4.0);

    LoopResult res;
    bool armed = false;   // must leave the ball before a return can count
    bool inside = false;  // for counting distinct entries
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        const double d = chart_dist(tr.states[i]);
        if (!armed) {
            if (d > delta) armed = true;
            continue;
        }
        if (d <= delta) {
            if (!inside) {
                ++res.near_returns;
                inside = true;
            }
            if (direction_gap(tr.states[i]) <= delta) {
                res.closed = true;
                res.length = tr.s[i];
                return res;
            }
        } else {
            inside = false;
        }
    }
    return res;  // infinity marker
}

}  // namespace qci
