#include "qci/quasimode.hpp"

#include <algorithm>
#include <cmath>

namespace qci {

namespace {

// Adaptive Simpson with absolute tolerance. The child tolerance is floored at
// the local floating-point noise of the interval estimate, otherwise rounding
// noise in the integrand (e.g. the 1 - f^2 cancellation near the equator)
// makes the halved tolerance unreachable and the recursion explodes.
double adaptive_simpson(const RealFn& g, double a, double b, double eps, double whole, double fa, double fm,
                        double fb, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = g(lm), frm = g(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
        return left + right + (left + right - whole) / 15.0;
    const double child_eps = std::max(0.5 * eps, 1e-16 * std::abs(whole));
    return adaptive_simpson(g, a, m, child_eps, left, fa, flm, fm, depth - 1) +
           adaptive_simpson(g, m, b, child_eps, right, fm, frm, fb, depth - 1);
}

// rel_eps is relative to the coarse estimate (floored near machine zero) so
// tiny near-equator integrals keep full relative accuracy.
double integrate(const RealFn& g, double a, double b, double rel_eps) {
    if (a == b) return 0.0;
    const double fa = g(a), fm = g(0.5 * (a + b)), fb = g(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double eps = std::max(std::abs(whole) * rel_eps, 1e-18);
    return adaptive_simpson(g, a, b, eps, whole, fa, fm, fb, 30);
}

double equator_of(const Profile& p) {
    const auto eq = equator_locate(p, 1e-8);
    if (eq.size() != 1) throw ParameterError("quasimode: profile must have exactly one equator");
    return eq.front().first;
}

}  // namespace

std::vector<double> default_quasimode_grid(const Profile& p, double lambda) {
    const double t0 = equator_of(p);
    auto decay = [&](double t) {
        const double f = p.f(t);
        return std::sqrt(std::max(0.0, 1.0 - f * f)) / f;
    };
    // Expand until lambda * A ~ 45 (or a pole margin stops us).
    const double margin_lo = t0 - (t0 - p.t_minus) * 0.96;
    const double margin_hi = t0 + (p.t_plus - t0) * 0.96;
    double w = 1.0 / std::sqrt(lambda);
    double a_hi = 0.0;
    while (t0 + w < margin_hi && t0 - w > margin_lo) {
        a_hi = integrate([&](double tau) { return decay(t0 + tau * tau) * 2.0 * tau; }, 0.0, std::sqrt(w), 1e-10);
        if (lambda * a_hi >= 45.0) break;
        w *= 1.25;
    }
    w = std::min({w, t0 - margin_lo, margin_hi - t0});
    const double spacing = 1.0 / (10.0 * lambda);
    int half = static_cast<int>(std::ceil(w / spacing));
    half = std::min(half, 60000);
    std::vector<double> grid(static_cast<std::size_t>(2 * half + 1));
    for (int i = -half; i <= half; ++i) grid[static_cast<std::size_t>(i + half)] = t0 + i * (w / half);
    return grid;
}

QuasimodeField build(const Profile& p, double lambda, const std::vector<double>& grid) {
    if (!p.cap_at_one) throw ParameterError("quasimode build: profile must assert cap_at_one (f <= 1)");
    if (lambda < 10.0) throw ParameterError("quasimode build: lambda must be >= 10");
    const double t0 = equator_of(p);
    if (std::abs(p.f(t0) - 1.0) > 1e-10)
        throw ParameterError("quasimode build: f(t0) != 1 at the equator (no unit equator)");

    QuasimodeField q;
    q.lambda = lambda;
    q.t0 = t0;
    q.grid = grid;
    q.A.resize(grid.size());
    q.u_abs.resize(grid.size());

    auto decay = [&](double t) {
        const double f = p.f(t);
        if (f > 1.0 + 1e-10) throw ParameterError("quasimode build: f > 1 inside the domain (cap violated)");
        if (f <= 0.0) throw PoleError("quasimode build: grid reaches a pole");
        return std::sqrt(std::max(0.0, 1.0 - f * f)) / f;
    };

    // A via the tau^2 substitution from the equator: smooth integrand on each
    // side. Accumulated per grid segment in tau; the integrand is nonnegative,
    // so per-segment relative tolerance 1e-13 keeps the running sums at
    // ~1e-12 relative accuracy.
    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(grid[a] - t0) < std::abs(grid[b] - t0); });
    double acc_plus = 0.0, acc_minus = 0.0, tau_plus = 0.0, tau_minus = 0.0;
    for (std::size_t i : order) {
        const double t = grid[i];
        const double sign = (t >= t0) ? 1.0 : -1.0;
        const double tau = std::sqrt(std::abs(t - t0));
        double& acc = (sign > 0.0) ? acc_plus : acc_minus;
        double& tau_prev = (sign > 0.0) ? tau_plus : tau_minus;
        acc += integrate([&](double u) { return decay(t0 + sign * u * u) * 2.0 * u; }, tau_prev, tau, 1e-13);
        tau_prev = tau;
        q.A[i] = acc;
        q.u_abs[i] = std::pow(lambda, 0.25) * std::exp(-lambda * acc);
    }
    return q;
}

ResidualReport residual_analytic(const Profile& p, const QuasimodeField& q) {
    const double h = 1.0 / q.lambda;
    const double d2f0 = p.d2f(q.t0);
    if (!(d2f0 < 0.0)) throw ParameterError("residual_analytic: f''(t0) must be negative at the equator");
    const double r_limit = std::sqrt(-d2f0);

    // r(t) = |f'| / sqrt(1 - f^2); Taylor limit within 1e-4 of the equator.
    double max_ratio = 0.0;  // sup of r(t) e^{-lambda A}
    double u_peak = 0.0;
    for (std::size_t i = 0; i < q.grid.size(); ++i) {
        const double t = q.grid[i];
        double r;
        if (std::abs(t - q.t0) <= 1e-4) {
            r = r_limit;
        } else {
            const double f = p.f(t);
            const double one_m_f2 = std::max(0.0, 1.0 - f * f);
            if (one_m_f2 <= 0.0) continue;  // isolated cap-touching point off-equator
            r = std::abs(p.df(t)) / std::sqrt(one_m_f2);
            if (!(r < 1e6))
                throw ParameterError("residual_analytic: |f'|/sqrt(1-f^2) unbounded on the grid");
        }
        max_ratio = std::max(max_ratio, r * q.u_abs[i]);
        u_peak = std::max(u_peak, q.u_abs[i]);
    }
    ResidualReport rep;
    rep.h = h;
    rep.analytic_sup = h * max_ratio / u_peak;
    return rep;
}

ResidualReport residual_numeric(const Profile& p, const QuasimodeField& q) {
    ResidualReport rep = residual_analytic(p, q);
    const std::vector<double>& t = q.grid;
    const std::vector<double>& u = q.u_abs;
    const std::size_t n = t.size();
    if (n < 9) throw ResolutionError("residual_numeric: grid too small");
    const double dt = t[1] - t[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (std::abs((t[i + 1] - t[i]) - dt) > 1e-9 * dt)
            throw ResolutionError("residual_numeric: grid must be uniform");
    }
    const double required = 1.0 / (10.0 * q.lambda);
    if (dt > required * (1.0 + 1e-9))
        throw ResolutionError("residual_numeric: grid too coarse near the equator; need spacing <= " +
                              fmt_g17(required));

    const double h = 1.0 / q.lambda;
    const double lam2 = q.lambda * q.lambda;
    double max_defect = 0.0, u_peak = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double upp =
            (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * dt * dt);
        const double up = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * dt);
        const double f = p.f(t[i]);
        const double lap = upp + (p.df(t[i]) / f) * up - lam2 / (f * f) * u[i];
        const double defect = std::abs(-h * h * lap - u[i]);
        max_defect = std::max(max_defect, defect);
        u_peak = std::max(u_peak, u[i]);
    }
    rep.numeric_sup = max_defect / u_peak;
    rep.agreement = std::abs(rep.numeric_sup - rep.analytic_sup) / rep.analytic_sup;
    return rep;
}

double normalized_sup(const Profile& p, const QuasimodeField& q) {
    // 2*pi int u^2 f dt by trapezoid on the field grid.
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < q.grid.size(); ++i) {
        const double a = q.u_abs[i] * q.u_abs[i] * p.f(q.grid[i]);
        const double b = q.u_abs[i + 1] * q.u_abs[i + 1] * p.f(q.grid[i + 1]);
        s += 0.5 * (a + b) * (q.grid[i + 1] - q.grid[i]);
    }
    const double norm = std::sqrt(kTwoPi * s);
    double peak = 0.0;
    for (double v : q.u_abs) peak = std::max(peak, v);
    return peak / norm;
}

std::vector<double> quasimode_lambda_family() { return {50.0, 75.0, 112.0, 169.0, 253.0, 380.0}; }

QuasimodeScalings defect_and_sup_scaling(const Profile& p, const std::vector<double>& lambdas) {
    if (lambdas.size() < 5) throw ParameterError("defect_and_sup_scaling: need >= 5 lambdas");
    QuasimodeScalings out;
    std::vector<std::pair<double, double>> sup_samples, defect_samples;
    for (double lam : lambdas) {
        const std::vector<double> grid = default_quasimode_grid(p, lam);
        const QuasimodeField q = build(p, lam, grid);
        const ResidualReport rep = residual_numeric(p, q);
        sup_samples.emplace_back(lam, normalized_sup(p, q));
        defect_samples.emplace_back(lam, rep.analytic_sup);
        out.agreements.push_back(rep.agreement);
    }
    out.sup_fit = fit_scaling(sup_samples);
    out.defect_fit = fit_scaling(defect_samples);
    return out;
}

}  // namespace qci
