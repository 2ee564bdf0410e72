#include "qci/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qci {

std::vector<double> default_radial_grid(const Profile& p, int grid_n) {
    if (grid_n < 200) throw ParameterError("radial grid: grid_n must be >= 200");
    std::vector<double> g(static_cast<std::size_t>(grid_n));
    const double a = p.t_minus, b = p.t_plus;
    for (int i = 0; i < grid_n; ++i) {
        const double u = (i + 1.0) / (grid_n + 1.0);
        g[static_cast<std::size_t>(i)] = a + (b - a) * 0.5 * (1.0 - std::cos(kPi * u));
    }
    return g;
}

ModeProblem make_mode_problem(const Profile& p, int m, int grid_n) {
    if (m < 0) throw ParameterError("mode problem: m must be >= 0");
    ModeProblem prob;
    prob.profile = p;
    prob.m = m;
    prob.grid_n = grid_n;
    prob.grid = default_radial_grid(p, grid_n);
    return prob;
}

RadialOperator assemble(const ModeProblem& problem) {
    const Profile& p = problem.profile;
    const std::vector<double>& t = problem.grid;
    const int n = static_cast<int>(t.size());
    const double m2 = static_cast<double>(problem.m) * static_cast<double>(problem.m);

    RadialOperator op;
    op.grid = t;
    op.diag.assign(static_cast<std::size_t>(n), 0.0);
    op.off.assign(static_cast<std::size_t>(n - 1), 0.0);
    op.weight.assign(static_cast<std::size_t>(n), 0.0);

    // Faces: poles themselves at the ends, midpoints inside.
    std::vector<double> face(static_cast<std::size_t>(n + 1));
    face[0] = p.t_minus;
    face[static_cast<std::size_t>(n)] = p.t_plus;
    for (int i = 1; i < n; ++i)
        face[static_cast<std::size_t>(i)] = 0.5 * (t[static_cast<std::size_t>(i - 1)] + t[static_cast<std::size_t>(i)]);

    std::vector<double> f_node(static_cast<std::size_t>(n)), f_face(static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) {
        f_node[static_cast<std::size_t>(i)] = p.f(t[static_cast<std::size_t>(i)]);
        if (!(f_node[static_cast<std::size_t>(i)] > 0.0))
            throw PoleError("assemble: f <= 0 at an interior grid node");
    }
    for (int i = 0; i <= n; ++i) f_face[static_cast<std::size_t>(i)] = std::max(0.0, p.f(face[static_cast<std::size_t>(i)]));

    for (int i = 0; i < n; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const double w = face[si + 1] - face[si];
        op.weight[si] = f_node[si] * w;
        const double pot = m2 / (f_node[si] * f_node[si]);
        if (!std::isfinite(pot))
            throw ParameterError("assemble: m^2/f^2 overflows at the first node; refine the grid (suggest grid_n >= " +
                                 std::to_string(2 * n) + ")");
        double d = pot * op.weight[si];
        // Left face flux coefficient.
        if (i > 0) {
            const double c = f_face[si] / (t[si] - t[si - 1]);
            d += c;
        } else if (f_face[0] > 1e-12) {
            d += f_face[0] / (t[0] - face[0]);  // Dirichlet wall when no pole
        }
        if (i < n - 1) {
            const double c = f_face[si + 1] / (t[si + 1] - t[si]);
            d += c;
            op.off[si] = -c / std::sqrt(op.weight[si] * f_node[si + 1] * (face[si + 2] - face[si + 1]));
        } else if (f_face[static_cast<std::size_t>(n)] > 1e-12) {
            d += f_face[static_cast<std::size_t>(n)] / (face[static_cast<std::size_t>(n)] - t[si]);
        }
        op.diag[si] = d / op.weight[si];
    }
    return op;
}

namespace {

// Number of eigenvalues of the symmetric tridiagonal operator below x
// (Sturm sequence via LDL^T pivot signs).
int sturm_count(const RadialOperator& op, double x) {
    const std::size_t n = op.diag.size();
    int count = 0;
    double d = op.diag[0] - x;
    if (d < 0.0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
        const double e = op.off[i - 1];
        if (d == 0.0) d = 1e-300;
        d = (op.diag[i] - x) - e * e / d;
        if (d < 0.0) ++count;
    }
    return count;
}

}  // namespace

double eigenvalue(const RadialOperator& op, int k) {
    const std::size_t n = op.diag.size();
    if (k < 0 || static_cast<std::size_t>(k) >= n) throw ParameterError("eigenvalue: index out of range");
    // Gershgorin bounds.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(op.off[i - 1]);
        if (i + 1 < n) r += std::abs(op.off[i]);
        lo = std::min(lo, op.diag[i] - r);
        hi = std::max(hi, op.diag[i] + r);
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(op, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Inverse iteration for the eigenvector at (close to) eigenvalue lam.
// Tridiagonal solve with partial pivoting; deterministic start vector.
std::vector<double> inverse_iteration(const RadialOperator& op, double lam) {
    const std::size_t n = op.diag.size();
    std::vector<double> v(n);
    Rng rng(0x5eedbeefULL);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.next_double() - 0.5;

    const double shift = lam * (1.0 + 1e-14) + 1e-300;
    for (int sweep = 0; sweep < 4; ++sweep) {
        // LU of (A - shift I) with partial pivoting (band width 2).
        std::vector<double> d(n), e(n, 0.0), f2(n, 0.0), lmul(n, 0.0);
        std::vector<int> piv(n, 0);
        for (std::size_t i = 0; i < n; ++i) d[i] = op.diag[i] - shift;
        for (std::size_t i = 0; i + 1 < n; ++i) e[i] = op.off[i];
        std::vector<double> sub(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) sub[i + 1] = op.off[i];

        std::vector<double> rhs = v;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::abs(sub[i + 1]) > std::abs(d[i])) {
                piv[i] = 1;
                std::swap(d[i], sub[i + 1]);
                std::swap(e[i], d[i + 1]);
                if (i + 2 < n) {
                    f2[i] = e[i + 1];
                    e[i + 1] = 0.0;
                }
                std::swap(rhs[i], rhs[i + 1]);
            }
            const double piv_d = (d[i] == 0.0) ? 1e-300 : d[i];
            const double mult = sub[i + 1] / piv_d;
            lmul[i] = mult;
            d[i + 1] -= mult * e[i];
            if (i + 2 < n) e[i + 1] -= mult * f2[i];
            rhs[i + 1] -= mult * rhs[i];
        }
        // Back substitution.
        std::vector<double> x(n, 0.0);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = rhs[ii];
            if (ii + 1 < n) s -= e[ii] * x[ii + 1];
            if (ii + 2 < n) s -= f2[ii] * x[ii + 2];
            const double piv_d = (d[ii] == 0.0) ? 1e-300 : d[ii];
            x[ii] = s / piv_d;
        }
        double nx = 0.0;
        for (double xv : x) nx += xv * xv;
        nx = std::sqrt(nx);
        for (std::size_t i = 0; i < n; ++i) v[i] = x[i] / nx;
    }
    return v;
}

}  // namespace

double l2_norm_squared(const Profile& p, const std::vector<double>& grid, const std::vector<double>& T) {
    // Composite trapezoid including the pole endpoints (integrand f T^2 -> 0).
    const std::size_t n = grid.size();
    auto integrand = [&](std::size_t i) { return p.f(grid[i]) * T[i] * T[i]; };
    double s = 0.0;
    s += integrand(0) * (grid[0] - p.t_minus);  // triangle from the left endpoint
    for (std::size_t i = 0; i + 1 < n; ++i) s += 0.5 * (integrand(i) + integrand(i + 1)) * (grid[i + 1] - grid[i]);
    s += integrand(n - 1) * (p.t_plus - grid[n - 1]);
    return kTwoPi * s;
}

int sign_changes(const std::vector<double>& T) {
    // Samples below the noise floor (inverse-iteration residual scale) are
    // skipped so exponentially small tails do not register spurious flips.
    const double floor_mag = 1e-11 * (*std::max_element(T.begin(), T.end(), [](double a, double b) {
                                 return std::abs(a) < std::abs(b);
                             }));
    int changes = 0;
    double prev = 0.0;
    for (double v : T) {
        if (std::abs(v) <= std::abs(floor_mag)) continue;
        if (prev != 0.0 && (v > 0.0) != (prev > 0.0)) ++changes;
        prev = v;
    }
    return changes;
}

Mode eigenmode(const ModeProblem& problem, const RadialOperator& op, int k) {
    Mode mode;
    mode.m = problem.m;
    mode.index = k;
    mode.grid = problem.grid;
    const double lam2 = eigenvalue(op, k);
    std::vector<double> u = inverse_iteration(op, lam2);
    mode.T.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) mode.T[i] = u[i] / std::sqrt(op.weight[i]);
    const double nrm2 = l2_norm_squared(problem.profile, mode.grid, mode.T);
    if (!(nrm2 > 0.0)) throw NumericError("eigenmode: vanishing L2 norm");
    const double c = 1.0 / std::sqrt(nrm2);
    for (double& v : mode.T) v *= c;
    // Fix an overall sign: positive at the grid max of |T|.
    std::size_t imax = 0;
    for (std::size_t i = 0; i < mode.T.size(); ++i)
        if (std::abs(mode.T[i]) > std::abs(mode.T[imax])) imax = i;
    if (mode.T[imax] < 0.0)
        for (double& v : mode.T) v = -v;
    mode.l2_norm = 1.0;
    mode.lambda = std::sqrt(std::max(0.0, lam2));
    return mode;
}

double eigenvalue_extrapolated(const Profile& p, int m, int index, int grid_n) {
    const double coarse = eigenvalue(assemble(make_mode_problem(p, m, grid_n / 2)), index);
    const double fine = eigenvalue(assemble(make_mode_problem(p, m, grid_n)), index);
    return (4.0 * fine - coarse) / 3.0;  // second-order scheme
}

Mode solve_highest_weight(const Profile& p, int m, int grid_n) {
    if (m < 1) throw ParameterError("solve_highest_weight: m must be >= 1");
    ModeProblem prob = make_mode_problem(p, m, grid_n);
    RadialOperator op = assemble(prob);
    Mode mode = eigenmode(prob, op, 0);
    mode.lambda = std::sqrt(std::max(0.0, eigenvalue_extrapolated(p, m, 0, grid_n)));
    return mode;
}

SupNormProfile sup_norm_profile(const Mode& mode, const Profile& p) {
    SupNormProfile out;
    const std::vector<double>& T = mode.T;
    const std::vector<double>& t = mode.grid;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < T.size(); ++i)
        if (std::abs(T[i]) > std::abs(T[imax])) imax = i;
    out.sup = std::abs(T[imax]);
    out.argmax_t = t[imax];
    if (imax > 0 && imax + 1 < T.size()) {
        // 3-point parabolic refinement on |T| near the peak.
        const double y0 = std::abs(T[imax - 1]), y1 = std::abs(T[imax]), y2 = std::abs(T[imax + 1]);
        const double x0 = t[imax - 1], x1 = t[imax], x2 = t[imax + 1];
        const double d1 = (y1 - y0) / (x1 - x0), d2 = (y2 - y1) / (x2 - x1);
        const double dd = (d2 - d1) / (x2 - x0);
        if (dd < 0.0) {
            const double xv = 0.5 * (x0 + x1 - d1 / dd);
            if (xv > x0 && xv < x2) {
                out.argmax_t = xv;
                // Interpolating parabola in Newton form.
                out.sup = y0 + d1 * (xv - x0) + dd * (xv - x0) * (xv - x1);
            }
        }
    }
    const auto eq = equator_locate(p, 1e-8);
    if (!eq.empty()) {
        const double t0 = eq.front().first;
        // |T| at the grid node nearest to the equator, linearly interpolated.
        const auto it = std::lower_bound(t.begin(), t.end(), t0);
        if (it == t.begin())
            out.at_equator = std::abs(T.front());
        else if (it == t.end())
            out.at_equator = std::abs(T.back());
        else {
            const std::size_t i = static_cast<std::size_t>(it - t.begin());
            const double w = (t0 - t[i - 1]) / (t[i] - t[i - 1]);
            out.at_equator = std::abs((1.0 - w) * T[i - 1] + w * T[i]);
        }
    }
    return out;
}

std::vector<int> highest_weight_family() { return {20, 30, 45, 67, 100, 150, 225}; }

std::vector<std::pair<double, double>> highest_weight_sup_series(const Profile& p, const std::vector<int>& ms) {
    std::vector<std::pair<double, double>> out;
    for (int m : ms) {
        const int grid_n = std::max(2000, 24 * m);
        Mode mode = solve_highest_weight(p, m, grid_n);
        SupNormProfile s = sup_norm_profile(mode, p);
        out.emplace_back(mode.lambda, s.sup);
    }
    return out;
}

}  // namespace qci
