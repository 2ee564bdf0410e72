#include "qci/momentmap.hpp"

#include <algorithm>
#include <cmath>

namespace qci {

namespace {

double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Point& a) { return std::sqrt(dot(a, a)); }

Point scaled(const Point& a, double c) {
    Point r = a;
    for (double& v : r) v *= c;
    return r;
}

void axpy(Point& y, double c, const Point& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

// Orthonormal basis of the orthogonal complement of span{removed} in R^d,
// by modified Gram-Schmidt over the coordinate axes. Deterministic.
std::vector<Point> orthogonal_complement(int d, const std::vector<Point>& removed) {
    std::vector<Point> ortho;  // orthonormalized removed vectors
    for (const Point& v : removed) {
        Point w = v;
        for (const Point& u : ortho) axpy(w, -dot(w, u), u);
        const double nw = norm(w);
        if (nw > 1e-12) ortho.push_back(scaled(w, 1.0 / nw));
    }
    std::vector<Point> basis;
    for (int i = 0; i < d; ++i) {
        Point w(static_cast<std::size_t>(d), 0.0);
        w[static_cast<std::size_t>(i)] = 1.0;
        for (const Point& u : ortho) axpy(w, -dot(w, u), u);
        for (const Point& u : basis) axpy(w, -dot(w, u), u);
        const double nw = norm(w);
        if (nw > 1e-10) basis.push_back(scaled(w, 1.0 / nw));
    }
    return basis;
}

// Jacobi eigenvalues of a small symmetric matrix (row-major, d x d).
std::vector<double> symmetric_eigenvalues(std::vector<double> m, int d) {
    auto at = [&](int i, int j) -> double& { return m[static_cast<std::size_t>(i * d + j)]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-30) break;
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                if (std::abs(at(i, j)) < 1e-300) continue;
                const double tau = (at(j, j) - at(i, i)) / (2.0 * at(i, j));
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t), s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double mik = at(i, k), mjk = at(j, k);
                    at(i, k) = c * mik - s * mjk;
                    at(j, k) = s * mik + c * mjk;
                }
                for (int k = 0; k < d; ++k) {
                    const double mki = at(k, i), mkj = at(k, j);
                    at(k, i) = c * mki - s * mkj;
                    at(k, j) = s * mki + c * mkj;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) eig[static_cast<std::size_t>(i)] = at(i, i);
    return eig;
}

// Singular values (descending) of the rows-by-cols matrix given as row vectors.
std::vector<double> singular_values(const std::vector<Point>& rows) {
    if (rows.empty()) return {};
    const int r = static_cast<int>(rows.size());
    const int c = static_cast<int>(rows[0].size());
    const int d = std::min(r, c);
    std::vector<double> gram(static_cast<std::size_t>(d * d), 0.0);
    if (r <= c) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) gram[static_cast<std::size_t>(i * r + j)] = dot(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    } else {
        for (int i = 0; i < c; ++i)
            for (int j = 0; j < c; ++j) {
                double s = 0.0;
                for (int k = 0; k < r; ++k)
                    s += rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                         rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                gram[static_cast<std::size_t>(i * c + j)] = s;
            }
    }
    std::vector<double> eig = symmetric_eigenvalues(gram, d);
    for (double& v : eig) v = std::sqrt(std::max(0.0, v));
    std::sort(eig.begin(), eig.end(), std::greater<double>());
    return eig;
}

}  // namespace

SymbolSystem make_sor_system(const Profile& profile) {
    SymbolSystem sys;
    sys.n = 2;
    sys.dim_x = 2;
    sys.dim_xi = 2;
    sys.homogeneity = 2;
    sys.label = "sor";
    const Profile p = profile;
    sys.p.push_back([p](const Point& x, const Point& xi) {
        const double f = p.f(x[0]);
        return xi[0] * xi[0] + xi[1] * xi[1] / (f * f);
    });
    sys.p.push_back([](const Point&, const Point& xi) { return xi[1]; });
    sys.grad_xi.push_back([p](const Point& x, const Point& xi) {
        const double f = p.f(x[0]);
        return Point{2.0 * xi[0], 2.0 * xi[1] / (f * f)};
    });
    sys.grad_xi.push_back([](const Point&, const Point&) { return Point{0.0, 1.0}; });
    return sys;
}

SymbolSystem make_liouville_system(RealFn a, RealFn da, RealFn b, RealFn db) {
    // Liouville condition min a > max b, checked on a sample grid.
    double min_a = a(0.0), max_b = b(0.0);
    for (int i = 0; i <= 512; ++i) {
        const double x = static_cast<double>(i) / 512.0;
        min_a = std::min(min_a, a(x));
        max_b = std::max(max_b, b(x));
    }
    if (!(min_a > max_b))
        throw ParameterError("liouville_torus: requires min a(x1) > max b(x2) on the torus");
    (void)da;
    (void)db;

    SymbolSystem sys;
    sys.n = 2;
    sys.dim_x = 2;
    sys.dim_xi = 2;
    sys.homogeneity = 2;
    sys.label = "liouville_torus";
    sys.p.push_back([a, b](const Point& x, const Point& xi) {
        return (xi[0] * xi[0] + xi[1] * xi[1]) / (a(x[0]) + b(x[1]));
    });
    sys.p.push_back([a, b](const Point& x, const Point& xi) {
        return (b(x[1]) * xi[0] * xi[0] - a(x[0]) * xi[1] * xi[1]) / (a(x[0]) + b(x[1]));
    });
    sys.grad_xi.push_back([a, b](const Point& x, const Point& xi) {
        const double s = a(x[0]) + b(x[1]);
        return Point{2.0 * xi[0] / s, 2.0 * xi[1] / s};
    });
    sys.grad_xi.push_back([a, b](const Point& x, const Point& xi) {
        const double s = a(x[0]) + b(x[1]);
        return Point{2.0 * b(x[1]) * xi[0] / s, -2.0 * a(x[0]) * xi[1] / s};
    });
    return sys;
}

SymbolSystem make_ellipsoid_system(double a1, double a2, double a3) {
    if (!(0.0 < a3 && a3 < a2 && a2 < a1))
        throw ParameterError("ellipsoid: semiaxis coefficients must satisfy 0 < a3 < a2 < a1");
    SymbolSystem sys;
    sys.n = 2;
    sys.dim_x = 3;
    sys.dim_xi = 3;
    sys.homogeneity = 2;
    sys.label = "ellipsoid";
    // Angular-momentum components: u = x1 xi2 - x2 xi1, v = x1 xi3 - x3 xi1,
    // w = x3 xi2 - x2 xi3. H = a3 u^2 + a2 v^2 + a1 w^2, P with unit weights.
    auto uvw = [](const Point& x, const Point& xi, double& u, double& v, double& w) {
        u = x[0] * xi[1] - x[1] * xi[0];
        v = x[0] * xi[2] - x[2] * xi[0];
        w = x[2] * xi[1] - x[1] * xi[2];
    };
    sys.p.push_back([a1, a2, a3, uvw](const Point& x, const Point& xi) {
        double u, v, w;
        uvw(x, xi, u, v, w);
        return a3 * u * u + a2 * v * v + a1 * w * w;
    });
    sys.p.push_back([uvw](const Point& x, const Point& xi) {
        double u, v, w;
        uvw(x, xi, u, v, w);
        return u * u + v * v + w * w;
    });
    auto grad = [uvw](double c3, double c2, double c1) {
        return [=](const Point& x, const Point& xi) {
            double u, v, w;
            uvw(x, xi, u, v, w);
            return Point{-2.0 * c3 * u * x[1] - 2.0 * c2 * v * x[2],
                         2.0 * c3 * u * x[0] + 2.0 * c1 * w * x[2],
                         2.0 * c2 * v * x[0] - 2.0 * c1 * w * x[1]};
        };
    };
    sys.grad_xi.push_back(grad(a3, a2, a1));
    sys.grad_xi.push_back(grad(1.0, 1.0, 1.0));
    sys.fiber_normal = [](const Point& x) { return x; };  // x . xi = 0
    return sys;
}

SymbolSystem make_flat_torus_system(int n, const std::vector<int>& momentum_indices) {
    if (n < 2) throw ParameterError("flat_torus: dimension must be >= 2");
    if (static_cast<int>(momentum_indices.size()) != n - 1)
        throw ParameterError("flat_torus: need exactly n-1 momentum indices");
    std::vector<int> seen;
    for (int idx : momentum_indices) {
        if (idx < 1 || idx > n) throw ParameterError("flat_torus: momentum index out of range");
        if (std::find(seen.begin(), seen.end(), idx) != seen.end())
            throw ParameterError("flat_torus: duplicate momentum index");
        seen.push_back(idx);
    }
    SymbolSystem sys;
    sys.n = n;
    sys.dim_x = n;
    sys.dim_xi = n;
    sys.homogeneity = 1;
    sys.label = "flat_torus";
    sys.p.push_back([](const Point&, const Point& xi) {
        double s = 0.0;
        for (double v : xi) s += v * v;
        return std::sqrt(s);
    });
    sys.grad_xi.push_back([](const Point&, const Point& xi) {
        double s = 0.0;
        for (double v : xi) s += v * v;
        const double r = std::sqrt(s);
        Point g = xi;
        for (double& v : g) v /= r;
        return g;
    });
    for (int idx : momentum_indices) {
        const std::size_t j = static_cast<std::size_t>(idx - 1);
        sys.p.push_back([j](const Point&, const Point& xi) { return xi[j]; });
        sys.grad_xi.push_back([j, n](const Point&, const Point&) {
            Point g(static_cast<std::size_t>(n), 0.0);
            g[j] = 1.0;
            return g;
        });
    }
    return sys;
}

SymbolSystem build_system(SystemName name, const SystemParams& params) {
    switch (name) {
        case SystemName::sor:
            if (!params.profile) throw ParameterError("sor system: missing profile");
            return make_sor_system(*params.profile);
        case SystemName::liouville_torus:
            if (!params.a || !params.b) throw ParameterError("liouville_torus: missing a/b");
            return make_liouville_system(params.a, params.da, params.b, params.db);
        case SystemName::ellipsoid:
            return make_ellipsoid_system(params.a1, params.a2, params.a3);
        case SystemName::flat_torus:
            return make_flat_torus_system(params.n, params.momentum_indices);
    }
    throw ParameterError("build_system: unknown system name");
}

Point cosphere_solve(const SymbolSystem& sys, const Point& x, const Point& direction, double E1) {
    if (norm(direction) == 0.0) throw ParameterError("cosphere_solve: zero direction");
    double c = 1.0;
    for (int iter = 0; iter < 50; ++iter) {
        const Point xi = scaled(direction, c);
        const double r = sys.p[0](x, xi) - E1;
        if (std::abs(r) <= 1e-12) return xi;
        const double slope = dot(sys.grad_xi[0](x, xi), direction);
        if (slope == 0.0) break;
        double c_next = c - r / slope;
        if (!(c_next > 0.0)) c_next = 0.5 * c;
        c = c_next;
    }
    throw SolveError("cosphere_solve: Newton did not converge in 50 steps");
}

RankReport rank_at(const SymbolSystem& sys, const Point& x, const Point& xi, double tol,
                   bool project_tangential) {
    if (!(tol >= 1e-12 && tol <= 1e-2)) throw ParameterError("rank_at: tol outside [1e-12, 1e-2]");

    std::vector<Point> removed;
    if (sys.fiber_normal) removed.push_back(sys.fiber_normal(x));

    // Principal type: the p1 gradient must not vanish (within the fiber).
    Point g1 = sys.grad_xi[0](x, xi);
    {
        Point g1f = g1;
        for (const Point& nrm : removed) {
            Point u = scaled(nrm, 1.0 / norm(nrm));
            axpy(g1f, -dot(g1f, u), u);
        }
        if (norm(g1f) < 1e-12)
            throw PrincipalTypeError("rank_at: grad_xi p1 = 0 (not of real principal type here)");
    }
    removed.push_back(g1);

    RankReport rep;
    rep.tangent_basis = orthogonal_complement(sys.dim_xi, removed);
    const std::vector<Point>& basis =
        project_tangential ? rep.tangent_basis : orthogonal_complement(sys.dim_xi, sys.fiber_normal
                                                                                        ? std::vector<Point>{sys.fiber_normal(x)}
                                                                                        : std::vector<Point>{});

    std::vector<Point> rows;
    for (int j = 1; j < sys.n; ++j) {
        const Point g = sys.grad_xi[static_cast<std::size_t>(j)](x, xi);
        Point coords(basis.size(), 0.0);
        for (std::size_t b = 0; b < basis.size(); ++b) coords[b] = dot(g, basis[b]);
        rows.push_back(coords);
    }
    rep.singular_values = singular_values(rows);
    const double sigma_max = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
    rep.tol_used = tol * std::max(sigma_max, 1.0);
    rep.rank = static_cast<int>(std::count_if(rep.singular_values.begin(), rep.singular_values.end(),
                                              [&](double s) { return s > rep.tol_used; }));
    return rep;
}

Point cosphere_ellipse_point(const SymbolSystem& sys, const Point& x, double theta, double E1) {
    if (sys.fiber_normal || sys.dim_xi == 2) {
        // Orthonormal fiber basis (coordinate axes in 2-D; complement of the
        // constraint normal for the ellipsoid).
        std::vector<Point> removed;
        if (sys.fiber_normal) removed.push_back(sys.fiber_normal(x));
        const std::vector<Point> basis = orthogonal_complement(sys.dim_xi, removed);
        if (basis.size() != 2) throw ParameterError("cosphere_ellipse_point: fiber is not 2-dimensional");
        const Point& u = basis[0];
        const Point& v = basis[1];
        if (sys.homogeneity == 2) {
            // p1 restricted to the fiber is the quadratic form
            //   M = [p1(u), B; B, p1(v)], B by polarization.
            const double muu = sys.p[0](x, u);
            const double mvv = sys.p[0](x, v);
            Point upv = u;
            axpy(upv, 1.0, v);
            const double muv = 0.5 * (sys.p[0](x, upv) - muu - mvv);
            // Symmetric inverse square root of M.
            const double tr = muu + mvv, det = muu * mvv - muv * muv;
            if (!(det > 0.0)) throw SolveError("cosphere_ellipse_point: p1 fiber form not positive definite");
            const double s = std::sqrt(det);
            const double r = std::sqrt(tr + 2.0 * s);
            // M^(1/2) = (M + s I) / r; invert the 2x2.
            const double q11 = (muu + s) / r, q12 = muv / r, q22 = (mvv + s) / r;
            const double qdet = q11 * q22 - q12 * q12;
            const double w1 = std::cos(theta), w2 = std::sin(theta);
            const double c1 = (q22 * w1 - q12 * w2) / qdet;
            const double c2 = (-q12 * w1 + q11 * w2) / qdet;
            Point xi(static_cast<std::size_t>(sys.dim_xi), 0.0);
            axpy(xi, c1 * std::sqrt(E1), u);
            axpy(xi, c2 * std::sqrt(E1), v);
            return xi;
        }
        // Degree-1 systems (flat torus n = 2): the cosphere is the circle.
        Point xi(static_cast<std::size_t>(sys.dim_xi), 0.0);
        axpy(xi, E1 * std::cos(theta), u);
        axpy(xi, E1 * std::sin(theta), v);
        return xi;
    }
    throw ParameterError("cosphere_ellipse_point: only 2-D fibers are parametrized by theta");
}

RankScanSummary rank_scan(const SymbolSystem& sys, const Point& x, int samples, double tol) {
    if (samples < 4) throw ParameterError("rank_scan: need at least 4 samples");
    RankScanSummary sum;
    const bool two_dim = sys.fiber_normal || sys.dim_xi == 2;
    for (int i = 0; i < samples; ++i) {
        RankScanEntry e;
        Point xi;
        if (two_dim) {
            e.theta = kTwoPi * i / samples;
            xi = cosphere_ellipse_point(sys, x, e.theta);
        } else {
            // Fibonacci sphere design on S^(n-1), n = 3 in the bundled cases;
            // for n > 3 the polar-angle pair is reused across the extra axes.
            e.theta = static_cast<double>(i);
            const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
            const double z = 1.0 - 2.0 * (i + 0.5) / samples;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double ang = kTwoPi * i / golden;
            Point dir(static_cast<std::size_t>(sys.dim_xi), 0.0);
            dir[0] = r * std::cos(ang);
            dir[1] = z;
            dir[2] = r * std::sin(ang);
            xi = cosphere_solve(sys, x, dir);
        }
        const RankReport rep = rank_at(sys, x, xi, tol);
        e.rank = rep.rank;
        e.singular_values = rep.singular_values;
        sum.entries.push_back(e);
    }
    sum.min_rank = sum.entries.front().rank;
    sum.max_rank = sum.entries.front().rank;
    for (const auto& e : sum.entries) {
        sum.min_rank = std::min(sum.min_rank, e.rank);
        sum.max_rank = std::max(sum.max_rank, e.rank);
    }
    for (const auto& e : sum.entries)
        if (e.rank < sum.max_rank) sum.degenerate.push_back(e);
    return sum;
}

MorseReport morse_check(const SymbolSystem& sys, const Combiner& combiner, const Point& x, int grid,
                        double tol) {
    if (grid < 16) throw ParameterError("morse_check: grid too coarse (< 16)");
    auto q = [&](double theta) {
        const Point xi = cosphere_ellipse_point(sys, x, theta);
        std::vector<double> pv(static_cast<std::size_t>(sys.n));
        for (int j = 0; j < sys.n; ++j) pv[static_cast<std::size_t>(j)] = sys.p[static_cast<std::size_t>(j)](x, xi);
        return combiner(pv);
    };
    const double h = kTwoPi / grid;
    const double fd_h = h / 8.0;
    auto dq = [&](double theta) { return (q(theta + fd_h) - q(theta - fd_h)) / (2.0 * fd_h); };

    MorseReport rep;
    auto record = [&](double theta_c) {
        MorseCritical c;
        c.theta = wrap_2pi(theta_c);
        c.value = q(c.theta);
        c.second_derivative = (q(c.theta + fd_h) - 2.0 * q(c.theta) + q(c.theta - fd_h)) / (fd_h * fd_h);
        const Point xi = cosphere_ellipse_point(sys, x, c.theta);
        c.rank_degenerate = rank_at(sys, x, xi, 1e-8).rank < sys.n - 1;
        rep.critical_points.push_back(c);
    };

    double prev_theta = 0.0;
    double prev_d = dq(0.0);
    if (prev_d == 0.0) record(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double theta = h * i;
        const double d = dq(theta);
        if (d == 0.0) {
            record(theta);
        } else if (prev_d != 0.0 && (d > 0.0) != (prev_d > 0.0)) {
            double lo = prev_theta, hi = theta, dlo = prev_d;
            for (int it = 0; it < 128 && (hi - lo) > 1e-13; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double dm = dq(mid);
                if (dm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((dm > 0.0) == (dlo > 0.0)) {
                    lo = mid;
                    dlo = dm;
                } else {
                    hi = mid;
                }
            }
            record(0.5 * (lo + hi));
        }
        prev_theta = theta;
        prev_d = d;
    }
    // Wrapped duplicates (a root right at 0/2*pi) collapse to one entry.
    std::sort(rep.critical_points.begin(), rep.critical_points.end(),
              [](const MorseCritical& a, const MorseCritical& b) { return a.theta < b.theta; });
    rep.critical_points.erase(
        std::unique(rep.critical_points.begin(), rep.critical_points.end(),
                    [&](const MorseCritical& a, const MorseCritical& b) {
                        return std::abs(wrap_pi(a.theta - b.theta)) < 1e-9;
                    }),
        rep.critical_points.end());
    if (rep.critical_points.size() > 1 &&
        std::abs(wrap_pi(rep.critical_points.back().theta - rep.critical_points.front().theta)) < 1e-9)
        rep.critical_points.pop_back();
    // Unresolved neighbors: two criticals inside one grid cell.
    for (std::size_t i = 1; i < rep.critical_points.size(); ++i) {
        if (rep.critical_points[i].theta - rep.critical_points[i - 1].theta < h)
            throw ResolutionError("morse_check: adjacent critical points unresolved at this grid");
    }
    rep.all_nondegenerate = !rep.critical_points.empty();
    for (const auto& c : rep.critical_points)
        if (std::abs(c.second_derivative) <= tol) rep.all_nondegenerate = false;
    return rep;
}

}  // namespace qci
