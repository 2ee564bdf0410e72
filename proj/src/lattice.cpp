#include "qci/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qci {

namespace {

// Window bounds shared by the optimized counter and the oracle so both
// evaluate the identical floating-point predicate.
struct WindowBounds {
    double norm_lo = 0.0, norm_hi = 0.0;          // bounds on |k|
    std::vector<double> mom_lo, mom_hi;           // per constrained coordinate
    std::vector<int> mom_index;                   // 0-based coordinate indices
    int n = 0;
    int free_index = 0;

    bool norm_sq_ok(double ksq) const {
        const double lo = std::max(0.0, norm_lo);
        return ksq >= lo * lo && ksq <= norm_hi * norm_hi;
    }
};

WindowBounds make_bounds(const WindowSpec& spec, double h) {
    WindowBounds b;
    b.n = spec.frame.n;
    b.norm_lo = spec.E[0] / h - spec.c1;
    b.norm_hi = spec.E[0] / h + spec.c1;
    std::vector<bool> constrained(static_cast<std::size_t>(b.n), false);
    for (std::size_t j = 0; j < spec.frame.momentum_indices.size(); ++j) {
        const int idx = spec.frame.momentum_indices[j] - 1;
        constrained[static_cast<std::size_t>(idx)] = true;
        b.mom_index.push_back(idx);
        b.mom_lo.push_back(spec.E[j + 1] / h - spec.c2);
        b.mom_hi.push_back(spec.E[j + 1] / h + spec.c2);
    }
    for (int i = 0; i < b.n; ++i)
        if (!constrained[static_cast<std::size_t>(i)]) b.free_index = i;
    return b;
}

}  // namespace

void validate_spec(const WindowSpec& spec, double h) {
    const int n = spec.frame.n;
    if (n < 2) throw SpecError("window spec: torus dimension must be >= 2");
    if (static_cast<int>(spec.frame.momentum_indices.size()) != n - 1)
        throw SpecError("window spec: frame must constrain exactly n-1 momenta");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int idx : spec.frame.momentum_indices) {
        if (idx < 1 || idx > n) throw SpecError("window spec: momentum index out of range");
        if (seen[static_cast<std::size_t>(idx - 1)]) throw SpecError("window spec: duplicate momentum index");
        seen[static_cast<std::size_t>(idx - 1)] = true;
    }
    if (static_cast<int>(spec.E.size()) != n) throw SpecError("window spec: E must have length n");
    if (!(spec.E[0] > 0.0)) throw SpecError("window spec: E[0] must be positive");
    if (spec.c1 < 0.0 || spec.c2 < 0.0) throw SpecError("window spec: window widths must be nonnegative");
    double mom_sq = 0.0;
    for (std::size_t j = 1; j < spec.E.size(); ++j) mom_sq += spec.E[j] * spec.E[j];
    if (std::sqrt(mom_sq) > spec.E[0] + 1e-9)
        throw SpecError("window spec: joint energy outside the moment-map image (|momenta| > E[0])");
    if (!(h > 0.0 && h <= 0.1)) throw SpecError("window spec: h must be in (0, 0.1]");
}

std::int64_t count_window(const WindowSpec& spec, double h) {
    validate_spec(spec, h);
    const WindowBounds b = make_bounds(spec, h);
    if (!(b.norm_hi >= 0.0) || !std::isfinite(b.norm_hi))
        throw SpecError("count_window: unbounded search region");

    const std::size_t m = b.mom_index.size();
    std::vector<std::int64_t> lo(m), hi(m), cur(m);
    for (std::size_t j = 0; j < m; ++j) {
        lo[j] = static_cast<std::int64_t>(std::ceil(b.mom_lo[j]));
        hi[j] = static_cast<std::int64_t>(std::floor(b.mom_hi[j]));
        if (lo[j] > hi[j]) return 0;
        cur[j] = lo[j];
    }

    std::int64_t total = 0;
    while (true) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += static_cast<double>(cur[j]) * static_cast<double>(cur[j]);
        // Free coordinate: k_f^2 in [norm_lo^2 - s, norm_hi^2 - s].
        const double hi_sq = b.norm_hi * b.norm_hi - s;
        if (hi_sq >= 0.0) {
            const double lo_eff = std::max(0.0, b.norm_lo);
            const double lo_sq = lo_eff * lo_eff - s;
            const double a = (lo_sq > 0.0) ? std::sqrt(lo_sq) : 0.0;
            const double bnd = std::sqrt(hi_sq);
            // Scan a safety-margin widened integer range and apply the exact
            // shared predicate per candidate.
            const std::int64_t k_lo = static_cast<std::int64_t>(std::floor(a)) - 1;
            const std::int64_t k_hi = static_cast<std::int64_t>(std::ceil(bnd)) + 1;
            for (std::int64_t k = std::max<std::int64_t>(k_lo, 0); k <= k_hi; ++k) {
                const double ksq = s + static_cast<double>(k) * static_cast<double>(k);
                if (b.norm_sq_ok(ksq)) total += (k == 0) ? 1 : 2;
            }
        }
        // Advance the constrained-coordinate counter.
        std::size_t j = 0;
        for (; j < m; ++j) {
            if (++cur[j] <= hi[j]) break;
            cur[j] = lo[j];
        }
        if (j == m) break;
        if (m == 0) break;
    }
    return total;
}

std::int64_t count_window_bruteforce(const WindowSpec& spec, double h) {
    validate_spec(spec, h);
    const WindowBounds b = make_bounds(spec, h);
    const double radius = b.norm_hi;
    if (radius > 2000.0) throw SizeError("count_window_bruteforce: ball radius exceeds 2000");
    const int n = b.n;

    // Per-coordinate momentum bounds for O(1) membership tests.
    std::vector<double> mlo(static_cast<std::size_t>(n), -1e300), mhi(static_cast<std::size_t>(n), 1e300);
    for (std::size_t j = 0; j < b.mom_index.size(); ++j) {
        mlo[static_cast<std::size_t>(b.mom_index[j])] = b.mom_lo[j];
        mhi[static_cast<std::size_t>(b.mom_index[j])] = b.mom_hi[j];
    }

    std::int64_t total = 0;
    // Full enumeration of the ball with per-axis radius pruning.
    std::function<void(int, double)> recurse = [&](int axis, double partial_sq) {
        const double rem = radius * radius - partial_sq;
        if (rem < 0.0) return;
        const std::int64_t bound = static_cast<std::int64_t>(std::floor(std::sqrt(rem))) + 1;
        if (axis == n - 1) {
            for (std::int64_t v = -bound; v <= bound; ++v) {
                const double dv = static_cast<double>(v);
                if (dv < mlo[static_cast<std::size_t>(axis)] || dv > mhi[static_cast<std::size_t>(axis)]) continue;
                const double ksq = partial_sq + dv * dv;
                if (b.norm_sq_ok(ksq)) ++total;
            }
            return;
        }
        for (std::int64_t v = -bound; v <= bound; ++v) {
            const double dv = static_cast<double>(v);
            if (dv < mlo[static_cast<std::size_t>(axis)] || dv > mhi[static_cast<std::size_t>(axis)]) continue;
            recurse(axis + 1, partial_sq + dv * dv);
        }
    };
    recurse(0, 0.0);
    return total;
}

Point window_center_direction(const WindowSpec& spec) {
    const int n = spec.frame.n;
    Point dir(static_cast<std::size_t>(n), 0.0);
    double mom_sq = 0.0;
    for (std::size_t j = 0; j < spec.frame.momentum_indices.size(); ++j) {
        const int idx = spec.frame.momentum_indices[j] - 1;
        const double v = spec.E[j + 1] / spec.E[0];
        dir[static_cast<std::size_t>(idx)] = v;
        mom_sq += v * v;
    }
    std::vector<bool> constrained(static_cast<std::size_t>(n), false);
    for (int idx : spec.frame.momentum_indices) constrained[static_cast<std::size_t>(idx - 1)] = true;
    for (int i = 0; i < n; ++i) {
        if (!constrained[static_cast<std::size_t>(i)]) {
            dir[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, 1.0 - mom_sq));
            break;
        }
    }
    return dir;
}

int window_rank(const WindowSpec& spec) {
    const SymbolSystem sys = make_flat_torus_system(spec.frame.n, spec.frame.momentum_indices);
    const Point x(static_cast<std::size_t>(spec.frame.n), 0.0);
    const Point xi = window_center_direction(spec);
    return rank_at(sys, x, xi).rank;
}

LatticeFit exponent_fit(const CountSeries& series) {
    if (series.rows.size() < 6) throw DomainError("exponent_fit: need >= 6 h-values");
    double h_lo = series.rows.front().first, h_hi = series.rows.front().first;
    for (const auto& [h, c] : series.rows) {
        h_lo = std::min(h_lo, h);
        h_hi = std::max(h_hi, h);
    }
    if (h_hi < h_lo * std::pow(10.0, 1.5))
        throw DomainError("exponent_fit: h grid must span >= 1.5 decades");

    LatticeFit out;
    out.rank_k = window_rank(series.spec);
    const int n = series.spec.frame.n;
    const double bound_pow = static_cast<double>(n - out.rank_k - 1);

    std::vector<std::pair<double, double>> samples;
    bool any_nonzero = false;
    for (const auto& [h, c] : series.rows) {
        if (c == 0) {
            ++out.zero_rows_dropped;
            continue;
        }
        any_nonzero = true;
        samples.emplace_back(h, static_cast<double>(std::max<std::int64_t>(c, 1)));
        out.bound_constant = std::max(out.bound_constant, static_cast<double>(c) * std::pow(h, bound_pow));
    }
    if (!any_nonzero) throw DomainError("exponent_fit: all counts are zero (degenerate series)");
    out.fit = fit_scaling(samples, 5.0);
    return out;
}

std::vector<double> jittered_h_grid(double h_min, double h_max, int points, std::uint64_t seed) {
    if (points < 2) throw ParameterError("jittered_h_grid: need >= 2 points");
    Rng rng(seed);
    std::vector<double> g = geomspace(h_max, h_min, points);
    for (double& h : g) h *= 1.0 + rng.uniform(-0.05, 0.05);
    std::sort(g.begin(), g.end(), std::greater<double>());
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] < g[i - 1])) throw NumericError("jittered_h_grid: grid not strictly decreasing");
    return g;
}

CountSeries count_series(const WindowSpec& spec, const std::vector<double>& h_grid) {
    CountSeries s;
    s.spec = spec;
    for (double h : h_grid) s.rows.emplace_back(h, count_window(spec, h));
    for (std::size_t i = 1; i < s.rows.size(); ++i)
        if (!(s.rows[i].first < s.rows[i - 1].first))
            throw ParameterError("count_series: h grid must be strictly decreasing");
    return s;
}

WindowSpec p_frame_spec(int n, double c1, double c2) {
    WindowSpec spec;
    spec.frame.n = n;
    for (int i = 2; i <= n; ++i) spec.frame.momentum_indices.push_back(i);
    spec.E.assign(static_cast<std::size_t>(n), 0.0);
    spec.E[0] = 1.0;
    spec.E[1] = 1.0;  // the degenerate joint energy: concentration at xi = e_2
    spec.c1 = c1;
    spec.c2 = c2;
    return spec;
}

WindowSpec q_frame_spec(int n, double c1, double c2) {
    WindowSpec spec;
    spec.frame.n = n;
    spec.frame.momentum_indices.push_back(1);
    for (int i = 3; i <= n; ++i) spec.frame.momentum_indices.push_back(i);
    spec.E.assign(static_cast<std::size_t>(n), 0.0);
    spec.E[0] = 1.0;  // same eigenfunctions, regular frame: F = (1, 0, ..., 0)
    spec.c1 = c1;
    spec.c2 = c2;
    return spec;
}

FrameComparison frame_compare(int n, const std::vector<double>& h_grid) {
    if (n < 3) throw ParameterError("frame_compare: need n >= 3");
    FrameComparison cmp;
    cmp.series_p = count_series(p_frame_spec(n), h_grid);
    cmp.series_q = count_series(q_frame_spec(n), h_grid);
    cmp.fit_p = exponent_fit(cmp.series_p);
    cmp.fit_q = exponent_fit(cmp.series_q);
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        const double cp = static_cast<double>(std::max<std::int64_t>(cmp.series_p.rows[i].second, 1));
        cmp.ratio.push_back(static_cast<double>(cmp.series_q.rows[i].second) / cp);
    }
    cmp.exponent_gap = cmp.fit_q.fit.exponent - cmp.fit_p.fit.exponent;
    return cmp;
}

}  // namespace qci
