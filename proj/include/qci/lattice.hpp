#pragma once

// Joint spectrum of the flat torus R^n / 2 pi Z^n: joint eigenvalues are
// lattice points, windows around target energies are counted exactly, and the
// count's h-exponent is fitted against the rank of the window configuration.

#include <cstdint>
#include <string>
#include <vector>

#include "qci/fitting.hpp"
#include "qci/momentmap.hpp"

namespace qci {

struct TorusFrame {
    int n = 0;                          // torus dimension, >= 2
    std::vector<int> momentum_indices;  // ordered subset of {1..n}, size n-1
};

// Window around the joint energy E: | h |k| - E[0] | <= c1 h and
// | h k_{i_j} - E[j] | <= c2 h for the frame's momentum coordinates.
struct WindowSpec {
    TorusFrame frame;
    std::vector<double> E;  // length n; E[0] > 0 is the |xi| target
    double c1 = 1.0;
    double c2 = 1.0;
};

struct CountSeries {
    WindowSpec spec;
    std::vector<std::pair<double, std::int64_t>> rows;  // (h, count), h strictly decreasing
};

void validate_spec(const WindowSpec& spec, double h);

// Iterates the (n-1) constrained momentum ranges and solves the norm
// condition for the free coordinate.
std::int64_t count_window(const WindowSpec& spec, double h);

// Full enumeration of the integer ball (radius <= 2000); the oracle.
std::int64_t count_window_bruteforce(const WindowSpec& spec, double h);

// Direction pinned by the window center: constrained coordinates at E[j]/E[0],
// free coordinate filling |xi| = 1. Feeds rank_at for the configuration rank.
Point window_center_direction(const WindowSpec& spec);

// Rank of the flat-torus symbol system at the window center direction.
int window_rank(const WindowSpec& spec);

struct LatticeFit {
    ScalingFit fit;              // log-log on (h, max(count, 1))
    int rank_k = 0;              // from window_rank
    double bound_constant = 0.0; // max of count * h^(n-k-1) over the series
    int zero_rows_dropped = 0;
};

// Log-log least squares on (h, max(count,1)); needs >= 6 rows spanning >= 1.5
// decades. Zero counts are dropped and recorded.
LatticeFit exponent_fit(const CountSeries& series);

// Geometric h grid with multiplicative jitter h -> h (1 + delta),
// delta in [-0.05, 0.05], to average arithmetic resonances. Deterministic in
// the seed; result sorted strictly decreasing.
std::vector<double> jittered_h_grid(double h_min, double h_max, int points, std::uint64_t seed);

CountSeries count_series(const WindowSpec& spec, const std::vector<double>& h_grid);

struct FrameComparison {
    CountSeries series_p, series_q;
    LatticeFit fit_p, fit_q;
    std::vector<double> ratio;  // count_q / max(count_p, 1) per h
    double exponent_gap = 0.0;  // fit_q.exponent - fit_p.exponent
};

// The frame-change experiment: P-frame (momenta {2..n}) at E = (1,1,0,..,0)
// against Q-frame (momenta {1,3..n}) at F = (1,0,..,0) over the same h grid.
FrameComparison frame_compare(int n, const std::vector<double>& h_grid);

WindowSpec p_frame_spec(int n, double c1 = 1.0, double c2 = 1.0);
WindowSpec q_frame_spec(int n, double c1 = 1.0, double c2 = 1.0);

}  // namespace qci
