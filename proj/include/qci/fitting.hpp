#pragma once

// Log-log power-law fits shared by the spectral, quasimode and lattice modules.

#include <utility>
#include <vector>

namespace qci {

struct ScalingFit {
    double exponent = 0.0;   // slope of log(value) vs log(x)
    double intercept = 0.0;  // value ~ exp(intercept) * x^exponent
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> samples;  // (x, value) as fitted
};

// Ordinary least squares on (log x, log value).
// Requires >= 5 samples, all positive, spanning a ratio of at least `min_span`
// in x (default 7: the bundled lambda families span 7.6x to 11.25x).
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& samples, double min_span = 7.0);

}  // namespace qci
