#include "qci/fitting.hpp"

#include <algorithm>
#include <cmath>

#include "qci/common.hpp"

namespace qci {

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& samples, double min_span) {
    if (samples.size() < 5) throw DomainError("fit_scaling: need at least 5 samples");
    double xmin = samples.front().first, xmax = samples.front().first;
    for (const auto& [x, v] : samples) {
        if (!(x > 0.0) || !(v > 0.0)) throw DomainError("fit_scaling: nonpositive sample");
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
    }
    if (xmax < min_span * xmin) throw DomainError("fit_scaling: samples span less than the required ratio");

    const std::size_t n = samples.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(samples[i].first);
        ly[i] = std::log(samples[i].second);
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    ScalingFit fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
        ss_res += r * r;
    }
    fit.r_squared = (syy < 1e-30) ? 1.0 : std::max(0.0, 1.0 - ss_res / syy);
    fit.samples = samples;
    return fit;
}

}  // namespace qci
