#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fdlab {

// Ordinary least squares y = slope*x + intercept.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;  // standard error of the slope estimate
    double rss = 0.0;           // residual sum of squares
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Limit estimation for a sequence F(eps) on a decreasing geometric schedule.
// Fits the local convergence order from consecutive differences and eliminates
// the leading error term; uncertainty is the gap between the last two
// extrapolants.  A non-monotone tail widens the uncertainty and is flagged.
struct Extrapolation {
    double limit = 0.0;
    double uncertainty = 0.0;
    double fitted_order = 0.0;
    bool monotone = true;
    std::vector<double> extrapolants;
};

Extrapolation richardson_extrapolate(std::span<const double> eps,
                                     std::span<const double> values);

// Deterministic parallel map: slot-indexed writes, no shared reductions.
// workers <= 1 runs inline.
void parallel_for(int begin, int end, int workers,
                  const std::function<void(int)>& body);

// FNV-1a 64-bit, hex encoded; used for config fingerprints.
std::string fnv1a_hex(const std::string& data);

// Bisection root finder on [lo, hi]; f(lo) and f(hi) must differ in sign.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double xtol, int max_iter = 200);

}  // namespace fdlab
