#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fdlab/angular.hpp"

namespace fdlab {

struct LpSample {
    double eps = 0.0;
    double I = 0.0;
};

enum class LpClass { finite, power_divergent, log_divergent, ambiguous };

const char* lp_class_name(LpClass c);

struct LpReport {
    double p = 1.0;
    std::string region;
    std::vector<LpSample> samples;
    LpClass classification = LpClass::finite;
    double exponent = 0.0;        // q in I ~ c0 + c1 eps^{-q} (when power-divergent)
    double exponent_sigma = 0.0;  // 3-sigma slope test input
    double rss_power = 0.0;
    double rss_log = 0.0;
    double c0 = 0.0, c1 = 0.0;
};

// Field on the excised ball in the (r, theta, t) coordinates around xi0.
using RadialField = std::function<double(double r, double theta, double t)>;

struct LpMassOptions {
    double ball_radius = 1.0;
    double t0 = 0.0, t1 = 1.0;
    int panels_per_decade = 4;
    int radial_gauss = 16;
    int time_gauss = 16;
    int angular_nodes = 16;
    // known radial kinks of the integrand (e.g. the matching radius rho(t))
    std::function<std::vector<double>(double t)> radial_breakpoints;
};

// Quadrature of u^p over (B_R \ B_eps) x [t0, t1] with log-radial Gauss
// panels; evaluation goes through logs so power-law blowup cannot overflow.
double local_lp_mass(const RadialField& u, int n, AngularMode mode, double p,
                     double eps, const LpMassOptions& opt = {});

// Fits I(eps) against c0 + c1 eps^{-q} and c0 + c1 ln(1/eps), selects by
// residual, and applies the slope significance tests.
LpReport divergence_diagnosis(std::vector<LpSample> samples, double p,
                              std::string region);

struct SnakingThreshold {
    double p_threshold = 0.0;   // (1-m)(n-1)/2
    bool no_integrable_p = false;  // true when no p >= 1 can be integrable
};

SnakingThreshold snaking_threshold(int n, double m);

// L^p mass of the traveling wave over [0,1] x B'_1 x [-1,0] in the proof's
// coordinates (y_n = -(x_n - t), r = |x'|/y_n) with the inner cylinder r < eps
// excised.
double traveling_wave_lp_mass(int n, double m, double p, double C, double eps,
                              int radial_gauss = 16, int panels_per_decade = 4);

}  // namespace fdlab
