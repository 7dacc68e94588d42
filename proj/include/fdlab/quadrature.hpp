#pragma once

#include <functional>
#include <vector>

namespace fdlab {

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;  // weights
};

// Gauss-Legendre rule (weight 1).
GaussRule gauss_legendre(int n);

// Gauss-Gegenbauer rule for the weight (1-x^2)^(lam-1/2) on [-1,1].
// lam = (n-2)/2 matches the zonal measure (sin theta)^(n-2) d theta.
GaussRule gauss_gegenbauer(int n, double lam);

// Hypervolume |S^{d}| of the unit d-sphere embedded in R^{d+1}.
double sphere_area(int d);

// Integrate f over [a, b] with a mapped Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const GaussRule& rule);

// Integrate over [a, b] split into geometrically spaced panels (log-radial
// quadrature for power-law integrands); panels_per_decade >= 1.
double integrate_log_panels(const std::function<double(double)>& f, double a,
                            double b, int panels_per_decade, const GaussRule& rule);

}  // namespace fdlab
