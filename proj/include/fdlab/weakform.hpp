#pragma once

#include <functional>
#include <utility>
#include <span>
#include <string>
#include <vector>

#include "fdlab/quadrature.hpp"

namespace fdlab {

// C^2 cutoff vanishing on (-inf, eps], equal to 1 on [3 eps, inf), convex on
// [eps, 2 eps] and concave on [2 eps, 3 eps]; realized as four cubic pieces
// (eta'' piecewise linear with peaks at 1.5 eps and 2.5 eps) so the profile is
// self-scaling: eta_eps(r) = eta_1(r / eps).  With this realization
// eta(2 eps) = 1/2, c~1 = eps eta'(2 eps) = 1, c~2 = eps^2 sup|eta''| = 2.
class Cutoff {
  public:
    explicit Cutoff(double epsilon);

    double epsilon() const { return eps_; }
    double eta(double r) const;
    double deta(double r) const;
    double d2eta(double r) const;

    static double base_eta(double x);    // eta_1 on [1, 3]
    static double base_deta(double x);
    static double base_d2eta(double x);

    static constexpr double c1_tilde = 1.0;
    static constexpr double c2_tilde = 2.0;

  private:
    double eps_;
};

// Verifies the stated properties at 1e3 sample points on construction.
Cutoff build_cutoff(double epsilon);

// Smooth compactly supported test function phi(x, t) = chi(|x - c|) q(t):
// chi == 1 inside the plateau radius, 0 outside the support radius, with the
// C-infinity exp(-1/s) transition; q is the analogous bump on [t0, t1],
// normalized to unit time integral.
class TestFunction {
  public:
    TestFunction(std::vector<double> center, double plateau_radius,
                 double support_radius, double t0, double t_plateau0,
                 double t_plateau1, double t1);

    int dim() const { return static_cast<int>(center_.size()); }
    const std::vector<double>& center() const { return center_; }
    double support_radius() const { return radius_; }
    double t_begin() const { return t0_; }
    double t_end() const { return t1_; }
    // smooth sub-intervals (rise, plateau, fall) for piecewise quadrature
    std::vector<std::pair<double, double>> time_pieces() const {
        return {{t0_, tp0_}, {tp0_, tp1_}, {tp1_, t1_}};
    }

    double value(std::span<const double> x, double t) const;
    double dt(std::span<const double> x, double t) const;
    double laplacian(std::span<const double> x, double t) const;
    // omega . grad phi for a unit direction omega (the only contraction the
    // annulus integrals need)
    double directional_gradient(std::span<const double> x, double t,
                                std::span<const double> omega) const;

    double spatial(double rho) const;        // chi(|x-c|)
    double spatial_d(double rho) const;
    double spatial_dd(double rho) const;
    double time_factor(double t) const;      // q(t), unit integral
    double time_factor_dt(double t) const;

  private:
    std::vector<double> center_;
    double plateau_, radius_;
    double t0_, tp0_, tp1_, t1_;
    double q_norm_ = 1.0;
};

using SpaceTimeField = std::function<double(std::span<const double> x, double t)>;
using SingularPath = std::function<std::vector<double>(double t)>;

struct AnnulusIntegrals {
    double H = 0.0, I = 0.0, J = 0.0, K = 0.0;
    double K1 = 0.0, K2 = 0.0, K3 = 0.0;
};

struct WeakQuadOptions {
    int radial_gauss = 12;    // per cubic piece of the cutoff
    int polar_nodes = 16;     // Gauss in cos(theta)
    int azimuth_nodes = 24;   // trapezoid on the circle (n = 3 only)
    int time_gauss = 32;
    bool assume_axisymmetric = false;  // required for n >= 4
};

// The four annulus integrals of the Dirac-extraction argument at one time,
// around xi(t), plus the K = (n-1) K1 + K2 - K3 split pieces.
AnnulusIntegrals boundary_integrals(const SpaceTimeField& u, double m,
                                    const TestFunction& phi, const SingularPath& xi,
                                    double t, double epsilon, int n,
                                    const WeakQuadOptions& opt = {});

AnnulusIntegrals boundary_integrals_time_integrated(
    const SpaceTimeField& u, double m, const TestFunction& phi,
    const SingularPath& xi, double epsilon, int n, const WeakQuadOptions& opt = {});

// L-estimate integrals of the proof, for a given b and a = n - 2 - lambda~.
struct LEstimates {
    double L1 = 0.0, L2 = 0.0, L3 = 0.0;
};
LEstimates l_estimates(const Cutoff& cutoff, double b, double a);

struct EpsTableRow {
    double eps = 0.0;
    AnnulusIntegrals integrals;  // time-integrated
    double running_extrapolant = 0.0;
};

struct DiracResult {
    double limit = 0.0;
    double uncertainty = 0.0;
    bool monotone = true;
    bool flagged_nonconvergent = false;
    std::vector<EpsTableRow> table;
};

// Richardson extrapolation of the time-integrated H+I+J+K across a decreasing
// geometric epsilon schedule.
DiracResult dirac_coefficient(const SpaceTimeField& u, double m,
                              const SingularPath& xi, const TestFunction& phi, int n,
                              std::span<const double> epsilon_schedule,
                              const WeakQuadOptions& opt = {}, int workers = 1);

std::vector<double> default_epsilon_schedule(double eps0 = 0.1, double ratio = 0.5,
                                             int count = 8);

struct WeakResidualResult {
    double limit = 0.0;        // extrapolated integral over R^n minus B_{3 eps}
    double uncertainty = 0.0;
    double scale = 0.0;        // integral of |u phi_t| + |u^m Delta phi|
    bool flagged_nonconvergent = false;
    std::vector<double> eps, outer_integral, annulus_sum;
};

// R(eps) = int int_{R^n \ B_3eps} (u phi_t + u^m Delta phi); for classical
// solutions R(eps) = -int (H+I+J+K) dt and the limit vanishes exactly when no
// Dirac source is present.  The singularity is assumed standing at `center`.
WeakResidualResult weak_residual_no_source(const SpaceTimeField& u, double m,
                                           const TestFunction& phi, int n,
                                           std::span<const double> center,
                                           std::span<const double> epsilon_schedule,
                                           const WeakQuadOptions& opt = {},
                                           int workers = 1);

// Synthetic field u^m = k^m(t) (rho^{2-n} + b(t) rho^{-lambda~}) used by the
// proof's estimates; rho is the distance to xi(t).
SpaceTimeField make_v_estimate_field(int n, double m,
                                     const std::function<double(double)>& k,
                                     const std::function<double(double)>& b,
                                     double lambda_tilde, const SingularPath& xi);

}  // namespace fdlab
