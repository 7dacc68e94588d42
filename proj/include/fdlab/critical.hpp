#pragma once

#include <functional>
#include <vector>

#include "fdlab/angular.hpp"
#include "fdlab/envelopes.hpp"

namespace fdlab {

// ---- sphere flow  alpha_t = Delta_omega(alpha^m) + A alpha^m ----------------

struct SphereFlowConfig {
    double dt = 1e-3;
    double theta_scheme = 0.5;  // 0.5 = trapezoidal, 1.0 = backward Euler
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    int max_halvings = 20;
    int store_every = 1;  // keep every k-th state
};

struct SphereState {
    AngularProfile profile;
    double t = 0.0;
};

struct SphereTrajectory {
    std::vector<SphereState> states;
    double A = 0.0;
    bool completed = true;
    double blowdown_estimate = -1.0;  // set when positivity forces an abort
};

SphereTrajectory evolve_critical(const AngularProfile& alpha0, int n, double m,
                                 double T, const SphereFlowConfig& cfg = {});

// ---- separable solutions alpha = tau(t) beta^{1/m}(omega) -------------------

// tau(t) = ((1-m) C t + t0)^{1/(1-m)}; sign(C) should match sign(A).
struct SeparableDiagnostics {
    SeparableCritical solution;
    bool sign_mismatch = false;      // warning, not an error
    double max_abs_residual = 0.0;   // eq. residual at the sample points
    int samples = 0;
};

SeparableDiagnostics separable_solution(const AngularProfile& beta, double C,
                                        double t0, int n, double m,
                                        int space_samples = 64, int time_samples = 16,
                                        double t_max = 1.0);

// Pointwise residual of the sphere flow for alpha = tau(t) beta^{1/m}.
double separable_flow_residual(const AngularProfile& beta, double C, double t0,
                               int n, double m, double theta, double t);

// ---- Hamiltonian phase plane  beta'' + A beta = C beta^{1/m} ----------------

// E = v^2/2 + A beta^2/2 - C beta^{1/m+1}/(1/m+1); constant along orbits.
double hamiltonian_energy(double beta, double v, double A, double C, double m);

// fixed point P = ((A/C)^{m/(1-m)}, 0) and the linearization frequency there
double center_beta(double A, double C, double m);
double linearized_period(double A, double C, double m);

struct OrbitConfig {
    double step = 1e-4;
    double max_time = 400.0;
    int store_every = 10;
};

struct Orbit {
    std::vector<double> t, beta, v;
    double energy = 0.0;
    double period = -1.0;        // Poincare return time (v=0, beta > P)
    double closure_error = -1.0; // phase-space distance at the return
    bool closed = false;
    bool positive = true;        // beta stayed > 0
    double linear_period = 0.0;
};

// Fixed-step leapfrog with cubic-Hermite section detection.
Orbit trace_orbit(double beta0, double v0, double A, double C, double m,
                  const OrbitConfig& cfg = {});

// Shooting on the start amplitude so the orbit period matches 2 pi / k; the
// period grows with amplitude for these potentials, so when the target is
// attainable only in the small-amplitude limit the smallest resolvable
// amplitude within `period_tol` is returned.
struct PeriodMatch {
    Orbit orbit;
    double amplitude = 0.0;
    bool exact = false;  // |period - target| <= period_tol at finite amplitude
};

PeriodMatch match_orbit_period(int k, double A, double C, double m,
                               double period_tol = 1e-6,
                               const OrbitConfig& cfg = {});

// Resample a closed orbit as beta(theta) on a circle geometry, theta spanning
// k copies of the (rescaled) period.
AngularProfile orbit_to_profile(const Orbit& orbit,
                                std::shared_ptr<const AngularGeometry> geom, int k);

// Phase-plane sweep: how many of the given starts produce closed orbits.
struct SweepResult {
    int starts = 0;
    int closed = 0;
    std::vector<Orbit> orbits;
};

SweepResult orbit_sweep(double A, double C, double m, int starts, double spread,
                        unsigned seed, const OrbitConfig& cfg = {}, int workers = 1);

}  // namespace fdlab
