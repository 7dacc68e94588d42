#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "fdlab/envelopes.hpp"

namespace fdlab {

// Uniform grid in s = ln r crossed with an angular line (periodic circle or
// cell-centered zonal nodes).  The singularity is excised: r_min > 0 strictly.
struct RadialGrid {
    int n = 2;
    AngularMode mode = AngularMode::circle;
    double s_min = 0.0, s_max = 1.0;
    int Ns = 0, Ntheta = 0;
    std::vector<double> s;
    std::vector<double> theta;
    std::vector<double> ang_w;  // angular measure weights (full S^{n-1})

    double ds() const { return (s_max - s_min) / (Ns - 1); }
    double r_of(int i) const { return std::exp(s[static_cast<size_t>(i)]); }
};

std::shared_ptr<const RadialGrid> make_grid(int n, AngularMode mode, double r_min,
                                            double r_max, int Ns, int Ntheta);

struct Field {
    std::shared_ptr<const RadialGrid> grid;
    double t = 0.0;
    Eigen::ArrayXXd values;  // Ns x Ntheta, positive

    double min_value() const { return values.minCoeff(); }
};

enum class BcMode { pin_supersolution, pin_asymptotic, neumann_reflect };

struct SolverConfig {
    double dt_initial = 1e-3;
    double t_end = 1.0;
    double newton_tol = 1e-11;
    int newton_max_iter = 30;
    BcMode bc_mode = BcMode::pin_supersolution;
    double sandwich_tolerance = 1e-3;
    std::vector<double> snapshot_times;
    bool store_all_steps = false;
    // Manufactured-solution source in (s, theta, t); empty for the real runs.
    std::function<double(double s, double theta, double t)> source;
    // Conservation harness: plain second differences (no radial metric) with
    // reflective boundaries.
    bool unit_radial_weights = false;
};

using TraceFn = std::function<double(double r, double theta, double t)>;

struct InitReport {
    double fitted_exponent = 0.0;  // slope of ln u0^m vs ln r at the smallest radii
    int nodes_used = 0;
};

Field initialize(const std::function<double(double r, double theta)>& u0,
                 std::shared_ptr<const RadialGrid> grid, double m,
                 InitReport* report = nullptr);

// One backward-Euler update covering the full dt; Newton failures and
// positivity losses halve the sub-step (up to 20 times) and the step is
// re-assembled until the target time is reached.
Field advance(const Field& field, double dt, const SolverConfig& cfg,
              const TraceFn& bc_trace, double m);

struct SandwichSample {
    double t = 0.0;
    double lower_violation = 0.0;  // max (w^- - w)_+ / w
    double upper_violation = 0.0;  // max (w - w^+)_+ / w
};

struct SandwichReport {
    std::vector<SandwichSample> samples;
    double max_lower = 0.0;
    double max_upper = 0.0;
    bool pass = true;
};

struct Trajectory {
    std::vector<Field> snapshots;
    SandwichReport sandwich;
};

Trajectory simulate(const std::function<double(double r, double theta)>& u0,
                    const SuperEnvelope& sup, const SubEnvelope& sub,
                    std::shared_ptr<const RadialGrid> grid, const SolverConfig& cfg);

struct AsymptoticFit {
    std::vector<double> alpha_hat;          // per grid angle
    std::vector<double> remainder_exponent; // per grid angle
    double remainder_exponent_median = 0.0;
    double condition_number = 0.0;
    bool ill_conditioned = false;
};

// Per-angle least squares of w^m against {r^{-m lambda}, r^{-m nu}, 1} over the
// radial index window [i_begin, i_end); the constant column absorbs the O(1)
// part so the leading coefficient is clean.  The remainder exponent is the
// log-log slope of w^m - c1 r^{-m lambda} - c3.
AsymptoticFit fit_asymptotic_coefficient(const Field& field, const ProblemParams& prm,
                                         int i_begin, int i_end);

// Total discrete mass (angular weights times ds); conservation harness only.
double discrete_mass(const Field& field);

}  // namespace fdlab
