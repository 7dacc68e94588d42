#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fdlab/angular.hpp"
#include "fdlab/regimes.hpp"

namespace fdlab {

// w+ = (alpha^m r^{-m lambda} + a(t) r^{-m nu} + A)^{1/m},  a(t) = A e^{A t}.
struct SupersolutionParams {
    double A = 1.0;
};

// Piecewise w-: inner alpha r^{-lambda} (1 - b(t) r^{m(lambda-nu)})^{1/m} up to
// the matching radius rho(t), outer alpha delta^{1/m} rho^{mu-lambda} r^{-mu}.
struct SubsolutionParams {
    double mu = 0.0;
    double delta = 0.0;
    double b0 = 2.0;
    double B = 2.0;
};

struct ResidualSample {
    double value = 0.0;      // w_t - Delta(w^m)
    double time_term = 0.0;  // w_t, for scale-aware sign checks
    double scale() const { return 1.0 + std::abs(time_term); }
};

class SuperEnvelope {
  public:
    SuperEnvelope(AngularProfile alpha, ProblemParams prm, SupersolutionParams sp);

    const ProblemParams& params() const { return prm_; }
    const SupersolutionParams& constants() const { return sp_; }
    const AngularProfile& alpha() const { return alpha_; }

    double a_of_t(double t) const;
    double pow_m(double r, double theta, double t) const;
    double value(double r, double theta, double t) const;
    double time_deriv(double r, double theta, double t) const;
    double laplacian_pow_m(double r, double theta, double t) const;
    ResidualSample residual(double r, double theta, double t) const;

  private:
    AngularProfile alpha_;
    AngularProfile alpha_m_;  // projection of alpha^m
    AngularProfile sigma_;
    ProblemParams prm_;
    SupersolutionParams sp_;
};

class SubEnvelope {
  public:
    SubEnvelope(AngularProfile alpha, ProblemParams prm, SubsolutionParams sp);

    const ProblemParams& params() const { return prm_; }
    const SubsolutionParams& constants() const { return sp_; }
    const AngularProfile& alpha() const { return alpha_; }

    double b_of_t(double t) const;
    double rho(double t) const;          // matching radius, < 1 and decreasing
    double zero_radius(double t) const;  // where the inner bracket vanishes
    bool inner_branch(double r, double t) const { return r <= rho(t); }

    double value(double r, double theta, double t) const;  // clamped at 0
    double pow_m(double r, double theta, double t) const;
    ResidualSample residual(double r, double theta, double t) const;

    // Radial derivative of (w^-)^m on each branch evaluated at rho(t), and the
    // closed-form jump alpha^m m rho^{-m lambda - 1}(lambda - nu - (mu-nu) delta).
    double matching_jump(double theta, double t) const;
    double matching_jump_formula(double theta, double t) const;

  private:
    AngularProfile alpha_;
    AngularProfile alpha_m_;
    AngularProfile lap_alpha_m_;
    ProblemParams prm_;
    SubsolutionParams sp_;
};

// u = K r^{-(n-2)/m}: the radial stationary solution (n >= 3).
struct Stationary {
    double K = 1.0;
    int n = 3;
    double m = 0.5;

    double value(double r) const;
    double pow_m(double r) const;
};

// Spatially flat solution of the critical sphere flow.
struct AlphaTilde {
    double A = 1.0;
    double t0 = 1.0;
    double m = 0.5;

    double value(double t) const;       // ((1-m) A t + t0)^{1/(1-m)}
    double time_deriv(double t) const;  // = A * value^m
};

// Separable critical solution alpha = tau(t) beta^{1/m}(omega) paired with the
// singular factor r^{-2/(1-m)}.
struct SeparableCritical {
    AngularProfile beta;
    double C = 0.0;
    double t0 = 1.0;
    double m = 0.5;
    int n = 2;

    double tau(double t) const;
    double alpha_value(double theta, double t) const;
    double value(double r, double theta, double t) const;
};

using ClosedForm = std::variant<Stationary, AlphaTilde, SeparableCritical,
                                SuperEnvelope, SubEnvelope>;

double eval_envelope(const ClosedForm& form, double r, double theta, double t);

// Strong-form residual of eq. w_t = r^{1-n}(r^{n-1}(w^m)_r)_r + r^{-2} Delta_omega w^m
// from hand-coded derivatives of the closed form.
ResidualSample strong_form_residual(const ClosedForm& form, double r, double theta,
                                    double t);

// Second-order central stencils in (ln r, theta, t) applied to an arbitrary
// field; rejects evaluation within h (in ln r) of a subsolution matching
// radius when `form` is supplied.
using FieldFn = std::function<double(double r, double theta, double t)>;
double strong_form_residual_fd(const FieldFn& w, int n, double m, AngularMode mode,
                               double r, double theta, double t, double h,
                               const ClosedForm* form = nullptr);

// ---- constant selection ---------------------------------------------------

struct VerificationGrid {
    double r_lo = 1e-4, r_hi = 10.0;
    int radii = 64;
    int angles = 32;
    int times = 9;
    double t_lo = 0.0, t_hi = 2.0;

    std::vector<double> radius_nodes() const;
    std::vector<double> angle_nodes(AngularMode mode) const;
    std::vector<double> time_nodes() const;
};

struct SupersolutionSelection {
    SupersolutionParams params;
    double bound_inner = 0.0;  // m alpha_min^{-(1-m)} (sigma_max + m nu (m nu + 2))
    double bound_outer = 0.0;  // m (sigma_max + m nu |m nu - n + 2|)
    int doublings = 0;
    double worst_scaled_residual = 0.0;  // min residual / scale over the grid
};

SupersolutionSelection select_supersolution_constant(
    const AngularProfile& alpha, const ProblemParams& prm,
    const VerificationGrid& grid = {});

struct SubsolutionSelection {
    SubsolutionParams params;
    double asmu_margin = 0.0;  // m mu (m mu + 2 - n) alpha_min^m - max|Delta(alpha^m)|
    int B_doublings = 0;
    int b0_doublings = 0;
    double worst_inner = 0.0;  // max residual / scale on the inner branch
    double worst_outer = 0.0;
};

SubsolutionSelection select_subsolution_constants(
    const AngularProfile& alpha, const ProblemParams& prm,
    const std::function<double(double r, double theta)>& u0_lower_bound,
    const VerificationGrid& grid = {});

double matching_radius(const SubsolutionParams& sub, const ProblemParams& prm,
                       double t);

// ---- squeeze --------------------------------------------------------------

struct SqueezeReport {
    bool pass = false;
    double worst_lower_margin = 0.0;  // min over grid of u0 - w-(.,0)
    double worst_upper_margin = 0.0;  // min over grid of w+(.,0) - u0
    double worst_order_margin = 0.0;  // min over grid/time of w+ - w-
    double lower_r = 0.0, upper_r = 0.0, order_r = 0.0;
};

SqueezeReport squeeze_check(const std::function<double(double r, double theta)>& u0,
                            const SuperEnvelope& sup, const SubEnvelope& sub,
                            const VerificationGrid& grid = {});

// ---- traveling wave --------------------------------------------------------

// U(x,t) = C (|a||x-ta| + a.(x-ta))^{-1/(1-m)} on R^n.
double eval_traveling_wave(std::span<const double> a, double C, double m,
                           std::span<const double> x, double t);
// Cartesian strong-form residual U_t - Delta U^m from exact derivatives.
double traveling_wave_residual(std::span<const double> a, double C, int n, double m,
                               std::span<const double> x, double t);

struct TravelingWaveConstant {
    double C = 0.0;
    double max_scaled_residual = 0.0;  // over the verification probes
    int probes = 0;
};

TravelingWaveConstant derive_traveling_wave_constant(int n, double m,
                                                     unsigned seed = 20201u);

}  // namespace fdlab
