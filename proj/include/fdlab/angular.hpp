#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fdlab/regimes.hpp"

namespace fdlab {

enum class AngularMode { circle, zonal };

// Discretization of S^{n-1} restricted to one nontrivial direction:
// n = 2 is the full circle on a uniform periodic grid, n >= 3 is a zonal
// profile (polar angle only) on Gauss-Gegenbauer nodes.  Both carry an exact
// spectral diagonalization of the Laplace-Beltrami operator.
class AngularGeometry {
  public:
    static AngularGeometry circle(int nodes);
    static AngularGeometry zonal(int n, int nodes);

    int dim() const { return n_; }
    AngularMode mode() const { return mode_; }
    int node_count() const { return nodes_; }
    const std::vector<double>& theta() const { return theta_; }
    // Quadrature weights for integrals over all of S^{n-1} (the measure of the
    // suppressed directions is folded in).
    const std::vector<double>& quad_weights() const { return quad_w_; }
    double total_measure() const;  // == |S^{n-1}|

    int basis_size() const { return nodes_; }
    // Eigenvalue of Delta_omega on basis function `idx` (<= 0).
    double laplacian_eigenvalue(int idx) const { return lap_eig_[static_cast<size_t>(idx)]; }

    std::vector<double> analyze(std::span<const double> values) const;
    std::vector<double> synthesize(std::span<const double> coeffs) const;
    double eval(std::span<const double> coeffs, double theta) const;

    bool same_as(const AngularGeometry& other) const {
        return n_ == other.n_ && mode_ == other.mode_ && nodes_ == other.nodes_;
    }

  private:
    AngularGeometry() = default;

    int n_ = 2;
    AngularMode mode_ = AngularMode::circle;
    int nodes_ = 0;
    std::vector<double> theta_;
    std::vector<double> quad_w_;
    std::vector<double> lap_eig_;
    // zonal only
    std::vector<double> x_;          // cos(theta) Gauss nodes
    std::vector<double> gj_w_;       // Gauss-Jacobi weights (pure x-measure)
    std::vector<double> basis_norm_; // 1/sqrt(h_l) for Gegenbauer C_l
    double gegen_lam_ = 0.5;
    double zonal_factor_ = 1.0;      // |S^{n-2}|

    double gegenbauer_value(int l, double x) const;
};

// Function on the restricted geometry; holds both nodal values and the
// spectral coefficients of their projection.  Values are arbitrary reals --
// positivity is demanded by the operations that represent alpha profiles.
class AngularProfile {
  public:
    AngularProfile(std::shared_ptr<const AngularGeometry> geom,
                   std::vector<double> values);
    static AngularProfile from_coeffs(std::shared_ptr<const AngularGeometry> geom,
                                      std::vector<double> coeffs);

    const AngularGeometry& geometry() const { return *geom_; }
    std::shared_ptr<const AngularGeometry> geometry_ptr() const { return geom_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    double eval(double theta) const { return geom_->eval(coeffs_, theta); }
    bool positive() const;
    double min_value() const;

    // Nodal power alpha^p re-projected onto the basis.
    AngularProfile pow(double p) const;
    // Energy fraction carried by the top 20% of modes: a band-limitedness
    // diagnostic for inputs that are only approximately resolvable.
    double spectral_tail_fraction() const;

  private:
    std::shared_ptr<const AngularGeometry> geom_;
    std::vector<double> values_;
    std::vector<double> coeffs_;
};

AngularProfile laplace_beltrami(const AngularProfile& p);

// sigma(omega) = Delta_omega(alpha^m) + m*lambda*(m*lambda - n + 2)*alpha^m
AngularProfile sigma_profile(const AngularProfile& alpha, const ProblemParams& prm);

struct ProfileExtrema {
    double alpha_min = 0.0;
    double alpha_max = 0.0;
    double sigma_max = 0.0;
    double max_abs_lb = 0.0;  // max |Delta_omega(alpha^m)|
};

// Extrema taken on a grid oversampled by `refine` (>= 4) relative to the node
// count, endpoints included for zonal geometries.
ProfileExtrema profile_extrema(const AngularProfile& alpha, const ProblemParams& prm,
                               int refine = 4);

// Built-in profile families used by the run configuration.
std::shared_ptr<const AngularGeometry> make_geometry(int n, int nodes);
AngularProfile constant_profile(std::shared_ptr<const AngularGeometry> g, double c);
AngularProfile cosine_profile(std::shared_ptr<const AngularGeometry> g, double base,
                              double amplitude, int mode);
AngularProfile zonal_harmonic_profile(std::shared_ptr<const AngularGeometry> g,
                                      double base, double amplitude, int degree);
AngularProfile profile_from_csv(std::shared_ptr<const AngularGeometry> g,
                                const std::string& path);

}  // namespace fdlab
