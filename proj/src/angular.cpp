#include "fdlab/angular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fdlab/quadrature.hpp"

namespace fdlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

AngularGeometry AngularGeometry::circle(int nodes) {
    if (nodes < 4 || nodes % 2 != 0)
        throw std::invalid_argument("AngularGeometry::circle: need even nodes >= 4");
    AngularGeometry g;
    g.n_ = 2;
    g.mode_ = AngularMode::circle;
    g.nodes_ = nodes;
    g.theta_.resize(static_cast<size_t>(nodes));
    g.quad_w_.assign(static_cast<size_t>(nodes), 2.0 * kPi / nodes);
    for (int j = 0; j < nodes; ++j)
        g.theta_[static_cast<size_t>(j)] = 2.0 * kPi * j / nodes;
    // Basis layout: [mean, cos1, sin1, ..., cos(K-1), sin(K-1), cosK], K = N/2.
    g.lap_eig_.resize(static_cast<size_t>(nodes));
    g.lap_eig_[0] = 0.0;
    for (int k = 1; k < nodes / 2; ++k) {
        g.lap_eig_[static_cast<size_t>(2 * k - 1)] = -double(k) * k;
        g.lap_eig_[static_cast<size_t>(2 * k)] = -double(k) * k;
    }
    g.lap_eig_[static_cast<size_t>(nodes - 1)] = -double(nodes / 2) * (nodes / 2);
    return g;
}

AngularGeometry AngularGeometry::zonal(int n, int nodes) {
    if (n < 3) throw std::invalid_argument("AngularGeometry::zonal: requires n >= 3");
    if (nodes < 4) throw std::invalid_argument("AngularGeometry::zonal: nodes >= 4");
    AngularGeometry g;
    g.n_ = n;
    g.mode_ = AngularMode::zonal;
    g.nodes_ = nodes;
    g.gegen_lam_ = 0.5 * (n - 2);
    g.zonal_factor_ = sphere_area(n - 2);

    GaussRule rule = gauss_gegenbauer(nodes, g.gegen_lam_);
    g.x_ = rule.x;
    g.gj_w_ = rule.w;
    g.theta_.resize(static_cast<size_t>(nodes));
    g.quad_w_.resize(static_cast<size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        g.theta_[static_cast<size_t>(i)] = std::acos(std::clamp(rule.x[static_cast<size_t>(i)], -1.0, 1.0));
        g.quad_w_[static_cast<size_t>(i)] = g.zonal_factor_ * rule.w[static_cast<size_t>(i)];
    }

    // Orthonormalization constants: h_l = pi 2^{1-2lam} Gamma(l+2lam) /
    // (l! (l+lam) Gamma(lam)^2) for the Gegenbauer weight.
    g.basis_norm_.resize(static_cast<size_t>(nodes));
    g.lap_eig_.resize(static_cast<size_t>(nodes));
    const double lam = g.gegen_lam_;
    for (int l = 0; l < nodes; ++l) {
        const double log_h = std::log(kPi) + (1.0 - 2.0 * lam) * std::log(2.0) +
                             std::lgamma(l + 2.0 * lam) - std::lgamma(l + 1.0) -
                             std::log(l + lam) - 2.0 * std::lgamma(lam);
        g.basis_norm_[static_cast<size_t>(l)] = std::exp(-0.5 * log_h);
        g.lap_eig_[static_cast<size_t>(l)] = -double(l) * (l + n - 2);
    }
    return g;
}

double AngularGeometry::total_measure() const {
    double s = 0.0;
    for (double w : quad_w_) s += w;
    return s;
}

double AngularGeometry::gegenbauer_value(int l, double x) const {
    const double lam = gegen_lam_;
    double pm1 = 1.0;  // C_0
    if (l == 0) return pm1;
    double p = 2.0 * lam * x;  // C_1
    for (int k = 1; k < l; ++k) {
        const double pn = (2.0 * (k + lam) * x * p - (k + 2.0 * lam - 1.0) * pm1) / (k + 1.0);
        pm1 = p;
        p = pn;
    }
    return p;
}

std::vector<double> AngularGeometry::analyze(std::span<const double> values) const {
    if (static_cast<int>(values.size()) != nodes_)
        throw std::invalid_argument("AngularGeometry::analyze: size mismatch");
    std::vector<double> c(static_cast<size_t>(nodes_), 0.0);
    if (mode_ == AngularMode::circle) {
        const int N = nodes_;
        for (int j = 0; j < N; ++j) c[0] += values[static_cast<size_t>(j)];
        c[0] /= N;
        for (int k = 1; k < N / 2; ++k) {
            double a = 0.0, b = 0.0;
            for (int j = 0; j < N; ++j) {
                a += values[static_cast<size_t>(j)] * std::cos(k * theta_[static_cast<size_t>(j)]);
                b += values[static_cast<size_t>(j)] * std::sin(k * theta_[static_cast<size_t>(j)]);
            }
            c[static_cast<size_t>(2 * k - 1)] = 2.0 * a / N;
            c[static_cast<size_t>(2 * k)] = 2.0 * b / N;
        }
        double nyq = 0.0;
        for (int j = 0; j < N; ++j)
            nyq += values[static_cast<size_t>(j)] * ((j % 2 == 0) ? 1.0 : -1.0);
        c[static_cast<size_t>(N - 1)] = nyq / N;
    } else {
        for (int l = 0; l < nodes_; ++l) {
            double acc = 0.0;
            for (int i = 0; i < nodes_; ++i)
                acc += gj_w_[static_cast<size_t>(i)] *
                       gegenbauer_value(l, x_[static_cast<size_t>(i)]) *
                       basis_norm_[static_cast<size_t>(l)] * values[static_cast<size_t>(i)];
            c[static_cast<size_t>(l)] = acc;
        }
    }
    return c;
}

std::vector<double> AngularGeometry::synthesize(std::span<const double> coeffs) const {
    if (static_cast<int>(coeffs.size()) != nodes_)
        throw std::invalid_argument("AngularGeometry::synthesize: size mismatch");
    std::vector<double> v(static_cast<size_t>(nodes_), 0.0);
    for (int i = 0; i < nodes_; ++i)
        v[static_cast<size_t>(i)] = eval(coeffs, theta_[static_cast<size_t>(i)]);
    return v;
}

double AngularGeometry::eval(std::span<const double> coeffs, double theta) const {
    if (static_cast<int>(coeffs.size()) != nodes_)
        throw std::invalid_argument("AngularGeometry::eval: size mismatch");
    if (mode_ == AngularMode::circle) {
        const int N = nodes_;
        double s = coeffs[0];
        for (int k = 1; k < N / 2; ++k)
            s += coeffs[static_cast<size_t>(2 * k - 1)] * std::cos(k * theta) +
                 coeffs[static_cast<size_t>(2 * k)] * std::sin(k * theta);
        s += coeffs[static_cast<size_t>(N - 1)] * std::cos((N / 2) * theta);
        return s;
    }
    const double x = std::cos(theta);
    double s = 0.0;
    // Stable two-term recurrence accumulated over all degrees at once.
    const double lam = gegen_lam_;
    double pm1 = 1.0;
    double p = 2.0 * lam * x;
    s += coeffs[0] * basis_norm_[0] * pm1;
    if (nodes_ > 1) s += coeffs[1] * basis_norm_[1] * p;
    for (int k = 1; k + 1 < nodes_; ++k) {
        const double pn = (2.0 * (k + lam) * x * p - (k + 2.0 * lam - 1.0) * pm1) / (k + 1.0);
        pm1 = p;
        p = pn;
        s += coeffs[static_cast<size_t>(k + 1)] * basis_norm_[static_cast<size_t>(k + 1)] * p;
    }
    return s;
}

AngularProfile::AngularProfile(std::shared_ptr<const AngularGeometry> geom,
                               std::vector<double> values)
    : geom_(std::move(geom)), values_(std::move(values)) {
    if (!geom_) throw std::invalid_argument("AngularProfile: null geometry");
    if (static_cast<int>(values_.size()) != geom_->node_count())
        throw std::invalid_argument("AngularProfile: geometry/profile mismatch");
    coeffs_ = geom_->analyze(values_);
}

AngularProfile AngularProfile::from_coeffs(std::shared_ptr<const AngularGeometry> geom,
                                           std::vector<double> coeffs) {
    if (!geom) throw std::invalid_argument("AngularProfile: null geometry");
    AngularProfile p(geom, geom->synthesize(coeffs));
    p.coeffs_ = std::move(coeffs);
    return p;
}

bool AngularProfile::positive() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

double AngularProfile::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

AngularProfile AngularProfile::pow(double p) const {
    std::vector<double> v(values_.size());
    for (size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] <= 0.0 && p != std::floor(p))
            throw std::domain_error("AngularProfile::pow: fractional power of non-positive value");
        v[i] = std::pow(values_[i], p);
    }
    return AngularProfile(geom_, std::move(v));
}

double AngularProfile::spectral_tail_fraction() const {
    const int N = geom_->basis_size();
    const int tail_start = N - std::max(1, N / 5);
    double total = 0.0, tail = 0.0;
    for (int i = 0; i < N; ++i) {
        const double e = coeffs_[static_cast<size_t>(i)] * coeffs_[static_cast<size_t>(i)];
        total += e;
        if (i >= tail_start) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
}

AngularProfile laplace_beltrami(const AngularProfile& p) {
    const auto& g = p.geometry();
    std::vector<double> c = p.coeffs();
    for (int i = 0; i < g.basis_size(); ++i)
        c[static_cast<size_t>(i)] *= g.laplacian_eigenvalue(i);
    return AngularProfile::from_coeffs(p.geometry_ptr(), std::move(c));
}

AngularProfile sigma_profile(const AngularProfile& alpha, const ProblemParams& prm) {
    if (!alpha.positive())
        throw std::domain_error("sigma_profile: profile must be positive");
    if (alpha.geometry().dim() != prm.n)
        throw std::invalid_argument("sigma_profile: geometry/params dimension mismatch");
    const double ml = prm.m * prm.lambda;
    AngularProfile am = alpha.pow(prm.m);
    AngularProfile lap = laplace_beltrami(am);
    std::vector<double> v(am.values().size());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = lap.values()[i] + ml * (ml - prm.n + 2.0) * am.values()[i];
    return AngularProfile(alpha.geometry_ptr(), std::move(v));
}

ProfileExtrema profile_extrema(const AngularProfile& alpha, const ProblemParams& prm,
                               int refine) {
    if (!alpha.positive())
        throw std::domain_error("profile_extrema: profile must be positive");
    refine = std::max(refine, 4);
    const auto& g = alpha.geometry();
    const int fine = refine * g.node_count();
    const double ml = prm.m * prm.lambda;

    AngularProfile am = alpha.pow(prm.m);
    AngularProfile lap = laplace_beltrami(am);

    ProfileExtrema ex;
    ex.alpha_min = std::numeric_limits<double>::infinity();
    ex.alpha_max = -std::numeric_limits<double>::infinity();
    ex.sigma_max = -std::numeric_limits<double>::infinity();
    ex.max_abs_lb = 0.0;
    for (int i = 0; i < fine; ++i) {
        // Zonal extrema are often attained at the poles; include endpoints.
        const double th = (g.mode() == AngularMode::circle)
                              ? 2.0 * kPi * i / fine
                              : kPi * i / (fine - 1);
        const double a = alpha.eval(th);
        const double amv = am.eval(th);
        const double lb = lap.eval(th);
        ex.alpha_min = std::min(ex.alpha_min, a);
        ex.alpha_max = std::max(ex.alpha_max, a);
        ex.sigma_max = std::max(ex.sigma_max, lb + ml * (ml - prm.n + 2.0) * amv);
        ex.max_abs_lb = std::max(ex.max_abs_lb, std::abs(lb));
    }
    return ex;
}

std::shared_ptr<const AngularGeometry> make_geometry(int n, int nodes) {
    if (n == 2)
        return std::make_shared<AngularGeometry>(AngularGeometry::circle(nodes));
    return std::make_shared<AngularGeometry>(AngularGeometry::zonal(n, nodes));
}

AngularProfile constant_profile(std::shared_ptr<const AngularGeometry> g, double c) {
    return AngularProfile(g, std::vector<double>(static_cast<size_t>(g->node_count()), c));
}

AngularProfile cosine_profile(std::shared_ptr<const AngularGeometry> g, double base,
                              double amplitude, int mode) {
    std::vector<double> v(static_cast<size_t>(g->node_count()));
    for (int j = 0; j < g->node_count(); ++j)
        v[static_cast<size_t>(j)] = base + amplitude * std::cos(mode * g->theta()[static_cast<size_t>(j)]);
    return AngularProfile(std::move(g), std::move(v));
}

AngularProfile zonal_harmonic_profile(std::shared_ptr<const AngularGeometry> g,
                                      double base, double amplitude, int degree) {
    if (g->mode() != AngularMode::zonal)
        throw std::invalid_argument("zonal_harmonic_profile: zonal geometry required");
    std::vector<double> c(static_cast<size_t>(g->node_count()), 0.0);
    c[0] = 1.0;
    AngularProfile unit_mean = AngularProfile::from_coeffs(g, c);
    const double mean_val = unit_mean.values()[0];  // constant basis function value
    std::vector<double> v(static_cast<size_t>(g->node_count()), base);
    std::vector<double> h(static_cast<size_t>(g->node_count()), 0.0);
    if (degree < 0 || degree >= g->node_count())
        throw std::invalid_argument("zonal_harmonic_profile: degree out of range");
    h[static_cast<size_t>(degree)] = 1.0;
    AngularProfile harm = AngularProfile::from_coeffs(g, h);
    // Normalize the harmonic so its value at the north pole equals 1.
    const double pole = harm.eval(0.0);
    for (int j = 0; j < g->node_count(); ++j)
        v[static_cast<size_t>(j)] += amplitude * harm.values()[static_cast<size_t>(j)] / pole;
    (void)mean_val;
    return AngularProfile(std::move(g), std::move(v));
}

AngularProfile profile_from_csv(std::shared_ptr<const AngularGeometry> g,
                                const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("profile_from_csv: cannot open " + path);
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string ang, val;
        if (!std::getline(ss, ang, ',') || !std::getline(ss, val))
            throw std::runtime_error("profile_from_csv: malformed line: " + line);
        v.push_back(std::stod(val));
    }
    if (static_cast<int>(v.size()) != g->node_count())
        throw std::runtime_error("profile_from_csv: row count must equal geometry nodes");
    return AngularProfile(std::move(g), std::move(v));
}

}  // namespace fdlab
