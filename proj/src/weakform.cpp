#include "fdlab/weakform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fdlab/util.hpp"

namespace fdlab {

namespace {
constexpr double kPi = std::numbers::pi;

// C-infinity transition: 0 for s <= 0, 1 for s >= 1.
double psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double psi_d(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }
double psi_dd(double s) {
    if (s <= 0.0) return 0.0;
    const double p = std::exp(-1.0 / s);
    return p * (1.0 / (s * s * s * s) - 2.0 / (s * s * s));
}

double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = psi(s), b = psi(1.0 - s);
    return a / (a + b);
}

double smooth_step_d(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double a = psi(s), b = psi(1.0 - s);
    const double ad = psi_d(s), bd = psi_d(1.0 - s);
    const double D = a + b;
    return (ad * b + a * bd) / (D * D);
}

double smooth_step_dd(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double a = psi(s), b = psi(1.0 - s);
    const double ad = psi_d(s), bd = psi_d(1.0 - s);
    const double add = psi_dd(s), bdd = psi_dd(1.0 - s);
    const double D = a + b;
    const double N = ad * b + a * bd;
    const double Dd = ad - bd;
    const double Nd = add * b - a * bdd;
    return Nd / (D * D) - 2.0 * N * Dd / (D * D * D);
}
}  // namespace

// ---- Cutoff -----------------------------------------------------------------

double Cutoff::base_eta(double x) {
    if (x <= 1.0) return 0.0;
    if (x >= 3.0) return 1.0;
    if (x <= 1.5) return (2.0 / 3.0) * std::pow(x - 1.0, 3);
    if (x <= 2.0) return (x - 1.5) + (2.0 / 3.0) * std::pow(2.0 - x, 3);
    if (x <= 2.5) return 1.0 - (2.5 - x) - (2.0 / 3.0) * std::pow(x - 2.0, 3);
    return 1.0 - (2.0 / 3.0) * std::pow(3.0 - x, 3);
}

double Cutoff::base_deta(double x) {
    if (x <= 1.0 || x >= 3.0) return 0.0;
    if (x <= 1.5) return 2.0 * (x - 1.0) * (x - 1.0);
    if (x <= 2.0) return 1.0 - 2.0 * (2.0 - x) * (2.0 - x);
    if (x <= 2.5) return 1.0 - 2.0 * (x - 2.0) * (x - 2.0);
    return 2.0 * (3.0 - x) * (3.0 - x);
}

double Cutoff::base_d2eta(double x) {
    if (x <= 1.0 || x >= 3.0) return 0.0;
    if (x <= 1.5) return 4.0 * (x - 1.0);
    if (x <= 2.0) return 4.0 * (2.0 - x);
    if (x <= 2.5) return -4.0 * (x - 2.0);
    return -4.0 * (3.0 - x);
}

Cutoff::Cutoff(double epsilon) : eps_(epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("Cutoff: epsilon > 0");
}

double Cutoff::eta(double r) const { return base_eta(r / eps_); }
double Cutoff::deta(double r) const { return base_deta(r / eps_) / eps_; }
double Cutoff::d2eta(double r) const { return base_d2eta(r / eps_) / (eps_ * eps_); }

Cutoff build_cutoff(double epsilon) {
    Cutoff c(epsilon);
    const int samples = 1000;
    double prev_eta = -1.0;
    for (int i = 0; i <= samples; ++i) {
        const double x = 0.5 + 3.0 * double(i) / samples;  // covers [0.5, 3.5]
        const double r = x * epsilon;
        const double e = c.eta(r), d = c.deta(r), dd = c.d2eta(r);
        const bool ok =
            e >= 0.0 && e <= 1.0 && e >= prev_eta - 1e-14 &&
            (x > 1.0 || e == 0.0) && (x < 3.0 || e == 1.0) &&
            d >= 0.0 && d <= Cutoff::c1_tilde / epsilon + 1e-12 &&
            std::abs(dd) <= Cutoff::c2_tilde / (epsilon * epsilon) + 1e-12 &&
            (!(x > 1.0 && x < 2.0) || dd >= 0.0) &&
            (!(x > 2.0 && x < 3.0) || dd <= 0.0);
        if (!ok) throw std::runtime_error("build_cutoff: property verification failed");
        prev_eta = e;
    }
    return c;
}

// ---- TestFunction -----------------------------------------------------------

TestFunction::TestFunction(std::vector<double> center, double plateau_radius,
                           double support_radius, double t0, double t_plateau0,
                           double t_plateau1, double t1)
    : center_(std::move(center)),
      plateau_(plateau_radius),
      radius_(support_radius),
      t0_(t0),
      tp0_(t_plateau0),
      tp1_(t_plateau1),
      t1_(t1) {
    if (!(plateau_ > 0.0 && radius_ > plateau_))
        throw std::invalid_argument("TestFunction: need 0 < plateau < support radius");
    if (!(t0_ < tp0_ && tp0_ <= tp1_ && tp1_ < t1_))
        throw std::invalid_argument("TestFunction: need t0 < tp0 <= tp1 < t1");
    // normalize the raw time bump to unit integral
    GaussRule rule = gauss_legendre(32);
    double z = (tp1_ - tp0_);
    auto rise = [&](double t) { return smooth_step((t - t0_) / (tp0_ - t0_)); };
    auto fall = [&](double t) { return smooth_step((t1_ - t) / (t1_ - tp1_)); };
    z += integrate(rise, t0_, tp0_, rule);
    z += integrate(fall, tp1_, t1_, rule);
    q_norm_ = 1.0 / z;
}

double TestFunction::spatial(double rho) const {
    if (rho <= plateau_) return 1.0;
    if (rho >= radius_) return 0.0;
    return smooth_step((radius_ - rho) / (radius_ - plateau_));
}

double TestFunction::spatial_d(double rho) const {
    if (rho <= plateau_ || rho >= radius_) return 0.0;
    return -smooth_step_d((radius_ - rho) / (radius_ - plateau_)) / (radius_ - plateau_);
}

double TestFunction::spatial_dd(double rho) const {
    if (rho <= plateau_ || rho >= radius_) return 0.0;
    return smooth_step_dd((radius_ - rho) / (radius_ - plateau_)) /
           ((radius_ - plateau_) * (radius_ - plateau_));
}

double TestFunction::time_factor(double t) const {
    if (t <= t0_ || t >= t1_) return 0.0;
    double q;
    if (t < tp0_)
        q = smooth_step((t - t0_) / (tp0_ - t0_));
    else if (t <= tp1_)
        q = 1.0;
    else
        q = smooth_step((t1_ - t) / (t1_ - tp1_));
    return q * q_norm_;
}

double TestFunction::time_factor_dt(double t) const {
    if (t <= t0_ || t >= t1_) return 0.0;
    if (t < tp0_)
        return smooth_step_d((t - t0_) / (tp0_ - t0_)) / (tp0_ - t0_) * q_norm_;
    if (t <= tp1_) return 0.0;
    return -smooth_step_d((t1_ - t) / (t1_ - tp1_)) / (t1_ - tp1_) * q_norm_;
}

namespace {
double dist_to(std::span<const double> x, const std::vector<double>& c) {
    double d2 = 0.0;
    for (size_t i = 0; i < c.size(); ++i) d2 += (x[i] - c[i]) * (x[i] - c[i]);
    return std::sqrt(d2);
}
}  // namespace

double TestFunction::value(std::span<const double> x, double t) const {
    return spatial(dist_to(x, center_)) * time_factor(t);
}

double TestFunction::dt(std::span<const double> x, double t) const {
    return spatial(dist_to(x, center_)) * time_factor_dt(t);
}

double TestFunction::laplacian(std::span<const double> x, double t) const {
    const double rho = dist_to(x, center_);
    if (rho < 1e-14) return 0.0;  // flat on the plateau
    const int n = dim();
    return (spatial_dd(rho) + (n - 1) * spatial_d(rho) / rho) * time_factor(t);
}

double TestFunction::directional_gradient(std::span<const double> x, double t,
                                          std::span<const double> omega) const {
    const double rho = dist_to(x, center_);
    if (rho < 1e-14) return 0.0;
    double dot = 0.0;
    for (size_t i = 0; i < center_.size(); ++i) dot += omega[i] * (x[i] - center_[i]);
    return spatial_d(rho) * (dot / rho) * time_factor(t);
}

// ---- annulus quadrature -------------------------------------------------------

namespace {

struct AngularNode {
    std::vector<double> omega;
    double weight;  // includes the measure of suppressed directions
};

std::vector<AngularNode> make_angular_nodes(int n, const WeakQuadOptions& opt) {
    std::vector<AngularNode> nodes;
    if (n == 2) {
        const int M = opt.azimuth_nodes;
        for (int j = 0; j < M; ++j) {
            const double phi = 2.0 * kPi * j / M;
            nodes.push_back({{std::cos(phi), std::sin(phi)}, 2.0 * kPi / M});
        }
    } else if (n == 3) {
        GaussRule gl = gauss_legendre(opt.polar_nodes);
        const int M = opt.azimuth_nodes;
        for (size_t iu = 0; iu < gl.x.size(); ++iu) {
            const double cu = gl.x[iu], su = std::sqrt(std::max(0.0, 1.0 - cu * cu));
            for (int j = 0; j < M; ++j) {
                const double phi = 2.0 * kPi * j / M;
                nodes.push_back({{su * std::cos(phi), su * std::sin(phi), cu},
                                 gl.w[iu] * 2.0 * kPi / M});
            }
        }
    } else {
        if (!opt.assume_axisymmetric)
            throw std::invalid_argument(
                "weakform: n >= 4 requires axisymmetric integrands "
                "(set WeakQuadOptions::assume_axisymmetric)");
        GaussRule gg = gauss_gegenbauer(opt.polar_nodes, 0.5 * (n - 2));
        const double zf = sphere_area(n - 2);
        for (size_t iu = 0; iu < gg.x.size(); ++iu) {
            const double cu = gg.x[iu], su = std::sqrt(std::max(0.0, 1.0 - cu * cu));
            std::vector<double> om(static_cast<size_t>(n), 0.0);
            om.front() = su;
            om.back() = cu;
            nodes.push_back({std::move(om), zf * gg.w[iu]});
        }
    }
    return nodes;
}

}  // namespace

AnnulusIntegrals boundary_integrals(const SpaceTimeField& u, double m,
                                    const TestFunction& phi, const SingularPath& xi,
                                    double t, double epsilon, int n,
                                    const WeakQuadOptions& opt) {
    if (n < 2) throw std::invalid_argument("boundary_integrals: n >= 2");
    const Cutoff cut(epsilon);
    const std::vector<double> xi_t = xi(t);
    if (static_cast<int>(xi_t.size()) != n)
        throw std::invalid_argument("boundary_integrals: xi(t) dimension mismatch");

    const auto ang = make_angular_nodes(n, opt);
    GaussRule gr = gauss_legendre(opt.radial_gauss);
    const double breaks[5] = {1.0, 1.5, 2.0, 2.5, 3.0};

    AnnulusIntegrals out;
    std::vector<double> x(static_cast<size_t>(n));
    for (int p = 0; p < 4; ++p) {
        const double a = breaks[p] * epsilon, b = breaks[p + 1] * epsilon;
        const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
        for (size_t iq = 0; iq < gr.x.size(); ++iq) {
            const double r = mid + hw * gr.x[iq];
            const double wr = hw * gr.w[iq] * std::pow(r, n - 1.0);
            const double eta = cut.eta(r), deta = cut.deta(r), d2eta = cut.d2eta(r);
            for (const auto& node : ang) {
                for (int d = 0; d < n; ++d)
                    x[static_cast<size_t>(d)] =
                        xi_t[static_cast<size_t>(d)] + r * node.omega[static_cast<size_t>(d)];
                const double W = wr * node.weight;
                const double uv = u(x, t);
                const double um = std::pow(uv, m);
                const double ph = phi.value(x, t);
                out.H += W * uv * eta * phi.dt(x, t);
                out.I += W * um * eta * phi.laplacian(x, t);
                out.J += W * 2.0 * um * deta * phi.directional_gradient(x, t, node.omega);
                out.K += W * um * ph * (d2eta + (n - 1) * deta / r);
                out.K1 += W * um * ph * deta / r;
                if (p < 2)
                    out.K2 += W * um * ph * d2eta;
                else
                    out.K3 += W * um * ph * (-d2eta);
            }
        }
    }
    return out;
}

AnnulusIntegrals boundary_integrals_time_integrated(
    const SpaceTimeField& u, double m, const TestFunction& phi,
    const SingularPath& xi, double epsilon, int n, const WeakQuadOptions& opt) {
    GaussRule gt = gauss_legendre(opt.time_gauss);
    AnnulusIntegrals acc;
    for (const auto& [a, b] : phi.time_pieces()) {
        const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
        for (size_t k = 0; k < gt.x.size(); ++k) {
            const double t = mid + hw * gt.x[k];
            const double W = hw * gt.w[k];
            AnnulusIntegrals one = boundary_integrals(u, m, phi, xi, t, epsilon, n, opt);
            acc.H += W * one.H;
            acc.I += W * one.I;
            acc.J += W * one.J;
            acc.K += W * one.K;
            acc.K1 += W * one.K1;
            acc.K2 += W * one.K2;
            acc.K3 += W * one.K3;
        }
    }
    return acc;
}

LEstimates l_estimates(const Cutoff& cutoff, double b, double a) {
    GaussRule gr = gauss_legendre(24);
    const double eps = cutoff.epsilon();
    LEstimates out;
    out.L1 = b * integrate(
                     [&](double r) { return std::pow(r, a + 1.0) * cutoff.d2eta(r); },
                     eps, 2.0 * eps, gr);
    out.L2 = b * integrate(
                     [&](double r) { return std::pow(r, a + 1.0) * (-cutoff.d2eta(r)); },
                     2.0 * eps, 3.0 * eps, gr);
    out.L3 = b * integrate(
                     [&](double r) { return std::pow(r, a) * cutoff.deta(r); }, eps,
                     3.0 * eps, gr);
    return out;
}

std::vector<double> default_epsilon_schedule(double eps0, double ratio, int count) {
    std::vector<double> eps(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) eps[static_cast<size_t>(k)] = eps0 * std::pow(ratio, k);
    return eps;
}

DiracResult dirac_coefficient(const SpaceTimeField& u, double m,
                              const SingularPath& xi, const TestFunction& phi, int n,
                              std::span<const double> epsilon_schedule,
                              const WeakQuadOptions& opt, int workers) {
    if (epsilon_schedule.size() < 3)
        throw std::invalid_argument("dirac_coefficient: need >= 3 epsilons");
    const int K = static_cast<int>(epsilon_schedule.size());
    std::vector<double> F(static_cast<size_t>(K), 0.0);
    std::vector<AnnulusIntegrals> parts(static_cast<size_t>(K));
    parallel_for(0, K, workers, [&](int k) {
        parts[static_cast<size_t>(k)] = boundary_integrals_time_integrated(
            u, m, phi, xi, epsilon_schedule[static_cast<size_t>(k)], n, opt);
        const auto& p = parts[static_cast<size_t>(k)];
        F[static_cast<size_t>(k)] = p.H + p.I + p.J + p.K;
    });

    DiracResult res;
    auto ex = richardson_extrapolate(epsilon_schedule, F);
    res.limit = ex.limit;
    res.uncertainty = ex.uncertainty;
    res.monotone = ex.monotone;
    // diverging tail (hypothesis violation): differences must shrink
    const double d_last = std::abs(F[static_cast<size_t>(K - 1)] - F[static_cast<size_t>(K - 2)]);
    const double d_prev = std::abs(F[static_cast<size_t>(K - 2)] - F[static_cast<size_t>(K - 3)]);
    res.flagged_nonconvergent = !ex.monotone || d_last > d_prev;
    for (int k = 0; k < K; ++k) {
        EpsTableRow row;
        row.eps = epsilon_schedule[static_cast<size_t>(k)];
        row.integrals = parts[static_cast<size_t>(k)];
        row.running_extrapolant =
            (k == 0) ? F[0] : ex.extrapolants[static_cast<size_t>(k - 1)];
        res.table.push_back(row);
    }
    return res;
}

WeakResidualResult weak_residual_no_source(const SpaceTimeField& u, double m,
                                           const TestFunction& phi, int n,
                                           std::span<const double> center,
                                           std::span<const double> epsilon_schedule,
                                           const WeakQuadOptions& opt, int workers) {
    if (epsilon_schedule.size() < 3)
        throw std::invalid_argument("weak_residual_no_source: need >= 3 epsilons");
    const int K = static_cast<int>(epsilon_schedule.size());
    const auto ang = make_angular_nodes(n, opt);
    GaussRule gr = gauss_legendre(12);
    GaussRule gt = gauss_legendre(opt.time_gauss);
    std::vector<double> xi0(center.begin(), center.end());

    double c_off = 0.0;  // distance from phi's center to the singularity
    for (int d = 0; d < n; ++d)
        c_off += (phi.center()[static_cast<size_t>(d)] - xi0[static_cast<size_t>(d)]) *
                 (phi.center()[static_cast<size_t>(d)] - xi0[static_cast<size_t>(d)]);
    const double r_outer = std::sqrt(c_off) + phi.support_radius();

    WeakResidualResult res;
    res.eps.assign(epsilon_schedule.begin(), epsilon_schedule.end());
    res.outer_integral.resize(static_cast<size_t>(K));
    res.annulus_sum.resize(static_cast<size_t>(K));
    std::vector<double> scales(static_cast<size_t>(K), 0.0);

    parallel_for(0, K, workers, [&](int k) {
        const double eps = epsilon_schedule[static_cast<size_t>(k)];
        const double r_in = 3.0 * eps;
        const int panels =
            std::max(4, static_cast<int>(std::ceil(8.0 * std::log10(r_outer / r_in))));
        double total = 0.0, scale = 0.0;
        std::vector<double> x(static_cast<size_t>(n));
        for (const auto& [ta, tb] : phi.time_pieces()) {
        const double tm = 0.5 * (ta + tb);
        const double th_ = 0.5 * (tb - ta);
        for (size_t kt = 0; kt < gt.x.size(); ++kt) {
            const double t = tm + th_ * gt.x[kt];
            const double Wt = th_ * gt.w[kt];
            for (int p = 0; p < panels; ++p) {
                const double a = r_in * std::pow(r_outer / r_in, double(p) / panels);
                const double b = r_in * std::pow(r_outer / r_in, double(p + 1) / panels);
                const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
                for (size_t iq = 0; iq < gr.x.size(); ++iq) {
                    const double r = mid + hw * gr.x[iq];
                    const double wr = hw * gr.w[iq] * std::pow(r, n - 1.0);
                    for (const auto& node : ang) {
                        for (int d = 0; d < n; ++d)
                            x[static_cast<size_t>(d)] =
                                xi0[static_cast<size_t>(d)] +
                                r * node.omega[static_cast<size_t>(d)];
                        const double W = Wt * wr * node.weight;
                        const double pt = phi.dt(x, t);
                        const double pl = phi.laplacian(x, t);
                        if (pt == 0.0 && pl == 0.0) continue;
                        const double uv = u(x, t);
                        const double um = std::pow(uv, m);
                        total += W * (uv * pt + um * pl);
                        scale += W * (std::abs(uv * pt) + std::abs(um * pl));
                    }
                }
            }
        }
        }
        res.outer_integral[static_cast<size_t>(k)] = total;
        scales[static_cast<size_t>(k)] = scale;
        auto ann = boundary_integrals_time_integrated(
            u, m, phi, [&xi0](double) { return xi0; }, eps, n, opt);
        res.annulus_sum[static_cast<size_t>(k)] = ann.H + ann.I + ann.J + ann.K;
    });

    auto ex = richardson_extrapolate(res.eps, res.outer_integral);
    res.limit = ex.limit;
    res.uncertainty = ex.uncertainty;
    res.scale = scales.back();
    const double d_last = std::abs(res.outer_integral[static_cast<size_t>(K - 1)] -
                                   res.outer_integral[static_cast<size_t>(K - 2)]);
    const double d_prev = std::abs(res.outer_integral[static_cast<size_t>(K - 2)] -
                                   res.outer_integral[static_cast<size_t>(K - 3)]);
    res.flagged_nonconvergent = !ex.monotone || d_last > d_prev;
    return res;
}

SpaceTimeField make_v_estimate_field(int n, double m,
                                     const std::function<double(double)>& k,
                                     const std::function<double(double)>& b,
                                     double lambda_tilde, const SingularPath& xi) {
    return [n, m, k, b, lambda_tilde, xi](std::span<const double> x, double t) {
        const std::vector<double> c = xi(t);
        double d2 = 0.0;
        for (size_t i = 0; i < c.size(); ++i) d2 += (x[i] - c[i]) * (x[i] - c[i]);
        const double rho = std::sqrt(d2);
        if (!(rho > 0.0)) return std::numeric_limits<double>::infinity();
        const double um = std::pow(k(t), m) *
                          (std::pow(rho, 2.0 - n) + b(t) * std::pow(rho, -lambda_tilde));
        return std::pow(um, 1.0 / m);
    };
}

}  // namespace fdlab
