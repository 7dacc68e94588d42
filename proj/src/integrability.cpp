#include "fdlab/integrability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fdlab/quadrature.hpp"
#include "fdlab/util.hpp"

namespace fdlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* lp_class_name(LpClass c) {
    switch (c) {
        case LpClass::finite: return "finite";
        case LpClass::power_divergent: return "power_divergent";
        case LpClass::log_divergent: return "log_divergent";
        case LpClass::ambiguous: return "ambiguous";
    }
    return "unknown";
}

double local_lp_mass(const RadialField& u, int n, AngularMode mode, double p,
                     double eps, const LpMassOptions& opt) {
    if (!(p >= 1.0)) throw std::invalid_argument("local_lp_mass: p >= 1");
    if (!(eps > 0.0 && eps < opt.ball_radius))
        throw std::invalid_argument("local_lp_mass: eps in (0, R)");

    // angular nodes and weights over S^{n-1}
    std::vector<double> th, aw;
    if (mode == AngularMode::circle || n == 2) {
        const int M = opt.angular_nodes;
        for (int j = 0; j < M; ++j) {
            th.push_back(2.0 * kPi * j / M);
            aw.push_back(2.0 * kPi / M);
        }
    } else {
        GaussRule gg = gauss_gegenbauer(opt.angular_nodes, 0.5 * (n - 2));
        const double zf = sphere_area(n - 2);
        for (size_t i = 0; i < gg.x.size(); ++i) {
            th.push_back(std::acos(std::clamp(gg.x[i], -1.0, 1.0)));
            aw.push_back(zf * gg.w[i]);
        }
    }

    GaussRule gr = gauss_legendre(opt.radial_gauss);
    GaussRule gt = gauss_legendre(opt.time_gauss);

    double total = 0.0;
    const double tm = 0.5 * (opt.t0 + opt.t1), thw = 0.5 * (opt.t1 - opt.t0);
    for (size_t kt = 0; kt < gt.x.size(); ++kt) {
        const double t = tm + thw * gt.x[kt];
        const double Wt = thw * gt.w[kt];

        std::vector<double> cuts{eps, opt.ball_radius};
        if (opt.radial_breakpoints)
            for (double b : opt.radial_breakpoints(t))
                if (b > eps && b < opt.ball_radius) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());

        double space = 0.0;
        for (size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double lo = cuts[c], hi = cuts[c + 1];
            const double decades = std::log10(hi / lo);
            const int panels =
                std::max(1, static_cast<int>(std::ceil(decades * opt.panels_per_decade)));
            for (int pp = 0; pp < panels; ++pp) {
                const double a = lo * std::pow(hi / lo, double(pp) / panels);
                const double b = lo * std::pow(hi / lo, double(pp + 1) / panels);
                const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
                for (size_t iq = 0; iq < gr.x.size(); ++iq) {
                    const double r = mid + hw * gr.x[iq];
                    const double wr = hw * gr.w[iq];
                    for (size_t j = 0; j < th.size(); ++j) {
                        const double v = u(r, th[j], t);
                        if (v < 0.0)
                            throw std::domain_error("local_lp_mass: negative field value");
                        if (v == 0.0) continue;
                        // log-space evaluation guards overflow of v^p r^{n-1}
                        const double le = p * std::log(v) + (n - 1.0) * std::log(r);
                        if (le > 700.0)
                            throw std::overflow_error(
                                "local_lp_mass: integrand overflows double range");
                        space += wr * aw[j] * std::exp(le);
                    }
                }
            }
        }
        total += Wt * space;
    }
    return total;
}

namespace {

// residual of the model I ~ c0 + c1 * f(eps) fitted by linear least squares
struct TwoParamFit {
    double c0 = 0.0, c1 = 0.0, rss = 0.0;
};

TwoParamFit fit_affine(const std::vector<LpSample>& s,
                       const std::function<double(double)>& f) {
    const size_t n = s.size();
    double sf = 0, sy = 0, sff = 0, sfy = 0;
    for (const auto& smp : s) {
        const double x = f(smp.eps);
        sf += x;
        sy += smp.I;
        sff += x * x;
        sfy += x * smp.I;
    }
    const double det = n * sff - sf * sf;
    TwoParamFit fit;
    fit.c1 = (n * sfy - sf * sy) / det;
    fit.c0 = (sy - fit.c1 * sf) / n;
    for (const auto& smp : s) {
        const double r = smp.I - fit.c0 - fit.c1 * f(smp.eps);
        fit.rss += r * r;
    }
    return fit;
}

}  // namespace

LpReport divergence_diagnosis(std::vector<LpSample> samples, double p,
                              std::string region) {
    if (samples.size() < 5)
        throw std::invalid_argument("divergence_diagnosis: need >= 5 samples");
    std::sort(samples.begin(), samples.end(),
              [](const LpSample& a, const LpSample& b) { return a.eps > b.eps; });

    LpReport rep;
    rep.p = p;
    rep.region = std::move(region);
    rep.samples = samples;

    // Increment slope: D_k = I(eps_{k+1}) - I(eps_k) against the geometric mean
    // abscissa.  Power divergence gives slope -q < 0, log divergence slope 0,
    // convergence slope > 0.
    std::vector<double> lx, ly;
    bool increments_positive = true;
    for (size_t k = 0; k + 1 < samples.size(); ++k) {
        const double d = samples[k + 1].I - samples[k].I;
        if (d <= 0.0) {
            increments_positive = false;
            break;
        }
        lx.push_back(0.5 * (std::log(samples[k + 1].eps) + std::log(samples[k].eps)));
        ly.push_back(std::log(d));
    }

    // model fits
    auto power_rss = [&](double q) {
        return fit_affine(samples, [q](double e) { return std::pow(e, -q); }).rss;
    };
    // golden-section over q in [-10, 10] (negative q = converging tail)
    double qa = -10.0, qb = 10.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double q1 = qb - gr * (qb - qa), q2 = qa + gr * (qb - qa);
    double f1 = power_rss(q1), f2 = power_rss(q2);
    for (int it = 0; it < 120; ++it) {
        if (f1 < f2) {
            qb = q2;
            q2 = q1;
            f2 = f1;
            q1 = qb - gr * (qb - qa);
            f1 = power_rss(q1);
        } else {
            qa = q1;
            q1 = q2;
            f1 = f2;
            q2 = qa + gr * (qb - qa);
            f2 = power_rss(q2);
        }
    }
    const double q_best = 0.5 * (qa + qb);
    auto pw = fit_affine(samples, [q_best](double e) { return std::pow(e, -q_best); });
    auto lg = fit_affine(samples, [](double e) { return std::log(1.0 / e); });
    rep.rss_power = pw.rss;
    rep.rss_log = lg.rss;

    if (!increments_positive) {
        // tail not increasing: treat as finite (converging) immediately
        rep.classification = LpClass::finite;
        rep.exponent = std::min(q_best, 0.0);
        rep.c0 = pw.c0;
        rep.c1 = pw.c1;
        return rep;
    }

    LinearFit slope = fit_line(lx, ly);
    rep.exponent_sigma = slope.slope_stderr;

    // The power model contains the log model in the q -> 0 limit, so a
    // genuine power classification demands a macroscopic exponent on top of
    // the 3-sigma increment-slope test; kQMin separates the two regimes.
    constexpr double kQMin = 0.1;
    const double slope_tol = std::max(3.0 * slope.slope_stderr, kQMin);
    const bool slope_negative_sig = slope.slope < -slope_tol;
    const bool slope_flat = std::abs(slope.slope) <= slope_tol;
    const bool slope_positive = slope.slope > slope_tol;

    const double rel_gap = std::abs(pw.rss - lg.rss) / std::max({pw.rss, lg.rss, 1e-300});

    if (slope_positive || q_best < -1e-3) {
        rep.classification = LpClass::finite;
        rep.exponent = q_best;
        rep.c0 = pw.c0;
        rep.c1 = pw.c1;
        return rep;
    }
    if (q_best >= kQMin && slope_negative_sig) {
        rep.classification = (rel_gap < 0.1 || pw.rss >= lg.rss)
                                 ? LpClass::ambiguous
                                 : LpClass::power_divergent;
        rep.exponent = q_best;
        rep.c0 = pw.c0;
        rep.c1 = pw.c1;
        return rep;
    }
    if (slope_flat || q_best < kQMin) {
        rep.classification =
            (lg.c1 > 0.0) ? LpClass::log_divergent : LpClass::ambiguous;
        rep.exponent = 0.0;
        rep.c0 = lg.c0;
        rep.c1 = lg.c1;
        return rep;
    }
    rep.classification = LpClass::ambiguous;
    rep.exponent = q_best;
    rep.c0 = pw.c0;
    rep.c1 = pw.c1;
    return rep;
}

SnakingThreshold snaking_threshold(int n, double m) {
    if (n < 2) throw std::invalid_argument("snaking_threshold: n >= 2");
    if (!(m > 0.0 && m < 1.0))
        throw std::invalid_argument("snaking_threshold: m in (0,1)");
    SnakingThreshold out;
    out.p_threshold = (1.0 - m) * (n - 1.0) / 2.0;
    out.no_integrable_p = out.p_threshold <= 1.0;
    return out;
}

double traveling_wave_lp_mass(int n, double m, double p, double C, double eps,
                              int radial_gauss, int panels_per_decade) {
    if (!(eps > 0.0 && eps < 0.5))
        throw std::invalid_argument("traveling_wave_lp_mass: eps in (0, 1/2)");
    // I(eps) = C^p |S^{n-2}| int_0^1 dt int_t^{1+t} y^{n-1-p/(1-m)}
    //          int_eps^{1/y} r^{n-2} (sqrt(r^2+1)-1)^{-p/(1-m)} dr dy
    const double pw = p / (1.0 - m);
    GaussRule gr = gauss_legendre(radial_gauss);
    GaussRule gy = gauss_legendre(16);
    GaussRule gt = gauss_legendre(16);

    auto inner = [&](double ymax_inv) {
        // int_eps^{ymax_inv} r^{n-2} (sqrt(r^2+1)-1)^{-pw} dr, log panels
        return integrate_log_panels(
            [&](double r) {
                // sqrt(r^2+1)-1 evaluated stably for small r
                const double s = r * r / (std::sqrt(r * r + 1.0) + 1.0);
                return std::pow(r, n - 2.0) * std::pow(s, -pw);
            },
            eps, ymax_inv, panels_per_decade, gr);
    };

    double total = 0.0;
    for (size_t kt = 0; kt < gt.x.size(); ++kt) {
        const double t = 0.5 + 0.5 * gt.x[kt];
        const double Wt = 0.5 * gt.w[kt];
        double inner_y = 0.0;
        const double ya = t, yb = 1.0 + t;
        for (size_t ky = 0; ky < gy.x.size(); ++ky) {
            const double y = 0.5 * (ya + yb) + 0.5 * (yb - ya) * gy.x[ky];
            const double Wy = 0.5 * (yb - ya) * gy.w[ky];
            if (1.0 / y <= eps) continue;
            inner_y += Wy * std::pow(y, n - 1.0 - pw) * inner(1.0 / y);
        }
        total += Wt * inner_y;
    }
    return std::pow(C, p) * sphere_area(n - 2) * total;
}

}  // namespace fdlab
