#include "fdlab/critical.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fdlab/util.hpp"

namespace fdlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---- sphere flow ---------------------------------------------------------------

SphereTrajectory evolve_critical(const AngularProfile& alpha0, int n, double m,
                                 double T, const SphereFlowConfig& cfg) {
    if (!alpha0.positive())
        throw std::domain_error("evolve_critical: alpha0 must be positive");
    if (alpha0.geometry().dim() != n)
        throw std::invalid_argument("evolve_critical: geometry dimension mismatch");
    const double A = critical_coefficient_A(n, m);
    const auto geom = alpha0.geometry_ptr();
    const int N = geom->node_count();

    // dense spectral Laplacian in nodal space
    Eigen::MatrixXd D(N, N);
    for (int c = 0; c < N; ++c) {
        std::vector<double> e(static_cast<size_t>(N), 0.0);
        e[static_cast<size_t>(c)] = 1.0;
        auto col = laplace_beltrami(AngularProfile(geom, e));
        for (int r = 0; r < N; ++r) D(r, c) = col.values()[static_cast<size_t>(r)];
    }

    auto G = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
        Eigen::VectorXd am(N);
        for (int i = 0; i < N; ++i) am(i) = std::pow(a(i), m);
        return D * am + A * am;
    };

    SphereTrajectory out;
    out.A = A;
    Eigen::VectorXd a(N);
    for (int i = 0; i < N; ++i) a(i) = alpha0.values()[static_cast<size_t>(i)];
    double t = 0.0;
    out.states.push_back({alpha0, 0.0});

    const double th = cfg.theta_scheme;
    int step_count = 0;
    double dt = cfg.dt;
    int halvings = 0;
    while (t < T - 1e-14 * std::max(1.0, T)) {
        const double step = std::min(dt, T - t);
        Eigen::VectorXd rhs = a + step * (1.0 - th) * G(a);
        Eigen::VectorXd x = a;  // Newton iterate for the new state
        bool ok = false;
        for (int it = 0; it < cfg.newton_max_iter; ++it) {
            if (x.minCoeff() <= 0.0) break;
            Eigen::VectorXd F = x - step * th * G(x) - rhs;
            double err = 0.0;
            for (int i = 0; i < N; ++i)
                err = std::max(err, std::abs(F(i)) / (1.0 + std::abs(a(i))));
            if (err <= cfg.newton_tol) {
                ok = true;
                break;
            }
            Eigen::VectorXd gp(N);
            for (int i = 0; i < N; ++i) gp(i) = m * std::pow(x(i), m - 1.0);
            Eigen::MatrixXd J = Eigen::MatrixXd::Identity(N, N) -
                                step * th * ((D * gp.asDiagonal()) +
                                             Eigen::MatrixXd(A * gp.asDiagonal()));
            Eigen::VectorXd delta = J.partialPivLu().solve(-F);
            double lambda = 1.0;
            while (lambda >= 1e-6 && (x + lambda * delta).minCoeff() <= 0.0)
                lambda *= 0.5;
            if (lambda < 1e-6) break;
            x += lambda * delta;
        }
        if (ok && x.minCoeff() > 0.0) {
            a = x;
            t += step;
            ++step_count;
            if (step_count % cfg.store_every == 0 || t >= T - 1e-14) {
                std::vector<double> vals(static_cast<size_t>(N));
                for (int i = 0; i < N; ++i) vals[static_cast<size_t>(i)] = a(i);
                out.states.push_back({AngularProfile(geom, vals), t});
            }
            continue;
        }
        dt *= 0.5;
        if (++halvings > cfg.max_halvings) {
            out.completed = false;
            out.blowdown_estimate = t;  // positivity could not be continued past here
            return out;
        }
    }
    return out;
}

// ---- separable solutions --------------------------------------------------------

double separable_flow_residual(const AngularProfile& beta, double C, double t0,
                               int n, double m, double theta, double t) {
    const double A = critical_coefficient_A(n, m);
    AngularProfile lap = laplace_beltrami(beta);
    const double b = beta.eval(theta);
    const double taum = std::pow((1.0 - m) * C * t + t0, m / (1.0 - m));
    return taum * (C * std::pow(b, 1.0 / m) - lap.eval(theta) - A * b);
}

SeparableDiagnostics separable_solution(const AngularProfile& beta, double C,
                                        double t0, int n, double m,
                                        int space_samples, int time_samples,
                                        double t_max) {
    if (!beta.positive())
        throw std::domain_error("separable_solution: beta must be positive");
    if (!(t0 > 0.0)) throw std::invalid_argument("separable_solution: t0 > 0");
    const double A = critical_coefficient_A(n, m);

    SeparableDiagnostics diag{SeparableCritical{beta, C, t0, m, n},
                              (C != 0.0 && A != 0.0 && C * A < 0.0), 0.0, 0};

    AngularProfile lap = laplace_beltrami(beta);
    const bool circle = beta.geometry().mode() == AngularMode::circle;
    for (int it = 0; it < time_samples; ++it) {
        const double t = t_max * (it + 0.5) / time_samples;
        const double taum = std::pow((1.0 - m) * C * t + t0, m / (1.0 - m));
        for (int is = 0; is < space_samples; ++is) {
            const double th = circle ? 2.0 * kPi * is / space_samples
                                     : kPi * (is + 0.5) / space_samples;
            const double b = beta.eval(th);
            const double res =
                taum * (C * std::pow(b, 1.0 / m) - lap.eval(th) - A * b);
            diag.max_abs_residual = std::max(diag.max_abs_residual, std::abs(res));
            ++diag.samples;
        }
    }
    return diag;
}

// ---- Hamiltonian phase plane ------------------------------------------------------

double hamiltonian_energy(double beta, double v, double A, double C, double m) {
    if (!(beta > 0.0)) throw std::domain_error("hamiltonian_energy: beta > 0");
    const double p = 1.0 / m + 1.0;
    return 0.5 * v * v + 0.5 * A * beta * beta - C * std::pow(beta, p) / p;
}

double center_beta(double A, double C, double m) {
    if (A * C <= 0.0)
        throw std::domain_error("center_beta: A and C must share a sign");
    return std::pow(A / C, m / (1.0 - m));
}

double linearized_period(double A, double C, double m) {
    // V''(P) = A (m-1)/m at the fixed point; a center requires V'' > 0.
    (void)C;
    const double vpp = A * (m - 1.0) / m;
    if (!(vpp > 0.0))
        throw std::domain_error("linearized_period: fixed point is not a center");
    return 2.0 * kPi / std::sqrt(vpp);
}

namespace {
inline double accel(double beta, double A, double C, double m) {
    // v' = -A beta + C beta^{1/m}; guarded against beta <= 0 by the caller
    return -A * beta + C * std::pow(beta, 1.0 / m);
}

// cubic Hermite value at fraction x in [0,1] of a step of width h
inline double hermite(double f0, double d0, double f1, double d1, double h, double x) {
    const double x2 = x * x, x3 = x2 * x;
    return (2 * x3 - 3 * x2 + 1) * f0 + (x3 - 2 * x2 + x) * h * d0 +
           (-2 * x3 + 3 * x2) * f1 + (x3 - x2) * h * d1;
}
}  // namespace

Orbit trace_orbit(double beta0, double v0, double A, double C, double m,
                  const OrbitConfig& cfg) {
    if (!(beta0 > 0.0)) throw std::domain_error("trace_orbit: beta0 > 0 required");
    Orbit orb;
    orb.energy = hamiltonian_energy(beta0, v0, A, C, m);
    if (A * C > 0.0) {
        const double vpp = A * (m - 1.0) / m;
        if (vpp > 0.0) orb.linear_period = 2.0 * kPi / std::sqrt(vpp);
    }

    const double bP = (A * C > 0.0) ? center_beta(A, C, m) : 0.0;
    // degenerate start at the fixed point
    if (std::abs(beta0 - bP) < 1e-14 && std::abs(v0) < 1e-14) {
        orb.t = {0.0};
        orb.beta = {beta0};
        orb.v = {v0};
        orb.closed = true;
        orb.period = orb.linear_period;
        orb.closure_error = 0.0;
        return orb;
    }

    const double h = cfg.step;
    double b = beta0, v = v0, t = 0.0;
    double acc = accel(b, A, C, m);
    const long max_steps = static_cast<long>(cfg.max_time / h);
    int stored = 0;
    bool left_section = false;
    for (long k = 0; k < max_steps; ++k) {
        if (stored++ % cfg.store_every == 0) {
            orb.t.push_back(t);
            orb.beta.push_back(b);
            orb.v.push_back(v);
        }
        // leapfrog (velocity Verlet)
        const double v_half = v + 0.5 * h * acc;
        const double b_new = b + h * v_half;
        if (!(b_new > 0.0)) {
            orb.positive = false;
            return orb;
        }
        const double acc_new = accel(b_new, A, C, m);
        const double v_new = v_half + 0.5 * h * acc_new;

        // Poincare section: v crosses 0 downward with beta right of the center
        // (the full-period return for starts at (beta0 > P, v = 0))
        if (left_section && v > 0.0 && v_new <= 0.0 && b_new > bP) {
            // Hermite root of v on [t, t+h]
            double x = v / (v - v_new);  // secant start
            for (int it = 0; it < 30; ++it) {
                const double f = hermite(v, acc, v_new, acc_new, h, x);
                const double df =
                    (hermite(v, acc, v_new, acc_new, h, x + 1e-7) - f) / 1e-7;
                if (df == 0.0) break;
                const double step = f / df;
                x -= step;
                if (std::abs(step) < 1e-15) break;
            }
            x = std::clamp(x, 0.0, 1.0);
            const double b_cross = hermite(b, v, b_new, v_new, h, x);
            const double v_cross = hermite(v, acc, v_new, acc_new, h, x);
            orb.period = t + x * h;
            orb.closure_error = std::hypot(b_cross - beta0, v_cross - v0);
            orb.closed = true;
            orb.t.push_back(orb.period);
            orb.beta.push_back(b_cross);
            orb.v.push_back(v_cross);
            return orb;
        }
        if (v < -1e-12) left_section = true;
        b = b_new;
        v = v_new;
        acc = acc_new;
        t += h;
    }
    return orb;  // non-closing within max_time
}

PeriodMatch match_orbit_period(int k, double A, double C, double m,
                               double period_tol, const OrbitConfig& cfg) {
    if (k < 1) throw std::invalid_argument("match_orbit_period: k >= 1");
    if (!(A < 0.0 && C < 0.0))
        throw std::domain_error("match_orbit_period: closed orbits need A, C < 0");
    const double target = 2.0 * kPi / k;
    const double bP = center_beta(A, C, m);

    auto period_at = [&](double amp) {
        Orbit o = trace_orbit(bP + amp, 0.0, A, C, m, cfg);
        return o;
    };

    // the period grows with amplitude; bracket the target if possible
    double amp_lo = 1e-3 * bP;
    Orbit o_lo = period_at(amp_lo);
    if (!o_lo.closed)
        throw std::runtime_error("match_orbit_period: small orbit did not close");
    PeriodMatch out;
    if (o_lo.period >= target - period_tol) {
        // attainable only in the small-amplitude limit: shrink until within
        // tolerance of the linearized period
        double amp = amp_lo;
        Orbit o = o_lo;
        for (int it = 0; it < 40 && std::abs(o.period - target) > period_tol; ++it) {
            amp *= 0.5;
            Orbit o_try = period_at(amp);
            if (!o_try.closed) break;
            o = o_try;
        }
        out.orbit = o;
        out.amplitude = amp;
        out.exact = std::abs(o.period - target) <= period_tol;
        return out;
    }
    double amp_hi = amp_lo;
    Orbit o_hi = o_lo;
    for (int it = 0; it < 60; ++it) {
        amp_hi = std::min(amp_hi * 1.5, 0.95 * bP + 0.0);
        o_hi = period_at(amp_hi);
        if (!o_hi.closed || !o_hi.positive)
            throw std::runtime_error("match_orbit_period: lost closure while growing amplitude");
        if (o_hi.period >= target) break;
        amp_lo = amp_hi;
    }
    if (o_hi.period < target)
        throw std::runtime_error("match_orbit_period: target period unreachable");
    for (int it = 0; it < 60; ++it) {
        const double amp = 0.5 * (amp_lo + amp_hi);
        Orbit o = period_at(amp);
        if (!o.closed) throw std::runtime_error("match_orbit_period: orbit did not close");
        if (std::abs(o.period - target) <= period_tol) {
            out.orbit = o;
            out.amplitude = amp;
            out.exact = true;
            return out;
        }
        if (o.period < target)
            amp_lo = amp;
        else
            amp_hi = amp;
    }
    out.orbit = period_at(0.5 * (amp_lo + amp_hi));
    out.amplitude = 0.5 * (amp_lo + amp_hi);
    out.exact = std::abs(out.orbit.period - target) <= period_tol;
    return out;
}

AngularProfile orbit_to_profile(const Orbit& orbit,
                                std::shared_ptr<const AngularGeometry> geom, int k) {
    if (!orbit.closed || orbit.period <= 0.0)
        throw std::invalid_argument("orbit_to_profile: needs a closed orbit");
    if (geom->mode() != AngularMode::circle)
        throw std::invalid_argument("orbit_to_profile: circle geometry required");
    const int N = geom->node_count();
    std::vector<double> vals(static_cast<size_t>(N));
    for (int j = 0; j < N; ++j) {
        double tau = std::fmod(geom->theta()[static_cast<size_t>(j)] * k, 2.0 * kPi) /
                     (2.0 * kPi) * orbit.period;
        // locate the bracketing stored samples (uniform in time)
        size_t hi = 1;
        while (hi + 1 < orbit.t.size() && orbit.t[hi] < tau) ++hi;
        const size_t lo = hi - 1;
        const double h = orbit.t[hi] - orbit.t[lo];
        const double x = (h > 0.0) ? (tau - orbit.t[lo]) / h : 0.0;
        vals[static_cast<size_t>(j)] =
            hermite(orbit.beta[lo], orbit.v[lo], orbit.beta[hi], orbit.v[hi], h, x);
    }
    return AngularProfile(std::move(geom), std::move(vals));
}

SweepResult orbit_sweep(double A, double C, double m, int starts, double spread,
                        unsigned seed, const OrbitConfig& cfg, int workers) {
    SweepResult out;
    out.starts = starts;
    out.orbits.resize(static_cast<size_t>(starts));
    std::mt19937_64 rng(seed);
    std::vector<std::pair<double, double>> inits;
    std::uniform_real_distribution<double> db(0.05, spread), dv(-spread, spread);
    const double b0 = (A * C > 0.0) ? center_beta(A, C, m) : 1.0;
    for (int i = 0; i < starts; ++i) inits.emplace_back(b0 + db(rng), dv(rng));
    parallel_for(0, starts, workers, [&](int i) {
        out.orbits[static_cast<size_t>(i)] =
            trace_orbit(inits[static_cast<size_t>(i)].first,
                        inits[static_cast<size_t>(i)].second, A, C, m, cfg);
    });
    for (const auto& o : out.orbits)
        if (o.closed && o.positive) ++out.closed;
    return out;
}

}  // namespace fdlab
