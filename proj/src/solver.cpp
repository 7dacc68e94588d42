#include "fdlab/solver.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fdlab/quadrature.hpp"
#include "fdlab/util.hpp"

#include <limits>

namespace fdlab {

namespace {
constexpr double kPi = std::numbers::pi;

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Stencil coefficients of the transformed operator
//   L g = e^{-2s} [ flux-form radial + Delta_omega ] g,
// radial flux weights e^{+-(n-2) ds/2} (exact on constants and on the
// stationary power e^{-(n-2)s}).
struct Stencil {
    int Ns = 0, Nth = 0;
    double inv_ds2 = 0.0;
    double Ep = 1.0, Em = 1.0;      // radial flux weights
    std::vector<double> scale;      // e^{-2 s_i} (or 1 in harness mode)
    std::vector<double> ang_p, ang_m;  // angular neighbor coefficients / dtheta^2
    bool periodic = false;
    bool neumann = false;

    int idx(int i, int j) const { return i * Nth + j; }
};

Stencil make_stencil(const RadialGrid& g, bool unit_weights) {
    Stencil st;
    st.Ns = g.Ns;
    st.Nth = g.Ntheta;
    const double ds = g.ds();
    st.inv_ds2 = 1.0 / (ds * ds);
    st.Ep = unit_weights ? 1.0 : std::exp(0.5 * (g.n - 2) * ds);
    st.Em = unit_weights ? 1.0 : std::exp(-0.5 * (g.n - 2) * ds);
    st.scale.resize(static_cast<size_t>(g.Ns));
    for (int i = 0; i < g.Ns; ++i)
        st.scale[static_cast<size_t>(i)] =
            unit_weights ? 1.0 : std::exp(-2.0 * g.s[static_cast<size_t>(i)]);
    st.periodic = (g.mode == AngularMode::circle);

    st.ang_p.assign(static_cast<size_t>(g.Ntheta), 0.0);
    st.ang_m.assign(static_cast<size_t>(g.Ntheta), 0.0);
    if (g.Ntheta > 1) {
        if (g.mode == AngularMode::circle) {
            const double dth = 2.0 * kPi / g.Ntheta;
            for (int j = 0; j < g.Ntheta; ++j) {
                st.ang_p[static_cast<size_t>(j)] = 1.0 / (dth * dth);
                st.ang_m[static_cast<size_t>(j)] = 1.0 / (dth * dth);
            }
        } else {
            const double dth = kPi / g.Ntheta;
            for (int j = 0; j < g.Ntheta; ++j) {
                const double th = g.theta[static_cast<size_t>(j)];
                const double wj = std::pow(std::sin(th), g.n - 2.0);
                const double cp =
                    (j + 1 < g.Ntheta) ? std::pow(std::sin(th + 0.5 * dth), g.n - 2.0) : 0.0;
                const double cm =
                    (j > 0) ? std::pow(std::sin(th - 0.5 * dth), g.n - 2.0) : 0.0;
                st.ang_p[static_cast<size_t>(j)] = cp / (wj * dth * dth);
                st.ang_m[static_cast<size_t>(j)] = cm / (wj * dth * dth);
            }
        }
    }
    return st;
}

// Apply L to g = w^m nodewise.
Eigen::ArrayXXd apply_operator(const Stencil& st, const Eigen::ArrayXXd& g) {
    Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(st.Ns, st.Nth);
    for (int i = 0; i < st.Ns; ++i) {
        for (int j = 0; j < st.Nth; ++j) {
            double acc = 0.0;
            // radial fluxes; one-sided fluxes vanish in Neumann mode
            if (i + 1 < st.Ns)
                acc += st.Ep * (g(i + 1, j) - g(i, j)) * st.inv_ds2;
            else if (!st.neumann)
                continue;  // boundary row handled as Dirichlet; value unused
            if (i > 0)
                acc -= st.Em * (g(i, j) - g(i - 1, j)) * st.inv_ds2;
            else if (!st.neumann)
                continue;
            // angular
            if (st.Nth > 1) {
                const auto sj = static_cast<size_t>(j);
                const int jp = (j + 1 < st.Nth) ? j + 1 : (st.periodic ? 0 : j);
                const int jm = (j > 0) ? j - 1 : (st.periodic ? st.Nth - 1 : j);
                if (jp != j) acc += st.ang_p[sj] * (g(i, jp) - g(i, j));
                if (jm != j) acc -= st.ang_m[sj] * (g(i, j) - g(i, jm));
            }
            out(i, j) = st.scale[static_cast<size_t>(i)] * acc;
        }
    }
    return out;
}

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    double final_error = 0.0;
};

// Solve w - dt L(w^m) = rhs with Dirichlet traces (or pure Neumann flux) via
// damped Newton; w holds the initial guess on entry, the solution on exit.
NewtonResult newton_solve(const Stencil& st, const RadialGrid& grid, double dt,
                          double m, const Eigen::ArrayXXd& w_old,
                          const Eigen::ArrayXXd& source, const TraceFn& bc_trace,
                          double t_new, const SolverConfig& cfg, Eigen::ArrayXXd& w) {
    const int Ns = st.Ns, Nth = st.Nth, N = Ns * Nth;
    const bool dirichlet = !st.neumann;

    Eigen::ArrayXXd trace = Eigen::ArrayXXd::Zero(Ns, Nth);
    if (dirichlet) {
        for (int j = 0; j < Nth; ++j) {
            trace(0, j) = bc_trace(grid.r_of(0), grid.theta[static_cast<size_t>(j)], t_new);
            trace(Ns - 1, j) =
                bc_trace(grid.r_of(Ns - 1), grid.theta[static_cast<size_t>(j)], t_new);
        }
    }

    auto residual = [&](const Eigen::ArrayXXd& wv) {
        Eigen::ArrayXXd g = wv.pow(m);
        Eigen::ArrayXXd F = wv - w_old - dt * (apply_operator(st, g) + source);
        if (dirichlet) {
            for (int j = 0; j < Nth; ++j) {
                F(0, j) = wv(0, j) - trace(0, j);
                F(Ns - 1, j) = wv(Ns - 1, j) - trace(Ns - 1, j);
            }
        }
        return F;
    };
    auto error_norm = [&](const Eigen::ArrayXXd& F) {
        double e = 0.0;
        for (int i = 0; i < Ns; ++i)
            for (int j = 0; j < Nth; ++j)
                e = std::max(e, std::abs(F(i, j)) / (1.0 + std::abs(w_old(i, j))));
        return e;
    };

    Eigen::ArrayXXd F = residual(w);
    double err = error_norm(F);

    NewtonResult res;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(N) * 5);
    Eigen::SparseLU<SpMat> lu;

    for (int it = 0; it < cfg.newton_max_iter; ++it) {
        if (err <= cfg.newton_tol) {
            res.converged = true;
            res.iterations = it;
            res.final_error = err;
            return res;
        }
        // Jacobian: I - dt * L o diag(m w^{m-1}) with Dirichlet identity rows.
        trip.clear();
        Eigen::ArrayXXd gp = m * w.pow(m - 1.0);
        for (int i = 0; i < Ns; ++i) {
            const bool brow = dirichlet && (i == 0 || i == Ns - 1);
            for (int j = 0; j < Nth; ++j) {
                const int row = st.idx(i, j);
                if (brow) {
                    trip.emplace_back(row, row, 1.0);
                    continue;
                }
                const double sc = st.scale[static_cast<size_t>(i)] * dt;
                double diag_op = 0.0;
                if (i + 1 < Ns) {
                    trip.emplace_back(row, st.idx(i + 1, j),
                                      -sc * st.Ep * st.inv_ds2 * gp(i + 1, j));
                    diag_op -= st.Ep * st.inv_ds2;
                }
                if (i > 0) {
                    trip.emplace_back(row, st.idx(i - 1, j),
                                      -sc * st.Em * st.inv_ds2 * gp(i - 1, j));
                    diag_op -= st.Em * st.inv_ds2;
                }
                if (Nth > 1) {
                    const auto sj = static_cast<size_t>(j);
                    const int jp = (j + 1 < Nth) ? j + 1 : (st.periodic ? 0 : j);
                    const int jm = (j > 0) ? j - 1 : (st.periodic ? Nth - 1 : j);
                    if (jp != j) {
                        trip.emplace_back(row, st.idx(i, jp),
                                          -sc * st.ang_p[sj] * gp(i, jp));
                        diag_op -= st.ang_p[sj];
                    }
                    if (jm != j) {
                        trip.emplace_back(row, st.idx(i, jm),
                                          -sc * st.ang_m[sj] * gp(i, jm));
                        diag_op -= st.ang_m[sj];
                    }
                }
                trip.emplace_back(row, row, 1.0 - sc * diag_op * gp(i, j));
            }
        }
        SpMat J(N, N);
        J.setFromTriplets(trip.begin(), trip.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success) break;

        Eigen::VectorXd rhs(N);
        for (int i = 0; i < Ns; ++i)
            for (int j = 0; j < Nth; ++j) rhs(st.idx(i, j)) = -F(i, j);
        Eigen::VectorXd delta = lu.solve(rhs);
        if (lu.info() != Eigen::Success) break;

        // damped update preserving positivity
        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= 1e-6) {
            Eigen::ArrayXXd w_try = w;
            for (int i = 0; i < Ns; ++i)
                for (int j = 0; j < Nth; ++j)
                    w_try(i, j) += lambda * delta(st.idx(i, j));
            if (w_try.minCoeff() > 0.0) {
                Eigen::ArrayXXd F_try = residual(w_try);
                const double err_try = error_norm(F_try);
                if (err_try < err * (1.0 - 1e-4 * lambda) || err_try <= cfg.newton_tol) {
                    w = std::move(w_try);
                    F = std::move(F_try);
                    err = err_try;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (err <= cfg.newton_tol) res.converged = true;
    res.final_error = err;
    res.iterations = cfg.newton_max_iter;
    return res;
}

}  // namespace

std::shared_ptr<const RadialGrid> make_grid(int n, AngularMode mode, double r_min,
                                            double r_max, int Ns, int Ntheta) {
    if (!(r_min > 0.0 && r_max > r_min))
        throw std::invalid_argument("make_grid: need 0 < r_min < r_max");
    if (Ns < 3) throw std::invalid_argument("make_grid: Ns >= 3");
    if (Ntheta < 1) throw std::invalid_argument("make_grid: Ntheta >= 1");
    if (n == 2 && mode != AngularMode::circle)
        throw std::invalid_argument("make_grid: n = 2 uses the circle mode");
    auto g = std::make_shared<RadialGrid>();
    g->n = n;
    g->mode = mode;
    g->s_min = std::log(r_min);
    g->s_max = std::log(r_max);
    g->Ns = Ns;
    g->Ntheta = Ntheta;
    g->s.resize(static_cast<size_t>(Ns));
    for (int i = 0; i < Ns; ++i)
        g->s[static_cast<size_t>(i)] = g->s_min + (g->s_max - g->s_min) * i / (Ns - 1.0);
    g->theta.resize(static_cast<size_t>(Ntheta));
    g->ang_w.resize(static_cast<size_t>(Ntheta));
    if (mode == AngularMode::circle) {
        for (int j = 0; j < Ntheta; ++j) {
            g->theta[static_cast<size_t>(j)] = 2.0 * kPi * j / Ntheta;
            g->ang_w[static_cast<size_t>(j)] = 2.0 * kPi / Ntheta;
        }
    } else {
        const double dth = kPi / Ntheta;
        const double zf = sphere_area(n - 2);
        for (int j = 0; j < Ntheta; ++j) {
            const double th = (j + 0.5) * dth;
            g->theta[static_cast<size_t>(j)] = th;
            g->ang_w[static_cast<size_t>(j)] =
                zf * std::pow(std::sin(th), n - 2.0) * dth;
        }
    }
    return g;
}

Field initialize(const std::function<double(double r, double theta)>& u0,
                 std::shared_ptr<const RadialGrid> grid, double m, InitReport* report) {
    Field f;
    f.grid = grid;
    f.t = 0.0;
    f.values = Eigen::ArrayXXd::Zero(grid->Ns, grid->Ntheta);
    for (int i = 0; i < grid->Ns; ++i)
        for (int j = 0; j < grid->Ntheta; ++j) {
            const double v = u0(grid->r_of(i), grid->theta[static_cast<size_t>(j)]);
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::domain_error("initialize: u0 must be positive and finite");
            f.values(i, j) = v;
        }
    if (report != nullptr) {
        const int k = std::max(6, grid->Ns / 8);
        std::vector<double> lx, ly;
        for (int i = 0; i < std::min(k, grid->Ns); ++i) {
            double mean = 0.0;
            for (int j = 0; j < grid->Ntheta; ++j)
                mean += std::log(f.values(i, j)) * m;
            lx.push_back(grid->s[static_cast<size_t>(i)]);
            ly.push_back(mean / grid->Ntheta);
        }
        report->fitted_exponent = fit_line(lx, ly).slope;
        report->nodes_used = static_cast<int>(lx.size());
    }
    return f;
}

Field advance(const Field& field, double dt, const SolverConfig& cfg,
              const TraceFn& bc_trace, double m) {
    if (!(dt > 0.0)) throw std::invalid_argument("advance: dt > 0");
    if (!(field.values.minCoeff() > 0.0))
        throw std::domain_error("advance: field must be positive");
    Stencil st = make_stencil(*field.grid, cfg.unit_radial_weights);
    st.neumann = (cfg.bc_mode == BcMode::neumann_reflect);

    Field cur = field;
    const double t_target = field.t + dt;
    double sub = dt;
    int halvings = 0;
    while (cur.t < t_target - 1e-15 * std::max(1.0, t_target)) {
        const double step = std::min(sub, t_target - cur.t);
        const double t_new = cur.t + step;
        Eigen::ArrayXXd source = Eigen::ArrayXXd::Zero(st.Ns, st.Nth);
        if (cfg.source)
            for (int i = 0; i < st.Ns; ++i)
                for (int j = 0; j < st.Nth; ++j)
                    source(i, j) = cfg.source(cur.grid->s[static_cast<size_t>(i)],
                                              cur.grid->theta[static_cast<size_t>(j)], t_new);
        Eigen::ArrayXXd w = cur.values;  // warm start
        NewtonResult nr = newton_solve(st, *cur.grid, step, m, cur.values, source,
                                       bc_trace, t_new, cfg, w);
        if (nr.converged && w.minCoeff() > 0.0) {
            cur.values = std::move(w);
            cur.t = t_new;
            continue;
        }
        sub *= 0.5;
        if (++halvings > 20) {
            std::ostringstream os;
            os << "advance: Newton failed after 20 dt halvings (t=" << cur.t
               << ", dt=" << step << ", err=" << nr.final_error << ")";
            throw std::runtime_error(os.str());
        }
    }
    return cur;
}

Trajectory simulate(const std::function<double(double r, double theta)>& u0,
                    const SuperEnvelope& sup, const SubEnvelope& sub,
                    std::shared_ptr<const RadialGrid> grid, const SolverConfig& cfg) {
    const double m = sup.params().m;

    // precondition: the datum must sit between the envelopes at t = 0
    for (int i = 0; i < grid->Ns; ++i)
        for (int j = 0; j < grid->Ntheta; ++j) {
            const double r = grid->r_of(i), th = grid->theta[static_cast<size_t>(j)];
            const double v = u0(r, th);
            const double lo = sub.value(r, th, 0.0), hi = sup.value(r, th, 0.0);
            if (v < lo * (1.0 - 1e-12) || v > hi * (1.0 + 1e-12))
                throw std::domain_error("simulate: u0 is not squeezed at t = 0");
        }

    TraceFn trace;
    if (cfg.bc_mode == BcMode::pin_supersolution) {
        trace = [&sup](double r, double th, double t) { return sup.value(r, th, t); };
    } else if (cfg.bc_mode == BcMode::pin_asymptotic) {
        const ProblemParams prm = sup.params();
        const double A = sup.constants().A;
        AngularProfile am = sup.alpha().pow(prm.m);
        trace = [am, prm, A](double r, double th, double t) {
            const double a_t = A * std::exp(A * t);
            const double g = am.eval(th) * std::pow(r, -prm.m * prm.lambda) +
                             a_t * std::pow(r, -prm.m * prm.nu);
            return std::pow(g, 1.0 / prm.m);
        };
    } else {
        trace = [](double, double, double) { return 0.0; };  // unused in Neumann mode
    }

    Trajectory out;
    Field f = initialize(u0, grid, m);
    out.snapshots.push_back(f);

    auto record = [&](const Field& fld) {
        SandwichSample smp;
        smp.t = fld.t;
        for (int i = 0; i < grid->Ns; ++i)
            for (int j = 0; j < grid->Ntheta; ++j) {
                const double r = grid->r_of(i), th = grid->theta[static_cast<size_t>(j)];
                const double w = fld.values(i, j);
                const double lo = sub.value(r, th, fld.t);
                const double hi = sup.value(r, th, fld.t);
                smp.lower_violation = std::max(smp.lower_violation, (lo - w) / w);
                smp.upper_violation = std::max(smp.upper_violation, (w - hi) / w);
            }
        smp.lower_violation = std::max(smp.lower_violation, 0.0);
        smp.upper_violation = std::max(smp.upper_violation, 0.0);
        out.sandwich.samples.push_back(smp);
        out.sandwich.max_lower = std::max(out.sandwich.max_lower, smp.lower_violation);
        out.sandwich.max_upper = std::max(out.sandwich.max_upper, smp.upper_violation);
        return std::max(smp.lower_violation, smp.upper_violation);
    };
    record(f);

    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    size_t next_snap = 0;
    int consecutive_bad = 0;
    while (f.t < cfg.t_end - 1e-12) {
        const double dt = std::min(cfg.dt_initial, cfg.t_end - f.t);
        f = advance(f, dt, cfg, trace, m);
        const double viol = record(f);
        if (viol > cfg.sandwich_tolerance) {
            if (++consecutive_bad >= 3) {
                out.sandwich.pass = false;
                std::ostringstream os;
                os << "simulate: persistent sandwich violation " << viol << " at t=" << f.t;
                throw std::runtime_error(os.str());
            }
        } else {
            consecutive_bad = 0;
        }
        bool want_snap = cfg.store_all_steps;
        while (next_snap < snaps.size() && snaps[next_snap] <= f.t + 1e-12) {
            want_snap = true;
            ++next_snap;
        }
        if (want_snap) out.snapshots.push_back(f);
    }
    if (out.snapshots.back().t < f.t - 1e-12) out.snapshots.push_back(f);
    out.sandwich.pass = out.sandwich.max_lower <= cfg.sandwich_tolerance &&
                        out.sandwich.max_upper <= cfg.sandwich_tolerance;
    return out;
}

AsymptoticFit fit_asymptotic_coefficient(const Field& field, const ProblemParams& prm,
                                         int i_begin, int i_end) {
    const auto& g = *field.grid;
    if (i_begin < 0 || i_end > g.Ns || i_end - i_begin < 6)
        throw std::invalid_argument(
            "fit_asymptotic_coefficient: window needs >= 6 nodes inside the grid");
    const int rows = i_end - i_begin;
    const double ml = prm.m * prm.lambda, mn = prm.m * prm.nu;

    AsymptoticFit fit;
    fit.alpha_hat.resize(static_cast<size_t>(g.Ntheta));
    fit.remainder_exponent.resize(static_cast<size_t>(g.Ntheta));

    Eigen::MatrixXd M(rows, 3);
    Eigen::VectorXd col_scale(3);
    for (int k = 0; k < rows; ++k) {
        const double r = g.r_of(i_begin + k);
        M(k, 0) = std::pow(r, -ml);
        M(k, 1) = std::pow(r, -mn);
        M(k, 2) = 1.0;
    }
    for (int c = 0; c < 3; ++c) {
        col_scale(c) = M.col(c).norm();
        M.col(c) /= col_scale(c);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    fit.condition_number =
        svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    fit.ill_conditioned = fit.condition_number > 1e12;

    for (int j = 0; j < g.Ntheta; ++j) {
        Eigen::VectorXd y(rows);
        for (int k = 0; k < rows; ++k)
            y(k) = std::pow(field.values(i_begin + k, j), prm.m);
        Eigen::VectorXd c = svd.solve(y);
        for (int ci = 0; ci < 3; ++ci) c(ci) /= col_scale(ci);
        fit.alpha_hat[static_cast<size_t>(j)] =
            (c(0) > 0.0) ? std::pow(c(0), 1.0 / prm.m)
                         : std::numeric_limits<double>::quiet_NaN();
        std::vector<double> lx, ly;
        for (int k = 0; k < rows; ++k) {
            const double r = g.r_of(i_begin + k);
            const double rem = y(k) - c(0) * std::pow(r, -ml) - c(2);
            if (std::abs(rem) > 1e-300) {
                lx.push_back(std::log(r));
                ly.push_back(std::log(std::abs(rem)));
            }
        }
        fit.remainder_exponent[static_cast<size_t>(j)] =
            (lx.size() >= 3) ? fit_line(lx, ly).slope
                             : std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<double> sorted;
    for (double v : fit.remainder_exponent)
        if (std::isfinite(v)) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());
    fit.remainder_exponent_median =
        sorted.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : sorted[sorted.size() / 2];
    return fit;
}

double discrete_mass(const Field& field) {
    const auto& g = *field.grid;
    double mass = 0.0;
    for (int i = 0; i < g.Ns; ++i)
        for (int j = 0; j < g.Ntheta; ++j)
            mass += g.ang_w[static_cast<size_t>(j)] * field.values(i, j);
    return mass * g.ds();
}

}  // namespace fdlab
