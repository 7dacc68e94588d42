#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fdlab/angular.hpp"
#include "fdlab/quadrature.hpp"

using namespace fdlab;

namespace {
constexpr double kPi = std::numbers::pi;

double legendre_p(int l, double x) {
    double pm1 = 1.0, p = x;
    if (l == 0) return 1.0;
    for (int k = 1; k < l; ++k) {
        const double pn = ((2.0 * k + 1.0) * x * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pn;
    }
    return p;
}
}  // namespace

TEST_CASE("circle Laplacian eigenfunctions") {
    auto g = make_geometry(2, 32);
    // constant profile maps to zero
    auto zero = laplace_beltrami(constant_profile(g, 3.7));
    for (double v : zero.values()) CHECK(std::abs(v) < 1e-12);

    // cos(3 theta) -> -9 cos(3 theta)
    auto p = cosine_profile(g, 0.0, 1.0, 3);
    auto lp = laplace_beltrami(p);
    for (int j = 0; j < g->node_count(); ++j) {
        const double expect = -9.0 * std::cos(3.0 * g->theta()[static_cast<size_t>(j)]);
        CHECK(lp.values()[static_cast<size_t>(j)] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("zonal Laplacian eigenfunctions: P_l on S^2") {
    auto g = make_geometry(3, 24);
    // P_2(cos theta) scales by -l(l+1) = -6
    std::vector<double> v(static_cast<size_t>(g->node_count()));
    for (int j = 0; j < g->node_count(); ++j)
        v[static_cast<size_t>(j)] = legendre_p(2, std::cos(g->theta()[static_cast<size_t>(j)]));
    AngularProfile p(g, v);
    auto lp = laplace_beltrami(p);
    for (int j = 0; j < g->node_count(); ++j)
        CHECK(lp.values()[static_cast<size_t>(j)] ==
              doctest::Approx(-6.0 * v[static_cast<size_t>(j)]).epsilon(1e-10));
}

TEST_CASE("eigenvalue accuracy on low modes (criterion feed)") {
    // circle modes k <= 8
    auto gc = make_geometry(2, 32);
    for (int k = 1; k <= 8; ++k) {
        auto p = cosine_profile(gc, 0.0, 1.0, k);
        auto lp = laplace_beltrami(p);
        double err = 0.0;
        for (int j = 0; j < gc->node_count(); ++j) {
            const double expect = -double(k) * k * std::cos(k * gc->theta()[static_cast<size_t>(j)]);
            err = std::max(err, std::abs(lp.values()[static_cast<size_t>(j)] - expect));
        }
        CHECK(err < 1e-10 * k * k);
    }
    // zonal degrees l <= 8 on S^2 and S^3
    for (int n : {3, 4}) {
        auto g = make_geometry(n, 24);
        for (int l = 1; l <= 8; ++l) {
            std::vector<double> c(static_cast<size_t>(g->node_count()), 0.0);
            c[static_cast<size_t>(l)] = 1.0;
            auto p = AngularProfile::from_coeffs(g, c);
            auto lp = laplace_beltrami(p);
            const double lam = -double(l) * (l + n - 2);
            double err = 0.0;
            for (int j = 0; j < g->node_count(); ++j)
                err = std::max(err, std::abs(lp.values()[static_cast<size_t>(j)] -
                                             lam * p.values()[static_cast<size_t>(j)]));
            CHECK(err < 1e-10 * std::abs(lam));
        }
    }
}

TEST_CASE("band-limited roundtrip is exact") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto gc = make_geometry(2, 64);
    std::vector<double> c(64, 0.0);
    for (int k = 0; k < 20; ++k) c[static_cast<size_t>(k)] = u(rng);
    auto p = AngularProfile::from_coeffs(gc, c);
    AngularProfile q(gc, p.values());
    for (int i = 0; i < 20; ++i)
        CHECK(q.coeffs()[static_cast<size_t>(i)] ==
              doctest::Approx(c[static_cast<size_t>(i)]).epsilon(1e-10));

    auto gz = make_geometry(4, 24);
    std::vector<double> cz(24, 0.0);
    for (int l = 0; l < 10; ++l) cz[static_cast<size_t>(l)] = u(rng);
    auto pz = AngularProfile::from_coeffs(gz, cz);
    AngularProfile qz(gz, pz.values());
    for (int i = 0; i < 10; ++i)
        CHECK(qz.coeffs()[static_cast<size_t>(i)] ==
              doctest::Approx(cz[static_cast<size_t>(i)]).epsilon(1e-10));
}

TEST_CASE("sigma profile examples") {
    ProblemParams prm;
    prm.n = 3;
    prm.m = 0.2;
    prm.lambda = 3.0;
    prm.nu = 2.0;
    auto g = make_geometry(3, 16);
    auto s = sigma_profile(constant_profile(g, 1.0), prm);
    for (double v : s.values()) CHECK(v == doctest::Approx(-0.24).epsilon(1e-12));

    // alpha == c: sigma == m*lambda*(m*lambda-n+2)*c^m
    auto s2 = sigma_profile(constant_profile(g, 2.5), prm);
    const double expect = 0.6 * (0.6 - 1.0) * std::pow(2.5, 0.2);
    for (double v : s2.values()) CHECK(v == doctest::Approx(expect).epsilon(1e-12));

    // circle case with alpha^m = 1 + 0.1 cos(theta), m = 0.5, lambda = 5:
    // sigma = -0.1 cos(theta) + 6.25*(1+0.1 cos(theta)); max at theta=0 is 6.875
    ProblemParams prm2;
    prm2.n = 2;
    prm2.m = 0.5;
    prm2.lambda = 5.0;
    prm2.nu = 4.0;
    auto gc = make_geometry(2, 32);
    std::vector<double> av(32);
    for (int j = 0; j < 32; ++j) {
        const double amv = 1.0 + 0.1 * std::cos(gc->theta()[static_cast<size_t>(j)]);
        av[static_cast<size_t>(j)] = amv * amv;  // alpha = (alpha^m)^2 for m = 1/2
    }
    auto sig = sigma_profile(AngularProfile(gc, av), prm2);
    double smax = -1e300;
    for (double v : sig.values()) smax = std::max(smax, v);
    CHECK(smax == doctest::Approx(6.875).epsilon(1e-10));

    // non-positive input rejected
    auto bad = cosine_profile(gc, 0.0, 1.0, 1);
    CHECK_THROWS(sigma_profile(bad, prm2));
}

TEST_CASE("profile extrema") {
    ProblemParams prm;
    prm.n = 2;
    prm.m = 0.2;
    prm.lambda = 3.0;
    prm.nu = 2.0;
    auto g = make_geometry(2, 32);

    auto ex1 = profile_extrema(constant_profile(g, 1.0), prm);
    CHECK(ex1.alpha_min == doctest::Approx(1.0));
    CHECK(ex1.alpha_max == doctest::Approx(1.0));
    CHECK(ex1.max_abs_lb < 1e-12);

    auto ex2 = profile_extrema(cosine_profile(g, 1.0, 0.3, 1), prm);
    CHECK(ex2.alpha_min == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(ex2.alpha_max == doctest::Approx(1.3).epsilon(1e-10));

    // zonal: shifted P2 vs dense sampling oracle
    ProblemParams prm3;
    prm3.n = 3;
    prm3.m = 0.2;
    prm3.lambda = 3.0;
    prm3.nu = 2.0;
    auto gz = make_geometry(3, 24);
    auto pz = zonal_harmonic_profile(gz, 2.0, 0.5, 2);
    auto ex3 = profile_extrema(pz, prm3);
    double dense_min = 1e300, dense_max = -1e300;
    for (int i = 0; i < 20001; ++i) {
        const double th = kPi * i / 20000;
        const double v = pz.eval(th);
        dense_min = std::min(dense_min, v);
        dense_max = std::max(dense_max, v);
    }
    CHECK(ex3.alpha_min == doctest::Approx(dense_min).epsilon(1e-8));
    CHECK(ex3.alpha_max == doctest::Approx(dense_max).epsilon(1e-8));
}

TEST_CASE("operator identities: self-adjointness, zero mode, divergence theorem") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int n : {2, 3, 4}) {
        auto g = make_geometry(n, n == 2 ? 32 : 20);
        const int band = g->node_count() / 2;
        auto random_band_limited = [&] {
            std::vector<double> c(static_cast<size_t>(g->node_count()), 0.0);
            for (int i = 0; i < band; ++i) c[static_cast<size_t>(i)] = u(rng);
            return AngularProfile::from_coeffs(g, c);
        };
        for (int rep = 0; rep < 4; ++rep) {
            auto f = random_band_limited();
            auto h = random_band_limited();
            auto lf = laplace_beltrami(f);
            auto lh = laplace_beltrami(h);
            double a = 0.0, b = 0.0, div = 0.0;
            for (int j = 0; j < g->node_count(); ++j) {
                const auto sj = static_cast<size_t>(j);
                a += g->quad_weights()[sj] * f.values()[sj] * lh.values()[sj];
                b += g->quad_weights()[sj] * h.values()[sj] * lf.values()[sj];
                div += g->quad_weights()[sj] * lf.values()[sj];
            }
            CHECK(a == doctest::Approx(b).epsilon(1e-10));
            CHECK(std::abs(div) < 1e-10);
        }
    }
}

TEST_CASE("total measure equals sphere area") {
    CHECK(make_geometry(2, 16)->total_measure() == doctest::Approx(2.0 * kPi).epsilon(1e-12));
    CHECK(make_geometry(3, 16)->total_measure() == doctest::Approx(4.0 * kPi).epsilon(1e-12));
    CHECK(make_geometry(4, 16)->total_measure() ==
          doctest::Approx(2.0 * kPi * kPi).epsilon(1e-12));
}

TEST_CASE("geometry mismatch rejected") {
    auto g16 = make_geometry(2, 16);
    auto g32 = make_geometry(2, 32);
    auto p = constant_profile(g16, 1.0);
    CHECK_THROWS(AngularProfile(g32, p.values()));
    CHECK_FALSE(g16->same_as(*g32));
}

TEST_CASE("tail fraction reports projection quality") {
    auto g = make_geometry(2, 32);
    auto smooth = cosine_profile(g, 1.0, 0.3, 1);
    CHECK(smooth.spectral_tail_fraction() < 1e-20);
    std::vector<double> rough(32);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& v : rough) v = u(rng);
    AngularProfile pr(g, rough);
    CHECK(pr.spectral_tail_fraction() > 1e-6);
}
