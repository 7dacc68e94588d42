#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fdlab/regimes.hpp"

using namespace fdlab;

TEST_CASE("critical exponents are exact rationals") {
    auto c3 = critical_exponents(3);
    CHECK(c3.m_c == Rational(1, 3));
    CHECK(c3.m_star == Rational(1, 2));
    CHECK(c3.m_starstar == Rational(0, 1));

    auto c2 = critical_exponents(2);
    CHECK(c2.m_c == Rational(0, 1));
    CHECK(c2.m_star == Rational(0, 1));
    CHECK(c2.m_starstar == Rational(0, 1));

    auto c4 = critical_exponents(4);
    CHECK(c4.m_c == Rational(1, 2));
    CHECK(c4.m_star == Rational(2, 3));
    CHECK(c4.m_starstar == Rational(1, 3));

    CHECK_THROWS(critical_exponents(1));
}

TEST_CASE("exponent ordering m_c <= m_star, all in [0,1)") {
    for (int n = 2; n <= 12; ++n) {
        auto c = critical_exponents(n);
        CHECK(c.m_c <= c.m_star);
        CHECK(c.m_c.value() >= 0.0);
        CHECK(c.m_star.value() < 1.0);
        CHECK(c.m_starstar.value() >= 0.0);
        CHECK(c.m_starstar.value() < 1.0);
    }
}

TEST_CASE("assumption A2 margins") {
    ProblemParams p;
    p.n = 3;

    p.m = 0.2;
    p.lambda = 3.0;
    p.nu = 2.0;
    auto v = check_assumption_A2(p);
    CHECK(v.pass);
    CHECK(v.margin_supercritical == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.margin_gap == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(v.margin_nu == doctest::Approx(1.0).epsilon(1e-12));

    // boundary: lambda = 2/(1-m) exactly is a failure
    p.m = 0.5;
    p.lambda = 4.0;
    p.nu = 1.0;
    v = check_assumption_A2(p);
    CHECK_FALSE(v.pass);
    CHECK(v.margin_supercritical == doctest::Approx(0.0));

    p.m = 0.2;
    p.lambda = 3.0;
    p.nu = 0.5;
    v = check_assumption_A2(p);
    CHECK_FALSE(v.pass);
    CHECK(v.margin_gap == doctest::Approx(-0.1).epsilon(1e-10));

    p.m = 1.5;
    CHECK_THROWS(check_assumption_A2(p));
}

TEST_CASE("regime classification") {
    CHECK(classify_singularity_regime(0.2, 3.0) == Regime::super_critical);
    CHECK(classify_singularity_regime(0.5, 4.0) == Regime::critical);
    CHECK(classify_singularity_regime(0.5, 2.0) == Regime::sub_critical);
    // lambda = (n-2)/m for n=3, m=0.5 is the sub-critical separable exponent
    CHECK(2.0 == doctest::Approx((3 - 2) / 0.5));
    CHECK(classify_singularity_regime(0.5, 4.0 + 5e-13, 1e-12) == Regime::critical);
}

TEST_CASE("critical coefficient A") {
    CHECK(critical_coefficient_A(3, 0.2) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(critical_coefficient_A(2, 0.5) == doctest::Approx(4.0).epsilon(1e-12));
    // m = m_c zeroes the coefficient
    CHECK(critical_coefficient_A(3, 1.0 / 3.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS(critical_coefficient_A(3, 0.0));
    CHECK_THROWS(critical_coefficient_A(3, 1.0));
}

TEST_CASE("two printed forms of A agree") {
    for (int n = 2; n <= 6; ++n) {
        const double mc = critical_exponents(n).m_c.value();
        for (double m = 0.05; m < 1.0; m += 0.05) {
            const double a1 = critical_coefficient_A(n, m);
            const double a2 = 2.0 * m * n * (m - mc) / ((1.0 - m) * (1.0 - m));
            CHECK(a1 == doctest::Approx(a2).epsilon(1e-12));
            // sign characterization
            if (m < mc) CHECK(a1 < 0.0);
            if (m > mc) CHECK(a1 > 0.0);
        }
    }
}

TEST_CASE("A2 pass forces nu close to lambda") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> um(0.05, 0.95), ul(0.1, 12.0), un(0.05, 12.0);
    int passes = 0;
    for (int i = 0; i < 20000; ++i) {
        ProblemParams p;
        p.n = 2 + static_cast<int>(rng() % 4);
        p.m = um(rng);
        p.lambda = ul(rng);
        p.nu = un(rng);
        if (p.nu >= p.lambda) continue;
        auto v = check_assumption_A2(p);
        if (!v.pass) continue;
        ++passes;
        CHECK(p.lambda > 2.0 / (1.0 - p.m));
        CHECK(p.lambda - p.nu < ((1.0 - p.m) * p.lambda - 2.0) / p.m);
    }
    CHECK(passes > 100);  // the sweep actually exercises passing samples
}
