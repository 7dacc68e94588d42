#include "fdlab/regimes.hpp"

#include <algorithm>
#include <stdexcept>

namespace fdlab {

CriticalExponents critical_exponents(int n) {
    if (n < 2) throw std::invalid_argument("critical_exponents: requires n >= 2");
    CriticalExponents c;
    c.m_c = Rational(n - 2, n);
    c.m_star = Rational(n - 2, n - 1);
    c.m_starstar = (n >= 3) ? Rational(n - 3, n - 1) : Rational(0, 1);
    return c;
}

A2Verdict check_assumption_A2(const ProblemParams& p) {
    if (!(p.m > 0.0 && p.m < 1.0))
        throw std::invalid_argument("check_assumption_A2: requires 0 < m < 1");
    A2Verdict v;
    v.margin_supercritical = p.lambda - 2.0 / (1.0 - p.m);
    v.margin_gap = (1.0 - p.m) * p.lambda - 2.0 - p.m * (p.lambda - p.nu);
    v.margin_nu = std::min(p.nu, p.lambda - p.nu);
    v.pass = v.margin_supercritical > 0.0 && v.margin_gap > 0.0 && v.margin_nu > 0.0;
    return v;
}

Regime classify_singularity_regime(double m, double lambda, double tol) {
    if (!(m > 0.0 && m < 1.0))
        throw std::invalid_argument("classify_singularity_regime: requires 0 < m < 1");
    if (!(lambda > 0.0))
        throw std::invalid_argument("classify_singularity_regime: requires lambda > 0");
    if (tol < 0.0)
        throw std::invalid_argument("classify_singularity_regime: requires tol >= 0");
    const double gap = lambda - 2.0 / (1.0 - m);
    if (gap > tol) return Regime::super_critical;
    if (gap < -tol) return Regime::sub_critical;
    return Regime::critical;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::super_critical: return "super_critical";
        case Regime::sub_critical: return "sub_critical";
        case Regime::critical: return "critical";
    }
    return "unknown";
}

double critical_coefficient_A(int n, double m) {
    if (!(m > 0.0 && m < 1.0))
        throw std::invalid_argument("critical_coefficient_A: requires 0 < m < 1");
    if (n < 2) throw std::invalid_argument("critical_coefficient_A: requires n >= 2");
    const double ml = 2.0 * m / (1.0 - m);  // m * lambda at lambda = 2/(1-m)
    return ml * (ml - n + 2);
}

}  // namespace fdlab
