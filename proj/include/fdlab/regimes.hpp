#pragma once

#include <vector>

#include "fdlab/rational.hpp"

namespace fdlab {

// Parameter bundle for the singular problem: dimension n >= 2, diffusion
// exponent m in (0,1), singularity exponent lambda, remainder exponent nu,
// and the singularity location xi0.
struct ProblemParams {
    int n = 3;
    double m = 0.5;
    double lambda = 5.0;
    double nu = 4.0;
    std::vector<double> xi0;  // empty means origin

    std::vector<double> xi0_or_origin() const {
        if (!xi0.empty()) return xi0;
        return std::vector<double>(static_cast<size_t>(n), 0.0);
    }
};

// m_c = (n-2)/n, m_* = (n-2)/(n-1), m^* = (n-3)/(n-1) (0 when n = 2).
struct CriticalExponents {
    Rational m_c;
    Rational m_star;
    Rational m_starstar;
};

CriticalExponents critical_exponents(int n);

// Signed margins of the three strict inequalities; pass iff all positive.
struct A2Verdict {
    bool pass = false;
    double margin_supercritical = 0.0;  // lambda - 2/(1-m)
    double margin_gap = 0.0;            // (1-m)*lambda - 2 - m*(lambda-nu)
    double margin_nu = 0.0;             // min(nu, lambda - nu)
};

A2Verdict check_assumption_A2(const ProblemParams& p);

enum class Regime { super_critical, sub_critical, critical };

Regime classify_singularity_regime(double m, double lambda, double tol = 1e-12);

const char* regime_name(Regime r);

// A = m*lambda*(m*lambda - n + 2) with lambda = 2/(1-m); equals
// 2*m*n*(m - m_c)/(1-m)^2.
double critical_coefficient_A(int n, double m);

}  // namespace fdlab
