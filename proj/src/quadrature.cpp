#include "fdlab/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fdlab {

namespace {

// Golub-Welsch on the symmetric Jacobi matrix: nodes are eigenvalues, weights
// are mu0 times the squared first eigenvector components.
GaussRule golub_welsch(const std::vector<double>& offdiag, double mu0) {
    const int n = static_cast<int>(offdiag.size()) + 1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        J(k, k + 1) = offdiag[static_cast<size_t>(k)];
        J(k + 1, k) = offdiag[static_cast<size_t>(k)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("golub_welsch: eigen decomposition failed");
    GaussRule rule;
    rule.x.resize(static_cast<size_t>(n));
    rule.w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        rule.x[static_cast<size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.w[static_cast<size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

GaussRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1");
    std::vector<double> b(static_cast<size_t>(n - 1));
    for (int k = 1; k < n; ++k)
        b[static_cast<size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
    return golub_welsch(b, 2.0);
}

GaussRule gauss_gegenbauer(int n, double lam) {
    if (n < 1) throw std::invalid_argument("gauss_gegenbauer: n >= 1");
    if (lam <= -0.5) throw std::invalid_argument("gauss_gegenbauer: lam > -1/2");
    // mu0 = int_{-1}^{1} (1-x^2)^(lam-1/2) dx = sqrt(pi) Gamma(lam+1/2)/Gamma(lam+1)
    const double mu0 = std::sqrt(std::numbers::pi) *
                       std::exp(std::lgamma(lam + 0.5) - std::lgamma(lam + 1.0));
    std::vector<double> b(static_cast<size_t>(n - 1));
    for (int k = 1; k < n; ++k) {
        const double num = k * (k + 2.0 * lam - 1.0);
        const double den = 4.0 * (k + lam) * (k + lam - 1.0);
        b[static_cast<size_t>(k - 1)] = std::sqrt(num / den);
    }
    return golub_welsch(b, mu0);
}

double sphere_area(int d) {
    if (d < 0) throw std::invalid_argument("sphere_area: d >= 0");
    // |S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2)
    const double half = 0.5 * (d + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const GaussRule& rule) {
    const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
    double sum = 0.0;
    for (size_t i = 0; i < rule.x.size(); ++i)
        sum += rule.w[i] * f(mid + hw * rule.x[i]);
    return hw * sum;
}

double integrate_log_panels(const std::function<double(double)>& f, double a,
                            double b, int panels_per_decade, const GaussRule& rule) {
    if (!(a > 0.0 && b > a))
        throw std::invalid_argument("integrate_log_panels: need 0 < a < b");
    const double decades = std::log10(b / a);
    const int panels = std::max(1, static_cast<int>(std::ceil(decades * panels_per_decade)));
    double sum = 0.0;
    double lo = a;
    for (int p = 0; p < panels; ++p) {
        const double hi = (p + 1 == panels) ? b : a * std::pow(b / a, double(p + 1) / panels);
        sum += integrate(f, lo, hi, rule);
        lo = hi;
    }
    return sum;
}

}  // namespace fdlab
