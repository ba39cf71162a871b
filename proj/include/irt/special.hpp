#pragma once

#include <functional>
#include <span>
#include <vector>

namespace irt {

// Logistic function, sign-split so exp never overflows: safe for |x| up to
// a few thousand, exact 0.5 at x = 0.
double stable_sigmoid(double x);

double normal_pdf(double x);
double normal_cdf(double x);

// Regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a),
// series + continued-fraction evaluation, ~1e-14 relative accuracy.
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, int df);

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const QuadratureRule& gauss_legendre(int n);

// Adaptive panel integration of f over [lo, hi] to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol);

} // namespace irt
