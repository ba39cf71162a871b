#include "irt/special.hpp"

#include "irt/errors.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace irt {

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

namespace {

constexpr int kGammaMaxIter = 500;
constexpr double kGammaEps = 1e-16;

// Lower regularized gamma P(a, x) by power series, for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < kGammaMaxIter; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kGammaEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numeric_error("gamma_p series failed to converge");
}

// Upper regularized gamma Q(a, x) by Lentz continued fraction, for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / kGammaEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kGammaMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kGammaEps) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw numeric_error("gamma_q continued fraction failed to converge");
}

} // namespace

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || !std::isfinite(x)) {
        throw validation_error("gamma_q requires a > 0 and x >= 0");
    }
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_sf(double x, int df) {
    if (df < 1) throw validation_error("chi_square_sf requires df >= 1");
    if (!std::isfinite(x)) throw validation_error("chi_square_sf requires finite x");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * df, 0.5 * x);
}

namespace {

// Nodes of P_n on [-1, 1] by Newton iteration from the Chebyshev-like
// initial guess; weights 2 / ((1 - x^2) P_n'(x)^2).
QuadratureRule compute_gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

} // namespace

const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) throw validation_error("gauss_legendre requires n >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, compute_gauss_legendre(n)).first;
    }
    return it->second;
}

namespace {

double panel(const std::function<double(double)>& f, double lo, double hi,
             const QuadratureRule& rule) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

double integrate_recursive(const std::function<double(double)>& f, double lo,
                           double hi, double whole, double tol,
                           const QuadratureRule& rule, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double left = panel(f, lo, mid, rule);
    const double right = panel(f, mid, hi, rule);
    const double refined = left + right;
    if (std::fabs(refined - whole) <= tol || depth >= 30) {
        return refined;
    }
    return integrate_recursive(f, lo, mid, left, 0.5 * tol, rule, depth + 1) +
           integrate_recursive(f, mid, hi, right, 0.5 * tol, rule, depth + 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
    if (!(lo < hi)) throw validation_error("integrate requires lo < hi");
    const QuadratureRule& rule = gauss_legendre(20);
    const double whole = panel(f, lo, hi, rule);
    return integrate_recursive(f, lo, hi, whole, tol, rule, 0);
}

} // namespace irt
