#include "dml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dml {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 1.0 / std::sqrt(8.0 * std::atan(1.0));
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must be in (0, 1)");
    }
    // Rational approximation (Abramowitz & Stegun 26.2.22) for the tail,
    // then polish with Newton iterations against erfc-based normal_cdf.
    const double q = std::min(p, 1.0 - p);
    const double t = std::sqrt(-2.0 * std::log(q));
    double x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    if (p < 0.5) x = -x;
    for (int it = 0; it < 3; ++it) {
        const double err = normal_cdf(x) - p;
        const double dens = normal_pdf(x);
        if (dens <= 0.0) break;
        x -= err / dens;
    }
    return x;
}

double logistic(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double stable_mean(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("stable_mean: empty input");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    return sum / static_cast<double>(sorted.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) {
        throw std::invalid_argument("sample_sd: need at least two values");
    }
    const double m = stable_mean(values);
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - m;
        sq[i] = d * d;
    }
    std::sort(sq.begin(), sq.end());
    double sum = 0.0;
    for (double v : sq) sum += v;
    return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = simpson(f, a, fa, b, fb, m, fm);
    return adaptive(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

} // namespace dml
