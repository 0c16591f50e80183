#include "dml/dgp.hpp"

#include "dml/errors.hpp"
#include "dml/rng.hpp"
#include "dml/stats.hpp"

#include <cmath>
#include <vector>

namespace dml {

Dataset dgp_sample(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("sample size must be positive");

    std::vector<double> y(n), d(n), v(n), x(3 * n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double e1 = rng.next_uniform(-0.5, 0.5);
        const double e2 = rng.next_uniform(-0.5, 0.5);
        const double e3 = rng.next_uniform(-0.5, 0.5);
        const double e4 = rng.next_uniform(-0.5, 0.5);
        const double vi = e1;
        const double x1 = 1.0 + 2.0 * vi + e2;
        const double x2 = 1.0 + 2.0 * vi + e3;
        const double x3 = (vi - 1.0) * (vi - 1.0) + e4;
        const double pi = logistic(0.5 * (vi + x1 + x2 + x3));
        const double di = rng.next_double() < pi ? 1.0 : 0.0;
        // drawn unconditionally so every row consumes six variates
        const double nu = 0.25 * rng.next_gaussian();

        v[i] = vi;
        d[i] = di;
        x[3 * i] = x1;
        x[3 * i + 1] = x2;
        x[3 * i + 2] = x3;
        y[i] = di == 1.0 ? vi * x1 * x2 * x3 + nu : 0.0;
    }
    return Dataset(std::move(y), std::move(d), std::move(v), std::move(x), 3);
}

double true_cate(double v) {
    const double a = 1.0 + 2.0 * v;
    const double b = v - 1.0;
    return v * a * a * b * b;
}

double true_ate() { return 7.0 / 60.0; }

double true_propensity(const Point& w) {
    if (w.x.size() != 3) throw ConfigError("expected three covariates");
    return logistic(0.5 * (w.v + w.x[0] + w.x[1] + w.x[2]));
}

double true_gamma(const Point& w) {
    if (w.x.size() != 3) throw ConfigError("expected three covariates");
    return w.d * w.v * w.x[0] * w.x[1] * w.x[2];
}

std::shared_ptr<const Predictor> true_gamma_predictor() {
    return std::make_shared<FunctionPredictor>(
        [](const Point& w) { return true_gamma(w); },
        [](const Point& w) {
            if (w.x.size() != 3) throw ConfigError("expected three covariates");
            return w.v * w.x[0] * w.x[1] * w.x[2];
        });
}

std::shared_ptr<const RieszEstimate> oracle_ate_riesz(double trim_bound) {
    return std::make_shared<CateOracleRiesz>(
        [](const Point& w) { return true_propensity(w); }, nullptr, trim_bound);
}

std::shared_ptr<const RieszEstimate> oracle_cate_riesz(
    std::shared_ptr<const LocalWeighting> weighting, double trim_scale) {
    if (!weighting) throw ConfigError("weighting must not be null");
    const double bound = trim_scale / weighting->bandwidth();
    return std::make_shared<CateOracleRiesz>([](const Point& w) { return true_propensity(w); },
                                             std::move(weighting), bound);
}

} // namespace dml
