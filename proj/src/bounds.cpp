#include "dml/bounds.hpp"

#include "dml/errors.hpp"
#include "dml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dml {

namespace {

constexpr double kBerryEsseen = 0.4748;

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("bound inputs: ") + what);
}

bool non_increasing(const std::vector<double>& values) {
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        if (values[i + 1] > values[i]) return false;
    return true;
}

// sqrt(n * a * b) where either rate may be the infinity sentinel.
double coupling(double n, double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return std::numeric_limits<double>::infinity();
    return std::sqrt(n * a * b);
}

} // namespace

void BoundInputs::validate() const {
    require(folds >= 1.0 && std::isfinite(folds), "fold count must be at least 1");
    require(n >= 1.0 && std::isfinite(n), "sample size must be at least 1");
    require(q > 0.0 && q <= 1.0, "continuity exponent must lie in (0, 1]");
    require(Q_bar >= 0.0 && std::isfinite(Q_bar), "continuity constant must be non-negative");
    require(sigma_bar >= 0.0 && std::isfinite(sigma_bar), "noise bound must be non-negative");
    require(alpha_bar >= 0.0 && std::isfinite(alpha_bar),
            "representer sup norm must be non-negative");
    require(alpha_trim >= 0.0 && std::isfinite(alpha_trim), "trim bound must be non-negative");
    require(epsilon > 0.0 && epsilon < 1.0, "failure probability must lie in (0, 1)");
    require(epsilon_prime > 0.0 && epsilon_prime < 1.0,
            "variance failure probability must lie in (0, 1)");
    require(r_gamma >= 0.0 && std::isfinite(r_gamma), "regression rate must be non-negative");
    require(r_alpha >= 0.0 && std::isfinite(r_alpha), "representer rate must be non-negative");
    require(p_gamma >= 0.0, "projected regression rate must be non-negative");
    require(p_alpha >= 0.0, "projected representer rate must be non-negative");
    require(sigma > 0.0 && std::isfinite(sigma), "moment scale must be positive");
    require(kappa >= 0.0 && std::isfinite(kappa), "third moment scale must be non-negative");
    require(zeta >= 0.0 && std::isfinite(zeta), "fourth moment scale must be non-negative");
    require(std::isfinite(theta_error), "estimation error must be finite");
}

double delta_basic(const BoundInputs& in) {
    in.validate();
    const double lead = 3.0 * in.folds / (in.epsilon * in.sigma);
    const double bias = (std::sqrt(in.Q_bar) + in.alpha_bar) * std::pow(in.r_gamma, in.q / 2.0);
    const double alpha_part = in.sigma_bar * std::sqrt(in.r_alpha);
    const double product = coupling(in.n, in.r_gamma, in.r_alpha);
    return lead * (bias + alpha_part + product);
}

double delta_refined(const BoundInputs& in) {
    in.validate();
    const double lead = 4.0 * in.folds / (std::sqrt(in.epsilon) * in.sigma);
    const double bias = (std::sqrt(in.Q_bar) + in.alpha_bar + in.alpha_trim) *
                        std::pow(in.r_gamma, in.q / 2.0);
    const double alpha_part = in.sigma_bar * std::sqrt(in.r_alpha);
    const double product = std::min(coupling(in.n, in.p_gamma, in.r_alpha),
                                    coupling(in.n, in.r_gamma, in.p_alpha));
    return lead * (bias + alpha_part) + product / in.sigma;
}

double berry_esseen_term(double kappa, double sigma, double n) {
    if (!(sigma > 0.0)) throw UndefinedScaleError("moment scale must be positive");
    if (!(n >= 1.0)) throw ConfigError("sample size must be at least 1");
    if (!(kappa >= 0.0)) throw ConfigError("third moment scale must be non-negative");
    const double ratio = kappa / sigma;
    return kBerryEsseen * ratio * ratio * ratio / std::sqrt(n);
}

double gaussian_remainder(const BoundInputs& in, bool refined) {
    const double delta = refined ? delta_refined(in) : delta_basic(in);
    return berry_esseen_term(in.kappa, in.sigma, in.n) + delta / std::sqrt(2.0 * M_PI) +
           in.epsilon;
}

VarianceBound variance_bound(const BoundInputs& in) {
    in.validate();
    VarianceBound out;
    out.delta_prime = 4.0 * in.theta_error * in.theta_error +
                      (24.0 * in.folds / in.epsilon_prime) *
                          ((in.Q_bar + in.alpha_trim * in.alpha_trim) * std::pow(in.r_gamma, in.q) +
                           in.sigma_bar * in.sigma_bar * in.r_alpha);
    out.delta_dprime = std::sqrt(2.0 / in.epsilon_prime) * in.zeta * in.zeta / std::sqrt(in.n);
    out.total = out.delta_prime +
                2.0 * std::sqrt(out.delta_prime) * (std::sqrt(out.delta_dprime) + in.sigma) +
                out.delta_dprime;
    return out;
}

double approximation_error(double C, double h, double v_order, double n, double sigma_h) {
    if (!(sigma_h > 0.0)) throw UndefinedScaleError("local moment scale must be positive");
    if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");
    if (!(n >= 1.0)) throw ConfigError("sample size must be at least 1");
    if (!(C >= 0.0)) throw ConfigError("smoothness constant must be non-negative");
    return std::sqrt(n) * C * std::pow(h, v_order) / sigma_h;
}

CorollaryReport corollary_checklist(std::span<const BoundInputs> sequence) {
    if (sequence.empty()) throw ConfigError("corollary checklist needs at least one input");
    CorollaryReport report;
    report.regularity.reserve(sequence.size());
    report.condition1.reserve(sequence.size());
    report.condition2.reserve(sequence.size());
    report.condition3.reserve(sequence.size());

    for (const BoundInputs& in : sequence) {
        in.validate();
        const double ratio = in.kappa / in.sigma;
        report.regularity.push_back((ratio * ratio * ratio + in.zeta * in.zeta) / std::sqrt(in.n));
        report.condition1.push_back((std::sqrt(in.Q_bar) + in.alpha_bar / in.sigma + in.alpha_trim) *
                                    std::pow(in.r_gamma, in.q / 2.0));
        report.condition2.push_back(in.sigma_bar * std::sqrt(in.r_alpha));
        const double three_way = std::min({coupling(in.n, in.r_gamma, in.r_alpha),
                                           coupling(in.n, in.p_gamma, in.r_alpha),
                                           coupling(in.n, in.r_gamma, in.p_alpha)});
        report.condition3.push_back(three_way / in.sigma);
    }

    report.regularity_ok = non_increasing(report.regularity);
    report.condition1_ok = non_increasing(report.condition1);
    report.condition2_ok = non_increasing(report.condition2);
    report.condition3_ok = non_increasing(report.condition3);
    return report;
}

RateEstimates empirical_rates(std::span<const std::shared_ptr<const Predictor>> gammas,
                              std::span<const std::shared_ptr<const RieszEstimate>> alphas,
                              const Predictor& gamma0, const RieszEstimate& alpha0,
                              const Dataset& fresh) {
    if (gammas.empty() || alphas.empty()) throw ConfigError("need at least one fitted nuisance");
    if (fresh.size() == 0) throw ConfigError("evaluation sample is empty");

    RateEstimates out;
    std::vector<double> sq(fresh.size());

    for (const auto& gamma : gammas) {
        if (!gamma) throw ConfigError("null regression estimate");
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            const double err = gamma->predict(fresh.point(i)) - gamma0.predict(fresh.point(i));
            sq[i] = err * err;
        }
        out.per_fold_gamma.push_back(stable_mean(sq));
    }
    for (const auto& alpha : alphas) {
        if (!alpha) throw ConfigError("null representer estimate");
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            const double err = alpha->evaluate(fresh.point(i)) - alpha0.raw(fresh.point(i));
            sq[i] = err * err;
        }
        out.per_fold_alpha.push_back(stable_mean(sq));
    }

    out.r_gamma = stable_mean(out.per_fold_gamma);
    out.r_alpha = stable_mean(out.per_fold_alpha);
    return out;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("slope needs at least two matching points");
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw ConfigError("log-log slope needs positive inputs");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    const double mx = stable_mean(lx);
    const double my = stable_mean(ly);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw ConfigError("log-log slope needs distinct abscissae");
    return sxy / sxx;
}

} // namespace dml
