#include "dml/riesz.hpp"

#include "dml/errors.hpp"
#include "dml/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace dml {

double trim(double value, double bound) {
    if (!(bound > 0.0)) throw ConfigError("trim bound must be positive");
    return std::clamp(value, -bound, bound);
}

LinearRiesz::LinearRiesz(std::shared_ptr<const Dictionary> dict, Eigen::VectorXd rho,
                         double trim_bound)
    : RieszEstimate(trim_bound), dict_(std::move(dict)), rho_(std::move(rho)) {
    if (!dict_) throw ConfigError("dictionary must not be null");
    if (rho_.size() != static_cast<Eigen::Index>(dict_->size()))
        throw ConfigError("coefficient size does not match dictionary size");
}

double LinearRiesz::raw(const Point& w) const {
    std::vector<double> basis(dict_->size());
    dict_->expand(w, basis.data());
    double out = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) out += rho_[static_cast<Eigen::Index>(j)] * basis[j];
    return out;
}

CateOracleRiesz::CateOracleRiesz(std::function<double(const Point&)> propensity,
                                 std::shared_ptr<const LocalWeighting> weighting, double trim_bound,
                                 double overlap_delta)
    : RieszEstimate(trim_bound),
      propensity_(std::move(propensity)),
      weighting_(std::move(weighting)),
      overlap_delta_(overlap_delta) {
    if (!propensity_) throw ConfigError("propensity function must not be null");
    if (!(overlap_delta_ >= 0.0 && overlap_delta_ < 0.5))
        throw ConfigError("overlap delta must lie in [0, 0.5)");
}

double CateOracleRiesz::raw(const Point& w) const {
    const double pi = propensity_(w);
    if (!(pi > overlap_delta_) || !(pi < 1.0 - overlap_delta_)) {
        std::ostringstream msg;
        msg << "propensity " << pi << " violates overlap margin " << overlap_delta_;
        throw OverlapViolationError(msg.str());
    }
    const double contrast = w.d != 0.0 ? 1.0 / pi : -1.0 / (1.0 - pi);
    const double wt = weighting_ ? weighting_->weight(w.v) : 1.0;
    return wt * contrast;
}

RddOracleRiesz::RddOracleRiesz(std::shared_ptr<const LocalWeighting> plus,
                               std::shared_ptr<const LocalWeighting> minus, double trim_bound)
    : RieszEstimate(trim_bound), plus_(std::move(plus)), minus_(std::move(minus)) {
    if (!plus_ || !minus_) throw ConfigError("both boundary windows are required");
}

double RddOracleRiesz::raw(const Point& w) const {
    return plus_->weight(w.d) - minus_->weight(w.d);
}

LocalizedRiesz::LocalizedRiesz(std::shared_ptr<const LocalWeighting> weighting,
                               std::shared_ptr<const RieszEstimate> global, double trim_bound)
    : RieszEstimate(trim_bound), weighting_(std::move(weighting)), global_(std::move(global)) {
    if (!weighting_) throw ConfigError("weighting must not be null");
    if (!global_) throw ConfigError("global representer must not be null");
}

double LocalizedRiesz::raw(const Point& w) const {
    return weighting_->weight(w.v) * global_->raw(w);
}

FunctionRiesz::FunctionRiesz(std::function<double(const Point&)> fn, double trim_bound)
    : RieszEstimate(trim_bound), fn_(std::move(fn)) {
    if (!fn_) throw ConfigError("function must not be null");
}

double FunctionRiesz::raw(const Point& w) const { return fn_(w); }

Eigen::VectorXd riesz_moments(const Dictionary& dict, const Dataset& data,
                              const FunctionalSpec& spec) {
    const std::size_t n = data.size();
    const std::size_t p = dict.size();
    if (n == 0) throw ConfigError("cannot compute moments of an empty sample");

    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    std::vector<double> hi(p);
    std::vector<double> lo(p);

    for (std::size_t i = 0; i < n; ++i) {
        const Point w = data.point(i);
        switch (spec.kind()) {
        case FunctionalKind::Ate:
        case FunctionalKind::Cate: {
            Point w1 = w;
            w1.d = 1.0;
            Point w0 = w;
            w0.d = 0.0;
            dict.expand(w1, hi.data());
            dict.expand(w0, lo.data());
            const double wt =
                spec.kind() == FunctionalKind::Cate ? spec.weighting()->weight(w.v) : 1.0;
            for (std::size_t j = 0; j < p; ++j) cols[j][i] = wt * (hi[j] - lo[j]);
            break;
        }
        case FunctionalKind::AvgDeriv:
        case FunctionalKind::HetDeriv: {
            dict.expand_d_derivative(w, hi.data());
            const double wt =
                spec.kind() == FunctionalKind::HetDeriv ? spec.weighting()->weight(w.v) : 1.0;
            for (std::size_t j = 0; j < p; ++j) cols[j][i] = wt * hi[j];
            break;
        }
        case FunctionalKind::Rdd: {
            dict.expand(w, hi.data());
            const double scale =
                spec.weighting()->weight(w.d) - spec.weighting_minus()->weight(w.d);
            for (std::size_t j = 0; j < p; ++j) cols[j][i] = scale * hi[j];
            break;
        }
        }
    }

    Eigen::VectorXd moments(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) moments[static_cast<Eigen::Index>(j)] = stable_mean(cols[j]);
    return moments;
}

double default_riesz_lambda(const Eigen::VectorXd& moments, std::size_t dict_size, std::size_t n) {
    if (n == 0) throw ConfigError("sample size must be positive");
    const double max_abs = moments.size() > 0 ? moments.cwiseAbs().maxCoeff() : 0.0;
    const double p_eff = static_cast<double>(std::max<std::size_t>(dict_size, 2));
    return 0.5 * max_abs * std::sqrt(std::log(p_eff) / static_cast<double>(n));
}

namespace {

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

} // namespace

std::shared_ptr<const LinearRiesz> fit_riesz_lasso(std::shared_ptr<const Dictionary> dict,
                                                   const Dataset& train, const FunctionalSpec& spec,
                                                   double lambda, double trim_bound,
                                                   RieszFitInfo* info) {
    if (!dict) throw ConfigError("dictionary must not be null");
    const std::size_t n = train.size();
    const auto p = static_cast<Eigen::Index>(dict->size());
    if (n == 0) throw ConfigError("training set is empty");

    Eigen::MatrixXd B = dict->expand_rows(train);
    Eigen::MatrixXd G = (B.transpose() * B) / static_cast<double>(n);
    G.diagonal().array() += 1e-10;
    Eigen::VectorXd M = riesz_moments(*dict, train, spec);

    if (lambda < 0.0) lambda = default_riesz_lambda(M, dict->size(), n);

    Eigen::VectorXd rho = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(p); // running G * rho

    constexpr std::size_t max_sweeps = 10000;
    constexpr double tol = 1e-9;
    bool converged = false;
    std::size_t sweeps = 0;
    std::vector<double> trace;

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double old = rho[j];
            const double partial = M[j] - q[j] + G(j, j) * old;
            const double updated = soft_threshold(partial, lambda) / G(j, j);
            const double delta = updated - old;
            if (delta != 0.0) {
                q += delta * G.col(j);
                rho[j] = updated;
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        q = G * rho; // refresh to keep accumulated drift out of the trace
        sweeps = sweep + 1;
        const double objective = rho.dot(q) - 2.0 * M.dot(rho) + 2.0 * lambda * rho.lpNorm<1>();
        trace.push_back(objective);
        if (max_delta < tol) {
            converged = true;
            break;
        }
    }

    const Eigen::VectorXd grad = G * rho - M;
    double kkt = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double g = grad[j];
        if (rho[j] != 0.0)
            kkt = std::max(kkt, std::abs(g + lambda * (rho[j] > 0.0 ? 1.0 : -1.0)));
        else
            kkt = std::max(kkt, std::max(0.0, std::abs(g) - lambda));
    }

    if (info) {
        info->sweeps = sweeps;
        info->kkt_residual = kkt;
        info->converged = converged;
        info->objective = trace.empty() ? 0.0 : trace.back();
        info->objective_trace = std::move(trace);
        info->lambda = lambda;
    }
    return std::make_shared<LinearRiesz>(std::move(dict), std::move(rho), trim_bound);
}

std::shared_ptr<const RieszEstimate> fit_riesz_for_spec(std::shared_ptr<const Dictionary> dict,
                                                        const Dataset& train,
                                                        const FunctionalSpec& spec,
                                                        const RieszOptions& options,
                                                        RieszFitInfo* info) {
    switch (spec.kind()) {
    case FunctionalKind::Ate:
    case FunctionalKind::AvgDeriv:
        return fit_riesz_lasso(std::move(dict), train, spec, options.lambda, options.trim_scale,
                               info);
    case FunctionalKind::Cate:
    case FunctionalKind::HetDeriv: {
        const double h = spec.weighting()->bandwidth();
        const double bound = options.trim_scale / h;
        if (options.strategy == RieszStrategy::DirectLocal)
            return fit_riesz_lasso(std::move(dict), train, spec, options.lambda, bound, info);
        auto global = fit_riesz_lasso(std::move(dict), train, spec.unlocalized(), options.lambda,
                                      options.trim_scale, info);
        auto weighting = std::make_shared<const LocalWeighting>(*spec.weighting());
        return std::make_shared<LocalizedRiesz>(std::move(weighting), std::move(global), bound);
    }
    case FunctionalKind::Rdd: {
        const double h = spec.weighting()->bandwidth();
        const double bound = options.trim_scale / h;
        return fit_riesz_lasso(std::move(dict), train, spec, options.lambda, bound, info);
    }
    }
    throw ConfigError("unknown functional kind");
}

} // namespace dml
