#ifndef DML_RIESZ_HPP
#define DML_RIESZ_HPP

#include "dml/dataset.hpp"
#include "dml/dictionary.hpp"
#include "dml/functional.hpp"
#include "dml/weighting.hpp"

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace dml {

/// Clamp to [-bound, bound].
double trim(double value, double bound);

/// Estimated balancing weight. `raw` is the untrimmed value; `evaluate`
/// applies the trim bound and is what the estimation engine consumes.
class RieszEstimate {
public:
    virtual ~RieszEstimate() = default;

    double evaluate(const Point& w) const { return trim(raw(w), trim_bound_); }
    virtual double raw(const Point& w) const = 0;
    virtual std::string method() const = 0;

    double trim_bound() const { return trim_bound_; }

protected:
    explicit RieszEstimate(double trim_bound) : trim_bound_(trim_bound) {}

    double trim_bound_;
};

/// rho . b(w) over a dictionary.
class LinearRiesz final : public RieszEstimate {
public:
    LinearRiesz(std::shared_ptr<const Dictionary> dict, Eigen::VectorXd rho, double trim_bound);

    double raw(const Point& w) const override;
    std::string method() const override { return "lasso-qp"; }

    const Eigen::VectorXd& coefficients() const { return rho_; }
    const Dictionary& dictionary() const { return *dict_; }

private:
    std::shared_ptr<const Dictionary> dict_;
    Eigen::VectorXd rho_;
};

/// Inverse-propensity contrast d/pi - (1-d)/(1-pi), optionally localized by a
/// kernel weight in v. Propensities within `overlap_delta` of 0 or 1 raise
/// OverlapViolationError.
class CateOracleRiesz final : public RieszEstimate {
public:
    CateOracleRiesz(std::function<double(const Point&)> propensity,
                    std::shared_ptr<const LocalWeighting> weighting, double trim_bound,
                    double overlap_delta = 1e-6);

    double raw(const Point& w) const override;
    std::string method() const override { return "oracle"; }

private:
    std::function<double(const Point&)> propensity_;
    std::shared_ptr<const LocalWeighting> weighting_;
    double overlap_delta_;
};

/// Difference of the one-sided boundary weights in the running variable.
class RddOracleRiesz final : public RieszEstimate {
public:
    RddOracleRiesz(std::shared_ptr<const LocalWeighting> plus,
                   std::shared_ptr<const LocalWeighting> minus, double trim_bound);

    double raw(const Point& w) const override;
    std::string method() const override { return "oracle"; }

private:
    std::shared_ptr<const LocalWeighting> plus_;
    std::shared_ptr<const LocalWeighting> minus_;
};

/// Kernel weight in v times an already-fitted global representer.
class LocalizedRiesz final : public RieszEstimate {
public:
    LocalizedRiesz(std::shared_ptr<const LocalWeighting> weighting,
                   std::shared_ptr<const RieszEstimate> global, double trim_bound);

    double raw(const Point& w) const override;
    std::string method() const override { return "localized-" + global_->method(); }

    const RieszEstimate& global() const { return *global_; }

private:
    std::shared_ptr<const LocalWeighting> weighting_;
    std::shared_ptr<const RieszEstimate> global_;
};

/// Arbitrary callable, mainly for probes and tests.
class FunctionRiesz final : public RieszEstimate {
public:
    explicit FunctionRiesz(std::function<double(const Point&)> fn,
                           double trim_bound = std::numeric_limits<double>::infinity());

    double raw(const Point& w) const override;
    std::string method() const override { return "function"; }

private:
    std::function<double(const Point&)> fn_;
};

/// Sample moments E_n[m(W, b_j)] of the functional applied to each basis
/// function, computed in one pass per row.
Eigen::VectorXd riesz_moments(const Dictionary& dict, const Dataset& data,
                              const FunctionalSpec& spec);

double default_riesz_lambda(const Eigen::VectorXd& moments, std::size_t dict_size, std::size_t n);

struct RieszFitInfo {
    std::size_t sweeps = 0;
    double kkt_residual = 0.0;
    bool converged = false;
    double objective = 0.0;
    std::vector<double> objective_trace;
    double lambda = 0.0;
};

/// Minimize rho' G rho - 2 M' rho + 2 lambda |rho|_1 with G = E_n[b b'] plus
/// a tiny ridge, by cyclic coordinate descent. A negative lambda selects the
/// scaled default.
std::shared_ptr<const LinearRiesz> fit_riesz_lasso(
    std::shared_ptr<const Dictionary> dict, const Dataset& train, const FunctionalSpec& spec,
    double lambda = -1.0, double trim_bound = std::numeric_limits<double>::infinity(),
    RieszFitInfo* info = nullptr);

enum class RieszStrategy {
    LocalizeGlobal, // fit the global representer, then multiply by the kernel weight
    DirectLocal,    // fit the localized moments directly
};

struct RieszOptions {
    RieszStrategy strategy = RieszStrategy::LocalizeGlobal;
    double lambda = -1.0;     // negative means the scaled default
    double trim_scale = 50.0; // bound is trim_scale globally, trim_scale / h localized
};

std::shared_ptr<const RieszEstimate> fit_riesz_for_spec(std::shared_ptr<const Dictionary> dict,
                                                        const Dataset& train,
                                                        const FunctionalSpec& spec,
                                                        const RieszOptions& options = {},
                                                        RieszFitInfo* info = nullptr);

} // namespace dml

#endif
