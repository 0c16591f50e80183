#ifndef DML_DGP_HPP
#define DML_DGP_HPP

#include "dml/dataset.hpp"
#include "dml/predictor.hpp"
#include "dml/riesz.hpp"
#include "dml/weighting.hpp"

#include <cstdint>
#include <memory>

namespace dml {

/// Synthetic benchmark population: V uniform on (-1/2, 1/2), three
/// covariates driven by V with uniform noise, a logistic treatment in the
/// sum of (V, X), and outcome D * V * X1 * X2 * X3 plus Gaussian noise for
/// the treated. Each row consumes a fixed number of draws, so samples are
/// reproducible from the seed alone.
Dataset dgp_sample(std::size_t n, std::uint64_t seed);

/// E[Y | D=1, V=v] - E[Y | D=0, V=v] = v (1 + 2v)^2 (v - 1)^2.
double true_cate(double v);

/// Integral of the treatment contrast over V: 7/60.
double true_ate();

double true_propensity(const Point& w);
double true_gamma(const Point& w);

std::shared_ptr<const Predictor> true_gamma_predictor();

/// Inverse-propensity representer of the global contrast. The default bound
/// exceeds the population sup norm, so censoring never binds.
std::shared_ptr<const RieszEstimate> oracle_ate_riesz(double trim_bound = 100.0);

/// Localized representer: the kernel weight times the global one.
std::shared_ptr<const RieszEstimate> oracle_cate_riesz(
    std::shared_ptr<const LocalWeighting> weighting, double trim_scale = 50.0);

} // namespace dml

#endif
