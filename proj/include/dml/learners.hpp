#ifndef DML_LEARNERS_HPP
#define DML_LEARNERS_HPP

#include "dml/dataset.hpp"
#include "dml/dictionary.hpp"
#include "dml/forest.hpp"
#include "dml/mlp.hpp"
#include "dml/predictor.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>

namespace dml {

/// Row-to-feature mapping shared by the nonlinear learners. `fill` writes
/// exactly `dim` values into the output span.
struct FeatureSpace {
    std::size_t dim = 0;
    std::function<void(const Point&, std::span<double>)> fill;
};

/// The variables (d[, v], x1..xp) as-is.
FeatureSpace raw_features(bool has_v, std::size_t x_dim);

/// Dictionary expansion minus the leading constant column; the learners fit
/// their own intercepts.
FeatureSpace dictionary_features(std::shared_ptr<const Dictionary> dict);

Eigen::MatrixXd feature_matrix(const FeatureSpace& space, const Dataset& data);

class ForestPredictor final : public Predictor {
public:
    ForestPredictor(FeatureSpace space, ForestModel model);

    double predict(const Point& w) const override;

private:
    FeatureSpace space_;
    ForestModel model_;
};

/// Wraps a trained network together with the standardization applied during
/// fitting, so predictions are on the original scale of y.
class MlpPredictor final : public Predictor {
public:
    MlpPredictor(FeatureSpace space, MlpNet net, Eigen::VectorXd feature_mean,
                 Eigen::VectorXd feature_scale, double y_mean, double y_scale);

    double predict(const Point& w) const override;

private:
    FeatureSpace space_;
    MlpNet net_;
    Eigen::VectorXd feature_mean_;
    Eigen::VectorXd feature_scale_;
    double y_mean_;
    double y_scale_;
};

std::shared_ptr<const Predictor> fit_forest_regression(const FeatureSpace& space,
                                                       const Dataset& train,
                                                       const ForestConfig& config,
                                                       std::uint64_t seed);

std::shared_ptr<const Predictor> fit_mlp_regression(const FeatureSpace& space, const Dataset& train,
                                                    const MlpConfig& config, std::uint64_t seed,
                                                    MlpFitInfo* info = nullptr);

} // namespace dml

#endif
