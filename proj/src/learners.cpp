#include "dml/learners.hpp"

#include "dml/errors.hpp"
#include "dml/stats.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace dml {

FeatureSpace raw_features(bool has_v, std::size_t x_dim) {
    FeatureSpace space;
    space.dim = 1 + (has_v ? 1 : 0) + x_dim;
    space.fill = [has_v, x_dim](const Point& w, std::span<double> out) {
        std::size_t at = 0;
        out[at++] = w.d;
        if (has_v) out[at++] = w.v;
        if (w.x.size() != x_dim) throw ConfigError("covariate dimension mismatch");
        for (std::size_t j = 0; j < x_dim; ++j) out[at++] = w.x[j];
    };
    return space;
}

FeatureSpace dictionary_features(std::shared_ptr<const Dictionary> dict) {
    if (!dict) throw ConfigError("dictionary must not be null");
    if (dict->size() < 2) throw ConfigError("dictionary has no non-constant entries");
    FeatureSpace space;
    space.dim = dict->size() - 1;
    space.fill = [dict](const Point& w, std::span<double> out) {
        std::vector<double> full(dict->size());
        dict->expand(w, full.data());
        for (std::size_t j = 1; j < full.size(); ++j) out[j - 1] = full[j];
    };
    return space;
}

Eigen::MatrixXd feature_matrix(const FeatureSpace& space, const Dataset& data) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(space.dim));
    std::vector<double> row(space.dim);
    for (std::size_t i = 0; i < data.size(); ++i) {
        space.fill(data.point(i), row);
        for (std::size_t j = 0; j < space.dim; ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return X;
}

ForestPredictor::ForestPredictor(FeatureSpace space, ForestModel model)
    : space_(std::move(space)), model_(std::move(model)) {}

double ForestPredictor::predict(const Point& w) const {
    std::vector<double> row(space_.dim);
    space_.fill(w, row);
    return model_.predict(row);
}

MlpPredictor::MlpPredictor(FeatureSpace space, MlpNet net, Eigen::VectorXd feature_mean,
                           Eigen::VectorXd feature_scale, double y_mean, double y_scale)
    : space_(std::move(space)),
      net_(std::move(net)),
      feature_mean_(std::move(feature_mean)),
      feature_scale_(std::move(feature_scale)),
      y_mean_(y_mean),
      y_scale_(y_scale) {}

double MlpPredictor::predict(const Point& w) const {
    std::vector<double> row(space_.dim);
    space_.fill(w, row);
    for (std::size_t j = 0; j < space_.dim; ++j)
        row[j] = (row[j] - feature_mean_[static_cast<Eigen::Index>(j)]) /
                 feature_scale_[static_cast<Eigen::Index>(j)];
    return y_mean_ + y_scale_ * net_.predict_one(row);
}

std::shared_ptr<const Predictor> fit_forest_regression(const FeatureSpace& space,
                                                       const Dataset& train,
                                                       const ForestConfig& config,
                                                       std::uint64_t seed) {
    Eigen::MatrixXd X = feature_matrix(space, train);
    Eigen::Map<const Eigen::VectorXd> y(train.y_column().data(),
                                        static_cast<Eigen::Index>(train.size()));
    ForestModel model = ForestModel::fit(X, y, config, seed);
    return std::make_shared<ForestPredictor>(space, std::move(model));
}

std::shared_ptr<const Predictor> fit_mlp_regression(const FeatureSpace& space, const Dataset& train,
                                                    const MlpConfig& config, std::uint64_t seed,
                                                    MlpFitInfo* info) {
    Eigen::MatrixXd X = feature_matrix(space, train);
    const auto n = X.rows();
    Eigen::VectorXd mean = X.colwise().mean();
    Eigen::VectorXd scale(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - mean[j]).square().sum() / static_cast<double>(n);
        const double sd = std::sqrt(var);
        scale[j] = sd > 0.0 ? sd : 1.0;
        X.col(j) = (X.col(j).array() - mean[j]) / scale[j];
    }

    Eigen::Map<const Eigen::VectorXd> y_raw(train.y_column().data(), n);
    const double y_mean = y_raw.mean();
    const double y_var = (y_raw.array() - y_mean).square().sum() / static_cast<double>(n);
    const double y_scale = y_var > 0.0 ? std::sqrt(y_var) : 1.0;
    Eigen::VectorXd y = (y_raw.array() - y_mean) / y_scale;

    MlpNet net = fit_mlp(X, y, config, seed, info);
    return std::make_shared<MlpPredictor>(space, std::move(net), std::move(mean), std::move(scale),
                                          y_mean, y_scale);
}

} // namespace dml
