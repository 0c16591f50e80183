#include "dml/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dml/errors.hpp"

namespace dml {

namespace {

double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

} // namespace

LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   std::size_t max_sweeps) {
    const auto n = X.rows();
    const auto p = X.cols();
    if (n < 1 || p < 1) throw ConfigError("lasso needs at least one row and one column");
    if (y.size() != n) throw ConfigError("lasso target length does not match feature rows");
    if (lambda < 0.0) throw ConfigError("lasso penalty must be nonnegative");

    LassoFit fit;
    fit.lambda = lambda;
    fit.coef = Eigen::VectorXd::Zero(p);

    const double y_mean = y.mean();
    Eigen::VectorXd yc = y.array() - y_mean;

    // Standardize columns with divisor-n moments; constant columns are
    // excluded from descent and their coefficients stay zero.
    Eigen::VectorXd mean(p), scale(p);
    Eigen::MatrixXd Z(n, p);
    std::vector<Eigen::Index> active_cols;
    for (Eigen::Index j = 0; j < p; ++j) {
        mean[j] = X.col(j).mean();
        Eigen::VectorXd centered = X.col(j).array() - mean[j];
        scale[j] = std::sqrt(centered.squaredNorm() / static_cast<double>(n));
        if (scale[j] > 0.0) {
            Z.col(j) = centered / scale[j];
            active_cols.push_back(j);
        } else {
            Z.col(j).setZero();
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd residual = yc;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (yc.squaredNorm() > 0.0 && !active_cols.empty()) {
        for (fit.sweeps = 1; fit.sweeps <= max_sweeps; ++fit.sweeps) {
            double max_change = 0.0;
            for (Eigen::Index j : active_cols) {
                const double rho = inv_n * Z.col(j).dot(residual) + beta[j];
                const double updated = soft_threshold(rho, lambda);
                const double change = updated - beta[j];
                if (change != 0.0) {
                    residual -= Z.col(j) * change;
                    beta[j] = updated;
                }
                max_change = std::max(max_change, std::abs(change));
            }
            if (max_change < 1e-9) {
                fit.converged = true;
                break;
            }
        }
    } else {
        fit.converged = true;
    }

    // Stationarity residual of the standardized objective.
    double kkt = 0.0;
    for (Eigen::Index j : active_cols) {
        const double grad = -inv_n * Z.col(j).dot(residual);
        if (beta[j] != 0.0) {
            kkt = std::max(kkt, std::abs(grad + lambda * (beta[j] > 0.0 ? 1.0 : -1.0)));
        } else {
            kkt = std::max(kkt, std::max(0.0, std::abs(grad) - lambda));
        }
    }
    fit.kkt_residual = kkt;
    fit.objective = 0.5 * inv_n * residual.squaredNorm() + lambda * beta.lpNorm<1>();

    for (Eigen::Index j = 0; j < p; ++j) {
        fit.coef[j] = scale[j] > 0.0 ? beta[j] / scale[j] : 0.0;
    }
    fit.intercept = y_mean - fit.coef.dot(mean);
    return fit;
}

double default_lasso_lambda(const Eigen::VectorXd& y, std::size_t p, std::size_t n) {
    if (n < 2) throw ConfigError("default penalty needs at least two rows");
    const double mean = y.mean();
    const double sd =
        std::sqrt((y.array() - mean).square().sum() / static_cast<double>(y.size() - 1));
    const double logp = std::log(static_cast<double>(std::max<std::size_t>(p, 2)));
    return 1.1 * sd * std::sqrt(logp / static_cast<double>(n));
}

double cross_val_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        std::span<const double> grid, std::size_t folds) {
    if (grid.empty()) throw ConfigError("cross-validation grid is empty");
    const auto n = X.rows();
    if (folds < 2 || static_cast<Eigen::Index>(folds) > n) {
        throw ConfigError("cross-validation needs 2 <= folds <= n");
    }

    double best_lambda = grid[0];
    double best_mse = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        double sse = 0.0;
        for (std::size_t fold = 0; fold < folds; ++fold) {
            std::vector<Eigen::Index> train, test;
            for (Eigen::Index i = 0; i < n; ++i) {
                (static_cast<std::size_t>(i) % folds == fold ? test : train).push_back(i);
            }
            Eigen::MatrixXd Xtr(train.size(), X.cols());
            Eigen::VectorXd ytr(train.size());
            for (std::size_t k = 0; k < train.size(); ++k) {
                Xtr.row(k) = X.row(train[k]);
                ytr[k] = y[train[k]];
            }
            const LassoFit fit = fit_lasso(Xtr, ytr, lambda);
            for (Eigen::Index i : test) {
                const double pred = fit.intercept + X.row(i).dot(fit.coef);
                sse += (y[i] - pred) * (y[i] - pred);
            }
        }
        const double mse = sse / static_cast<double>(n);
        if (mse < best_mse || (mse == best_mse && lambda > best_lambda)) {
            best_mse = mse;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

std::shared_ptr<const DictionaryLinearPredictor> fit_lasso_regression(
    std::shared_ptr<const Dictionary> dict, const Dataset& train, double lambda,
    LassoFit* diagnostics) {
    Eigen::MatrixXd X = dict->expand_rows(train);
    Eigen::VectorXd y(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) y[i] = train.y(i);

    if (lambda < 0.0) lambda = default_lasso_lambda(y, dict->size(), train.size());
    LassoFit fit = fit_lasso(X, y, lambda);

    // The dictionary's first basis function is the constant, so the intercept
    // folds into its coefficient and the predictor stays dictionary-linear.
    Eigen::VectorXd coef = fit.coef;
    coef[0] += fit.intercept;
    if (diagnostics) *diagnostics = fit;
    return std::make_shared<const DictionaryLinearPredictor>(std::move(dict), std::move(coef));
}

} // namespace dml
