#ifndef DML_LASSO_HPP
#define DML_LASSO_HPP

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <span>

#include "dml/dataset.hpp"
#include "dml/dictionary.hpp"

namespace dml {

/// Solution of  min_{b0, beta}  (1/2) * mean((y - b0 - X beta)^2) + lambda * ||beta||_1
/// where the penalty acts on internally standardized features (mean 0,
/// variance 1 with divisor n) and the intercept is unpenalized.
struct LassoFit {
    Eigen::VectorXd coef;         // original feature scale
    double intercept = 0.0;
    double lambda = 0.0;
    std::size_t sweeps = 0;
    double kkt_residual = 0.0;    // stationarity violation on the standardized problem
    bool converged = false;
    double objective = 0.0;       // standardized-problem objective at the solution
};

LassoFit fit_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                   std::size_t max_sweeps = 100000);

/// Theory-driven default penalty 1.1 * sd(y) * sqrt(log(p) / n).
double default_lasso_lambda(const Eigen::VectorXd& y, std::size_t p, std::size_t n);

/// K-fold cross-validated penalty over a grid; ties break toward larger
/// lambda. Folds are assigned round-robin by row index.
double cross_val_lambda(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        std::span<const double> grid, std::size_t folds);

/// Dictionary-expanded lasso regression of y on b(w). The intercept is folded
/// into the constant basis coefficient, so the result is dictionary-linear.
/// lambda < 0 selects the default penalty.
std::shared_ptr<const DictionaryLinearPredictor> fit_lasso_regression(
    std::shared_ptr<const Dictionary> dict, const Dataset& train, double lambda = -1.0,
    LassoFit* diagnostics = nullptr);

} // namespace dml

#endif
