#ifndef DML_MLP_HPP
#define DML_MLP_HPP

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace dml {

struct MlpConfig {
    std::size_t hidden = 8;
    std::size_t max_epochs = 2000;
    double init_step = 0.5;
    double accept_tol = 1e-12;   // accepted steps may not raise the loss beyond this
    double converge_tol = 1e-10; // relative improvement below this counts as stalled
    std::size_t patience = 10;   // stalled epochs before stopping early
};

/// Single hidden layer network  f(x) = w2 . tanh(W1 x + b1) + b2.
class MlpNet {
public:
    MlpNet(std::size_t in_dim, std::size_t hidden);

    void init(std::uint64_t seed);

    std::size_t param_count() const;
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& params);

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
    double predict_one(std::span<const double> features) const;

    /// Mean squared error over the rows of X.
    double loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;
    Eigen::VectorXd gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;

    std::size_t in_dim() const { return static_cast<std::size_t>(W1_.cols()); }

private:
    Eigen::MatrixXd W1_; // hidden x in
    Eigen::VectorXd b1_; // hidden
    Eigen::VectorXd w2_; // hidden
    double b2_ = 0.0;
};

struct MlpFitInfo {
    std::vector<double> loss_trace; // loss after each accepted epoch, starting with the initial loss
    std::size_t epochs = 0;
    double final_step = 0.0;
};

/// Full-batch gradient descent with halving step control: a proposed step
/// that raises the loss is retried at half the step size, so the loss trace
/// is non-increasing up to accept_tol. Throws TrainingDivergedError when the
/// loss turns non-finite.
MlpNet fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpConfig& config,
               std::uint64_t seed, MlpFitInfo* info = nullptr);

} // namespace dml

#endif
