#include "dml/mlp.hpp"

#include "dml/errors.hpp"
#include "dml/rng.hpp"

#include <cmath>
#include <limits>

namespace dml {

MlpNet::MlpNet(std::size_t in_dim, std::size_t hidden) {
    if (in_dim == 0 || hidden == 0) throw ConfigError("network dimensions must be positive");
    W1_.setZero(static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(in_dim));
    b1_.setZero(static_cast<Eigen::Index>(hidden));
    w2_.setZero(static_cast<Eigen::Index>(hidden));
    b2_ = 0.0;
}

void MlpNet::init(std::uint64_t seed) {
    Rng rng(seed);
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(W1_.cols()));
    const double hid_scale = 1.0 / std::sqrt(static_cast<double>(w2_.size()));
    for (Eigen::Index i = 0; i < W1_.rows(); ++i)
        for (Eigen::Index j = 0; j < W1_.cols(); ++j) W1_(i, j) = rng.next_uniform(-in_scale, in_scale);
    for (Eigen::Index i = 0; i < b1_.size(); ++i) b1_[i] = rng.next_uniform(-in_scale, in_scale);
    for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_[i] = rng.next_uniform(-hid_scale, hid_scale);
    b2_ = rng.next_uniform(-hid_scale, hid_scale);
}

std::size_t MlpNet::param_count() const {
    return static_cast<std::size_t>(W1_.size() + b1_.size() + w2_.size()) + 1;
}

Eigen::VectorXd MlpNet::flatten() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(param_count()));
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < W1_.rows(); ++i)
        for (Eigen::Index j = 0; j < W1_.cols(); ++j) out[at++] = W1_(i, j);
    for (Eigen::Index i = 0; i < b1_.size(); ++i) out[at++] = b1_[i];
    for (Eigen::Index i = 0; i < w2_.size(); ++i) out[at++] = w2_[i];
    out[at++] = b2_;
    return out;
}

void MlpNet::unflatten(const Eigen::VectorXd& params) {
    if (params.size() != static_cast<Eigen::Index>(param_count()))
        throw ConfigError("parameter vector size mismatch");
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < W1_.rows(); ++i)
        for (Eigen::Index j = 0; j < W1_.cols(); ++j) W1_(i, j) = params[at++];
    for (Eigen::Index i = 0; i < b1_.size(); ++i) b1_[i] = params[at++];
    for (Eigen::Index i = 0; i < w2_.size(); ++i) w2_[i] = params[at++];
    b2_ = params[at++];
}

Eigen::VectorXd MlpNet::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != W1_.cols()) throw ConfigError("feature count mismatch");
    // H is n x hidden
    Eigen::MatrixXd H = (X * W1_.transpose()).rowwise() + b1_.transpose();
    H = H.array().tanh();
    return (H * w2_).array() + b2_;
}

double MlpNet::predict_one(std::span<const double> features) const {
    if (features.size() != static_cast<std::size_t>(W1_.cols()))
        throw ConfigError("feature count mismatch");
    Eigen::Map<const Eigen::VectorXd> x(features.data(), static_cast<Eigen::Index>(features.size()));
    Eigen::VectorXd h = ((W1_ * x) + b1_).array().tanh();
    return w2_.dot(h) + b2_;
}

double MlpNet::loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    Eigen::VectorXd r = predict(X) - y;
    return r.squaredNorm() / static_cast<double>(X.rows());
}

Eigen::VectorXd MlpNet::gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    const auto n = static_cast<double>(X.rows());
    Eigen::MatrixXd A = (X * W1_.transpose()).rowwise() + b1_.transpose();
    Eigen::MatrixXd H = A.array().tanh();
    Eigen::VectorXd r = (H * w2_).array() + b2_ - y.array();

    const double scale = 2.0 / n;
    Eigen::VectorXd g_w2 = scale * (H.transpose() * r);
    const double g_b2 = scale * r.sum();
    // back through tanh: per-row delta_h = (1 - h^2) .* w2, weighted by residual
    Eigen::MatrixXd D = (1.0 - H.array().square()).matrix();
    Eigen::MatrixXd RD = D.array().colwise() * r.array(); // n x hidden
    Eigen::MatrixXd g_W1 = scale * ((RD.array().rowwise() * w2_.transpose().array()).matrix().transpose() * X);
    Eigen::VectorXd g_b1 = scale * (RD.transpose() * Eigen::VectorXd::Ones(X.rows())).cwiseProduct(w2_);

    Eigen::VectorXd out(static_cast<Eigen::Index>(param_count()));
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < g_W1.rows(); ++i)
        for (Eigen::Index j = 0; j < g_W1.cols(); ++j) out[at++] = g_W1(i, j);
    for (Eigen::Index i = 0; i < g_b1.size(); ++i) out[at++] = g_b1[i];
    for (Eigen::Index i = 0; i < g_w2.size(); ++i) out[at++] = g_w2[i];
    out[at++] = g_b2;
    return out;
}

MlpNet fit_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpConfig& config,
               std::uint64_t seed, MlpFitInfo* info) {
    if (X.rows() == 0) throw ConfigError("training set is empty");
    if (X.rows() != y.size()) throw ConfigError("row count mismatch between features and targets");

    MlpNet net(static_cast<std::size_t>(X.cols()), config.hidden);
    net.init(seed);

    double step = config.init_step;
    double current = net.loss(X, y);
    if (!std::isfinite(current)) throw TrainingDivergedError("initial loss is not finite");

    if (info) {
        info->loss_trace.clear();
        info->loss_trace.push_back(current);
        info->epochs = 0;
        info->final_step = step;
    }

    Eigen::VectorXd params = net.flatten();
    std::size_t stalled = 0;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        Eigen::VectorXd grad = net.gradient(X, y);
        if (!grad.allFinite()) throw TrainingDivergedError("gradient is not finite");

        bool accepted = false;
        while (step >= 1e-14) {
            Eigen::VectorXd trial = params - step * grad;
            net.unflatten(trial);
            const double trial_loss = net.loss(X, y);
            if (!std::isfinite(trial_loss)) throw TrainingDivergedError("loss is not finite");
            if (trial_loss <= current + config.accept_tol) {
                const double improvement = current - trial_loss;
                params.swap(trial);
                if (improvement <= config.converge_tol * (std::abs(current) + 1e-30))
                    ++stalled;
                else
                    stalled = 0;
                current = trial_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            net.unflatten(params);
            break;
        }
        // mild growth keeps the step from collapsing permanently after one bad region
        step = std::min(step * 1.1, config.init_step);

        if (info) {
            info->loss_trace.push_back(current);
            info->epochs = epoch + 1;
            info->final_step = step;
        }
        if (stalled >= config.patience) break;
    }

    net.unflatten(params);
    return net;
}

} // namespace dml
