#ifndef DML_FOREST_HPP
#define DML_FOREST_HPP

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace dml {

class Rng;

struct ForestConfig {
    std::size_t trees = 1000;
    std::size_t min_leaf = 5;
    std::size_t max_depth = 0; // 0 means unlimited
    std::size_t mtry = 0;      // 0 means ceil(p / 3)
};

/// Regression forest of CART trees: bootstrap resampling per tree, a random
/// feature subset per node, and variance-reduction splits. Deterministic
/// given the seed; predictions average per-tree leaf means and therefore stay
/// inside [min(y), max(y)].
class ForestModel {
public:
    static ForestModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const ForestConfig& config, std::uint64_t seed);

    double predict(std::span<const double> features) const;

    std::size_t tree_count() const { return trees_.size(); }
    std::size_t feature_count() const { return feature_count_; }

private:
    struct Node {
        std::int32_t feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
    };
    using Tree = std::vector<Node>;

    static void build_tree(Tree& tree, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           std::vector<std::uint32_t>& rows, const ForestConfig& config,
                           std::size_t mtry, Rng& rng);

    std::vector<Tree> trees_;
    std::size_t feature_count_ = 0;
};

} // namespace dml

#endif
