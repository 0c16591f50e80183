#include "dml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dml/errors.hpp"
#include "dml/rng.hpp"

namespace dml {

namespace {

struct SplitScratch {
    std::vector<std::uint32_t> order;
    std::vector<double> values;
    std::vector<double> targets;
    std::vector<std::size_t> feature_pool;
};

struct BestSplit {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Maximizes sum_L^2/n_L + sum_R^2/n_R, which is equivalent to minimizing the
// total within-child squared error.
BestSplit find_split(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::span<const std::uint32_t> rows, std::size_t min_leaf, std::size_t mtry,
                     Rng& rng, SplitScratch& scratch) {
    BestSplit best;
    const std::size_t m = rows.size();
    const std::size_t p = static_cast<std::size_t>(X.cols());

    double total = 0.0;
    for (std::uint32_t r : rows) total += y[r];
    const double base = total * total / static_cast<double>(m);

    auto& pool = scratch.feature_pool;
    pool.resize(p);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    const std::size_t tries = std::min(mtry, p);

    for (std::size_t t = 0; t < tries; ++t) {
        // Partial Fisher-Yates draw of the t-th distinct candidate feature.
        const std::size_t swap_with = t + static_cast<std::size_t>(rng.next_below(p - t));
        std::swap(pool[t], pool[swap_with]);
        const std::size_t feature = pool[t];

        auto& order = scratch.order;
        order.assign(rows.begin(), rows.end());
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double xa = X(a, feature), xb = X(b, feature);
            if (xa != xb) return xa < xb;
            return a < b;
        });

        auto& vals = scratch.values;
        auto& targ = scratch.targets;
        vals.resize(m);
        targ.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            vals[i] = X(order[i], feature);
            targ[i] = y[order[i]];
        }

        double left_sum = 0.0;
        for (std::size_t k = 1; k < m; ++k) {
            left_sum += targ[k - 1];
            if (k < min_leaf || m - k < min_leaf) continue;
            if (vals[k - 1] == vals[k]) continue; // no threshold separates ties
            const double right_sum = total - left_sum;
            const double gain = left_sum * left_sum / static_cast<double>(k) +
                                right_sum * right_sum / static_cast<double>(m - k) - base;
            if (gain > best.gain) {
                best.gain = gain;
                best.feature = static_cast<std::int32_t>(feature);
                best.threshold = 0.5 * (vals[k - 1] + vals[k]);
            }
        }
    }
    return best;
}

} // namespace

void ForestModel::build_tree(Tree& tree, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             std::vector<std::uint32_t>& rows, const ForestConfig& config,
                             std::size_t mtry, Rng& rng) {
    SplitScratch scratch;

    // Recursive construction over [begin, end) subranges of `rows`, which are
    // partitioned in place. Children are built left first, so node layout is
    // a deterministic function of the data and the RNG stream.
    auto build = [&](auto&& self, std::size_t begin, std::size_t end,
                     std::size_t depth) -> std::int32_t {
        const std::size_t m = end - begin;
        const std::int32_t index = static_cast<std::int32_t>(tree.size());
        tree.emplace_back();

        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) sum += y[rows[i]];
        const double mean = sum / static_cast<double>(m);
        tree[index].value = mean;

        bool splittable = m >= 2 * config.min_leaf;
        if (config.max_depth > 0 && depth >= config.max_depth) splittable = false;
        if (splittable) {
            bool constant = true;
            for (std::size_t i = begin + 1; i < end && constant; ++i) {
                constant = y[rows[i]] == y[rows[begin]];
            }
            if (constant) splittable = false;
        }
        if (!splittable) return index;

        const BestSplit split = find_split(X, y, {rows.data() + begin, m}, config.min_leaf, mtry,
                                           rng, scratch);
        if (split.feature < 0 || !(split.gain > 0.0)) return index;

        auto middle = std::partition(rows.begin() + begin, rows.begin() + end,
                                     [&](std::uint32_t r) {
                                         return X(r, split.feature) <= split.threshold;
                                     });
        const std::size_t cut = static_cast<std::size_t>(middle - rows.begin());
        if (cut == begin || cut == end) return index; // degenerate partition

        tree[index].feature = split.feature;
        tree[index].threshold = split.threshold;
        tree[index].left = self(self, begin, cut, depth + 1);
        tree[index].right = self(self, cut, end, depth + 1);
        return index;
    };
    build(build, 0, rows.size(), 0);
}

ForestModel ForestModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const ForestConfig& config, std::uint64_t seed) {
    const std::size_t n = static_cast<std::size_t>(X.rows());
    const std::size_t p = static_cast<std::size_t>(X.cols());
    if (n < 2 || p < 1) throw ConfigError("forest needs at least two rows and one feature");
    if (y.size() != X.rows()) throw ConfigError("forest target length does not match rows");
    if (config.trees < 1 || config.min_leaf < 1) {
        throw ConfigError("forest needs at least one tree and min_leaf >= 1");
    }

    const std::size_t mtry =
        config.mtry > 0 ? config.mtry : (p + 2) / 3; // ceil(p / 3)

    ForestModel model;
    model.feature_count_ = p;
    model.trees_.resize(config.trees);
    for (std::size_t t = 0; t < config.trees; ++t) {
        Rng rng = Rng::substream(seed, t);
        std::vector<std::uint32_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows[i] = static_cast<std::uint32_t>(rng.next_below(n));
        }
        model.trees_[t].reserve(2 * n / config.min_leaf + 1);
        build_tree(model.trees_[t], X, y, rows, config, mtry, rng);
    }
    return model;
}

double ForestModel::predict(std::span<const double> features) const {
    if (features.size() != feature_count_) {
        throw ConfigError("feature vector has wrong dimension for this forest");
    }
    double sum = 0.0;
    for (const Tree& tree : trees_) {
        std::int32_t node = 0;
        while (tree[node].feature >= 0) {
            node = features[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                                        : tree[node].right;
        }
        sum += tree[node].value;
    }
    return sum / static_cast<double>(trees_.size());
}

} // namespace dml
