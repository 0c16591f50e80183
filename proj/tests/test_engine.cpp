#include <doctest.h>

#include "dml/dgp.hpp"
#include "dml/engine.hpp"
#include "dml/errors.hpp"
#include "dml/lasso.hpp"
#include "dml/rng.hpp"
#include "dml/stats.hpp"

#include "oracle_helpers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

using namespace dml;

namespace {

GammaFactory constant_gamma(double value) {
    return [value](const Dataset&, std::uint64_t) {
        return std::make_shared<const ConstantPredictor>(value);
    };
}

AlphaFactory constant_alpha(double treated, double control) {
    return [treated, control](const Dataset&, std::uint64_t) {
        return std::make_shared<const FunctionRiesz>(
            [treated, control](const Point& w) { return w.d != 0.0 ? treated : control; });
    };
}

} // namespace

TEST_CASE("critical values invert the two-sided tail") {
    CHECK(critical_value(0.05) == doctest::Approx(oracle::bisect_normal_quantile(0.975)).epsilon(1e-12));
    CHECK(critical_value(0.20) == doctest::Approx(oracle::bisect_normal_quantile(0.90)).epsilon(1e-12));
    CHECK_THROWS_AS(critical_value(0.0), ConfigError);
    CHECK_THROWS_AS(critical_value(1.0), ConfigError);
}

TEST_CASE("hand-worked four-row estimate") {
    // gamma(w) = d, alpha(w) = 2d - 1, theta estimated for the treatment
    // contrast m = gamma(1,x) - gamma(0,x) = 1. Scores by row:
    //   psi_i + theta = 1 + (2 d_i - 1)(y_i - d_i)
    // rows: (y, d) = (2, 1), (0, 0), (1, 1), (-1, 0)
    //   row 1: 1 + (1)(2 - 1)  = 2
    //   row 2: 1 + (-1)(0 - 0) = 1
    //   row 3: 1 + (1)(1 - 1)  = 1
    //   row 4: 1 + (-1)(-1-0)  = 2
    // theta = 3/2, sigma^2 = mean((score - theta)^2) = 1/4.
    const Dataset data({2.0, 0.0, 1.0, -1.0}, {1.0, 0.0, 1.0, 0.0}, {}, {}, 0);
    const FunctionPredictor gamma([](const Point& w) { return w.d; });
    const FunctionRiesz alpha([](const Point& w) { return 2.0 * w.d - 1.0; });
    const DmlResult res = oracle_estimate(data, FunctionalSpec::ate(), gamma, alpha, 0.05);

    CHECK(res.theta == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(res.sigma == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(res.n == 4);
    CHECK(res.fold_count == 0);
    const double half = res.critical * res.sigma / 2.0; // sigma / sqrt(4)
    CHECK(res.ci_low == doctest::Approx(1.5 - half).epsilon(1e-15));
    CHECK(res.ci_high == doctest::Approx(1.5 + half).epsilon(1e-15));
    CHECK(res.critical == doctest::Approx(normal_quantile(0.975)).epsilon(1e-15));

    // Exact reconstruction identities.
    std::vector<double> scores(res.n);
    for (std::size_t i = 0; i < res.n; ++i) scores[i] = res.m_values[i] + res.corrections[i];
    CHECK(stable_mean(scores) == res.theta);
    CHECK(stable_mean(res.psi) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("degenerate dispersion is rejected") {
    const Dataset data({1.0, 1.0, 1.0, 1.0}, {1.0, 1.0, 0.0, 0.0}, {}, {}, 0);
    const ConstantPredictor gamma(0.0);
    const FunctionRiesz alpha([](const Point&) { return 0.0; });
    // m = 0, correction = 0 for every row: sigma^2 = 0.
    CHECK_THROWS_AS(oracle_estimate(data, FunctionalSpec::ate(), gamma, alpha), UndefinedScaleError);
}

TEST_CASE("cross-fit wiring feeds each fold the right training rows") {
    const Dataset data = dgp_sample(60, 19);
    std::vector<std::vector<double>> train_y_seen;
    const GammaFactory gamma = [&](const Dataset& train, std::uint64_t) {
        std::vector<double> ys(train.y_column().begin(), train.y_column().end());
        train_y_seen.push_back(ys);
        return std::make_shared<const ConstantPredictor>(0.0);
    };
    const AlphaFactory alpha = constant_alpha(1.0, -1.0);
    const FoldPartition part = partition_folds(data.size(), 3, 5);
    dml_estimate_with_partition(data, FunctionalSpec::ate(), gamma, alpha, part, 5);

    REQUIRE(train_y_seen.size() == 3);
    for (std::size_t ell = 0; ell < 3; ++ell) {
        const auto comp = part.complement(ell);
        std::vector<double> expected;
        for (std::size_t row : comp) expected.push_back(data.y(row));
        std::sort(expected.begin(), expected.end());
        std::vector<double> got = train_y_seen[ell];
        std::sort(got.begin(), got.end());
        CHECK(got == expected);
    }
}

TEST_CASE("fold fits depend only on fold content, not row order") {
    // Permuting the dataset while transporting the partition must reproduce
    // the estimate bit for bit: training subsets are canonicalized and all
    // reductions are order-independent.
    const Dataset data = dgp_sample(80, 23);
    const auto dict = make_dictionary(Dictionary::Family::LowDim, true, 3);
    const GammaFactory gamma = [dict](const Dataset& train, std::uint64_t) {
        return fit_lasso_regression(dict, train, 0.02);
    };
    const AlphaFactory alpha = [dict](const Dataset& train, std::uint64_t) {
        return fit_riesz_lasso(dict, train, FunctionalSpec::ate(), 0.02, 50.0);
    };
    const FoldPartition part = partition_folds(data.size(), 4, 99);
    const DmlResult base =
        dml_estimate_with_partition(data, FunctionalSpec::ate(), gamma, alpha, part, 7);

    // Reverse the rows and transport the fold assignment through the
    // permutation: new row i is old row n-1-i.
    const std::size_t n = data.size();
    std::vector<std::size_t> reversed(n);
    for (std::size_t i = 0; i < n; ++i) reversed[i] = n - 1 - i;
    const Dataset permuted = data.subset(reversed);
    FoldPartition image;
    image.fold_count = part.fold_count;
    image.assignment.assign(n, 0);
    image.members.assign(part.fold_count, {});
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t fold = part.assignment[n - 1 - i];
        image.assignment[i] = fold;
        image.members[fold].push_back(i);
    }
    for (auto& rows : image.members) std::sort(rows.begin(), rows.end());

    const DmlResult moved =
        dml_estimate_with_partition(permuted, FunctionalSpec::ate(), gamma, alpha, image, 7);

    CHECK(moved.theta == base.theta);
    CHECK(moved.sigma == base.sigma);
    CHECK(moved.ci_low == base.ci_low);
    CHECK(moved.ci_high == base.ci_high);
}

TEST_CASE("factory seeds are distinct per fold and derived from the master seed") {
    const Dataset data = dgp_sample(40, 2);
    std::vector<std::uint64_t> seeds;
    const GammaFactory gamma = [&](const Dataset&, std::uint64_t seed) {
        seeds.push_back(seed);
        return std::make_shared<const ConstantPredictor>(0.0);
    };
    const FoldPartition part = partition_folds(data.size(), 4, Rng::substream(11, 0).next_u64());
    dml_estimate_with_partition(data, FunctionalSpec::ate(), gamma, constant_alpha(1.0, -1.0),
                                part, 11);
    REQUIRE(seeds.size() == 4);
    for (std::size_t ell = 0; ell < 4; ++ell)
        CHECK(seeds[ell] == Rng::substream(11, ell + 1).next_u64());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

    // dml_estimate derives its partition from substream(seed, 0).
    seeds.clear();
    const DmlResult direct =
        dml_estimate(data, FunctionalSpec::ate(), gamma, constant_alpha(1.0, -1.0), 4, 11);
    const DmlResult relayed = dml_estimate_with_partition(
        data, FunctionalSpec::ate(), constant_gamma(0.0), constant_alpha(1.0, -1.0), part, 11);
    CHECK(direct.theta == relayed.theta);
    CHECK(direct.sigma == relayed.sigma);
}

TEST_CASE("per-fold records track the evaluation split") {
    const Dataset data = dgp_sample(50, 31);
    const DmlResult res = dml_estimate(data, FunctionalSpec::ate(), constant_gamma(0.5),
                                       constant_alpha(2.0, -2.0), 5, 3);
    CHECK(res.fold_count == 5);
    REQUIRE(res.folds.size() == 5);
    std::size_t eval_total = 0;
    for (const FoldRecord& fold : res.folds) {
        CHECK(fold.train_count + fold.eval_count == res.n);
        eval_total += fold.eval_count;
    }
    CHECK(eval_total == res.n);
    for (std::size_t ell = 0; ell < 5; ++ell)
        CHECK(res.folds[ell].fold == static_cast<int>(ell) + 1);
}

TEST_CASE("nuisance-span evaluation matches the factory path") {
    const Dataset data = dgp_sample(70, 41);
    const auto dict = make_dictionary(Dictionary::Family::LowDim, true, 3);
    const FoldPartition part = partition_folds(data.size(), 5, Rng::substream(13, 0).next_u64());

    std::vector<std::shared_ptr<const Predictor>> gammas;
    std::vector<std::shared_ptr<const RieszEstimate>> alphas;
    for (std::size_t ell = 0; ell < 5; ++ell) {
        const Dataset train = data.subset_canonical(part.complement(ell));
        gammas.push_back(fit_lasso_regression(dict, train, 0.05));
        alphas.push_back(fit_riesz_lasso(dict, train, FunctionalSpec::ate(), 0.05, 50.0));
    }
    const DmlResult spans =
        dml_estimate_with_nuisances(data, FunctionalSpec::ate(), gammas, alphas, part);

    const GammaFactory gamma = [dict](const Dataset& train, std::uint64_t) {
        return fit_lasso_regression(dict, train, 0.05);
    };
    const AlphaFactory alpha = [dict](const Dataset& train, std::uint64_t) {
        return fit_riesz_lasso(dict, train, FunctionalSpec::ate(), 0.05, 50.0);
    };
    const DmlResult factories =
        dml_estimate_with_partition(data, FunctionalSpec::ate(), gamma, alpha, part, 13);

    CHECK(spans.theta == factories.theta);
    CHECK(spans.sigma == factories.sigma);
    CHECK(spans.ci_low == factories.ci_low);
}

TEST_CASE("factory failures surface as fold errors") {
    const Dataset data = dgp_sample(40, 2);
    const GammaFactory broken = [](const Dataset&, std::uint64_t) -> std::shared_ptr<const Predictor> {
        throw TrainingDivergedError("loss went non-finite");
    };
    try {
        dml_estimate(data, FunctionalSpec::ate(), broken, constant_alpha(1.0, -1.0), 4, 1);
        FAIL("expected FoldError");
    } catch (const FoldError& e) {
        CHECK(std::string(e.what()).find("fold 1") != std::string::npos);
        CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    }
}

TEST_CASE("oracle nuisances cover the synthetic truth at moderate n") {
    const Dataset data = dgp_sample(4000, 77);
    const DmlResult res = oracle_estimate(data, FunctionalSpec::ate(), *true_gamma_predictor(),
                                          *oracle_ate_riesz(), 0.05);
    CHECK(std::abs(res.theta - true_ate()) <
          4.0 * res.sigma / std::sqrt(static_cast<double>(res.n)));
    CHECK(res.ci_low < res.ci_high);
}

TEST_CASE("double robustness probes stay near the truth when one nuisance breaks") {
    const Dataset data = dgp_sample(20000, 3);
    const RobustnessProbe probe = double_robustness_probe(data, FunctionalSpec::ate(),
                                                          true_gamma_predictor(), oracle_ate_riesz());
    const double se_gamma = probe.gamma_corrupted.sigma / std::sqrt(20000.0);
    const double se_alpha = probe.alpha_corrupted.sigma / std::sqrt(20000.0);
    CHECK(std::abs(probe.gamma_corrupted.theta - true_ate()) < 5.0 * se_gamma);
    CHECK(std::abs(probe.alpha_corrupted.theta - true_ate()) < 5.0 * se_alpha);
}

TEST_CASE("localized estimation works end to end with oracle nuisances") {
    const Dataset data = dgp_sample(5000, 17);
    const double h = bandwidth_heuristic(0.5, data.v_column(), data.size());
    const LocalWeighting weighting =
        LocalWeighting::fit(data.v_column(), Kernel(KernelKind::Epanechnikov), 0.25, h);
    const FunctionalSpec spec = FunctionalSpec::cate(weighting);
    const auto alpha = oracle_cate_riesz(std::make_shared<const LocalWeighting>(weighting));
    const DmlResult res = oracle_estimate(data, spec, *true_gamma_predictor(), *alpha, 0.05);
    CHECK(std::abs(res.theta - true_cate(0.25)) <
          4.0 * res.sigma / std::sqrt(static_cast<double>(res.n)));
}
