#include <doctest.h>

#include "dml/dgp.hpp"
#include "dml/errors.hpp"
#include "dml/riesz.hpp"
#include "dml/rng.hpp"
#include "dml/stats.hpp"

#include "oracle_helpers.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace dml;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LocalWeighting fit_v_window(const Dataset& data, double center, double h) {
    return LocalWeighting::fit(data.v_column(), Kernel(KernelKind::Epanechnikov), center, h);
}

} // namespace

TEST_CASE("trim clamps symmetrically and validates the bound") {
    CHECK(trim(5.0, 2.0) == 2.0);
    CHECK(trim(-5.0, 2.0) == -2.0);
    CHECK(trim(1.5, 2.0) == 1.5);
    CHECK_THROWS_AS(trim(1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(trim(1.0, -3.0), ConfigError);
}

TEST_CASE("riesz moments match a per-basis direct computation") {
    const Dataset data = dgp_sample(150, 8);
    const auto dict = make_dictionary(Dictionary::Family::LowDim, true, 3);

    const FunctionalSpec ate = FunctionalSpec::ate();
    const Eigen::VectorXd fast = riesz_moments(*dict, data, ate);
    for (std::size_t j = 0; j < dict->size(); ++j) {
        std::vector<double> vals(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            Point hi = data.point(i);
            hi.d = 1.0;
            Point lo = data.point(i);
            lo.d = 0.0;
            vals[i] = dict->eval_basis(j, hi) - dict->eval_basis(j, lo);
        }
        CHECK(fast[static_cast<Eigen::Index>(j)] ==
              doctest::Approx(stable_mean(vals)).epsilon(1e-13).scale(1.0));
    }

    const FunctionalSpec cate = FunctionalSpec::cate(fit_v_window(data, 0.0, 0.25));
    const Eigen::VectorXd local = riesz_moments(*dict, data, cate);
    for (std::size_t j = 0; j < dict->size(); ++j) {
        std::vector<double> vals(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            Point hi = data.point(i);
            hi.d = 1.0;
            Point lo = data.point(i);
            lo.d = 0.0;
            vals[i] = cate.weighting()->weight(data.v(i)) *
                      (dict->eval_basis(j, hi) - dict->eval_basis(j, lo));
        }
        CHECK(local[static_cast<Eigen::Index>(j)] ==
              doctest::Approx(stable_mean(vals)).epsilon(1e-13).scale(1.0));
    }

    const FunctionalSpec deriv = FunctionalSpec::avg_deriv();
    const Eigen::VectorXd slopes = riesz_moments(*dict, data, deriv);
    for (std::size_t j = 0; j < dict->size(); ++j) {
        std::vector<double> vals(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            vals[i] = dict->expand_d_derivative(data.point(i))[j];
        CHECK(slopes[static_cast<Eigen::Index>(j)] ==
              doctest::Approx(stable_mean(vals)).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("riesz lasso reaches the prox-gradient objective on random instances") {
    Rng rng(2718);
    const auto dict = make_dictionary(Dictionary::Family::LowDim, true, 3);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t n = 40 + rng.next_below(60);
        const Dataset data = dgp_sample(n, 1000 + static_cast<std::uint64_t>(instance));
        const FunctionalSpec spec = FunctionalSpec::ate();
        const double lambda = rng.next_uniform(0.005, 0.2);

        RieszFitInfo info;
        const auto fit = fit_riesz_lasso(dict, data, spec, lambda, kInf, &info);

        Eigen::MatrixXd B = dict->expand_rows(data);
        Eigen::MatrixXd G = (B.transpose() * B) / static_cast<double>(data.size());
        G.diagonal().array() += 1e-10;
        const Eigen::VectorXd M = riesz_moments(*dict, data, spec);
        const double reference = oracle::prox_riesz_objective(G, M, lambda);

        CHECK(info.converged);
        CHECK(info.objective == doctest::Approx(reference).epsilon(1e-8).scale(1.0));
        CHECK(info.kkt_residual < 1e-7);
        CHECK(fit->coefficients().size() == static_cast<Eigen::Index>(dict->size()));
    }
}

TEST_CASE("riesz objective trace is non-increasing") {
    const Dataset data = dgp_sample(200, 77);
    const auto dict = make_dictionary(Dictionary::Family::LowDim, true, 3);
    RieszFitInfo info;
    fit_riesz_lasso(dict, data, FunctionalSpec::ate(), 0.01, kInf, &info);
    REQUIRE(!info.objective_trace.empty());
    for (std::size_t k = 1; k < info.objective_trace.size(); ++k)
        CHECK(info.objective_trace[k] <= info.objective_trace[k - 1] + 1e-12);
}

TEST_CASE("default riesz penalty follows its closed form") {
    Eigen::VectorXd moments(3);
    moments << 0.5, -2.0, 1.0;
    CHECK(default_riesz_lambda(moments, 10, 100) ==
          doctest::Approx(0.5 * 2.0 * std::sqrt(std::log(10.0) / 100.0)).epsilon(1e-15));
}

TEST_CASE("the fitted representer balances in-sample moments at lambda zero") {
    // With no penalty the first-order conditions say G rho = M, i.e. the
    // representer reproduces every basis moment as a weighted average.
    const Dataset data = dgp_sample(300, 4);
    const auto dict = make_dictionary(Dictionary::Family::LowDim, true, 3);
    const FunctionalSpec spec = FunctionalSpec::ate();
    const auto fit = fit_riesz_lasso(dict, data, spec, 0.0, kInf);
    const Eigen::VectorXd M = riesz_moments(*dict, data, spec);

    Eigen::MatrixXd B = dict->expand_rows(data);
    const Eigen::VectorXd fitted = B * fit->coefficients();
    for (std::size_t j = 0; j < dict->size(); ++j) {
        double balance = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i)
            balance += fitted[static_cast<Eigen::Index>(i)] * B(static_cast<Eigen::Index>(i),
                                                                static_cast<Eigen::Index>(j));
        balance /= static_cast<double>(data.size());
        CHECK(balance == doctest::Approx(M[static_cast<Eigen::Index>(j)]).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("oracle contrast representer respects overlap and localization") {
    const Dataset data = dgp_sample(50, 12);
    const auto weighting = std::make_shared<const LocalWeighting>(fit_v_window(data, 0.0, 0.3));

    const CateOracleRiesz global([](const Point& w) { return true_propensity(w); }, nullptr, 200.0);
    const CateOracleRiesz local([](const Point& w) { return true_propensity(w); }, weighting,
                                200.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Point w = data.point(i);
        const double pi = true_propensity(w);
        const double expected = w.d != 0.0 ? 1.0 / pi : -1.0 / (1.0 - pi);
        CHECK(global.raw(w) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(local.raw(w) == doctest::Approx(weighting->weight(w.v) * expected).epsilon(1e-14));
    }

    const CateOracleRiesz strict([](const Point&) { return 0.05; }, nullptr, 10.0, 0.1);
    const std::vector<double> xrow{0.0, 0.0, 0.0};
    const Point w{1.0, 0.0, xrow};
    CHECK_THROWS_AS(strict.raw(w), OverlapViolationError);
}

TEST_CASE("localized representer is the kernel weight times the global one") {
    const Dataset data = dgp_sample(80, 3);
    const auto weighting = std::make_shared<const LocalWeighting>(fit_v_window(data, 0.1, 0.2));
    const auto global = std::make_shared<const FunctionRiesz>(
        [](const Point& w) { return 2.0 * w.d - 1.0; });
    const LocalizedRiesz localized(weighting, global, kInf);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Point w = data.point(i);
        CHECK(localized.raw(w) == weighting->weight(w.v) * (2.0 * w.d - 1.0));
    }
    CHECK(localized.method() == "localized-function");
}

TEST_CASE("trimming caps the evaluated representer but not the raw one") {
    const FunctionRiesz spiky([](const Point&) { return 400.0; }, 50.0);
    const std::vector<double> xrow{0.0};
    const Point w{0.0, 0.0, xrow};
    CHECK(spiky.raw(w) == 400.0);
    CHECK(spiky.evaluate(w) == 50.0);
}

TEST_CASE("strategy routing localizes or refits as requested") {
    const Dataset data = dgp_sample(120, 9);
    const auto dict = make_dictionary(Dictionary::Family::LowDim, true, 3);
    const FunctionalSpec spec = FunctionalSpec::cate(fit_v_window(data, 0.0, 0.25));

    const auto localized =
        fit_riesz_for_spec(dict, data, spec, RieszOptions{RieszStrategy::LocalizeGlobal, -1.0, 50.0});
    const auto direct =
        fit_riesz_for_spec(dict, data, spec, RieszOptions{RieszStrategy::DirectLocal, -1.0, 50.0});
    CHECK(localized->method() == "localized-lasso-qp");
    CHECK(direct->method() == "lasso-qp");
    CHECK(localized->trim_bound() == doctest::Approx(50.0 / 0.25));
    CHECK(direct->trim_bound() == doctest::Approx(50.0 / 0.25));

    // The localized wrapper multiplies the global fit by the kernel weight.
    const auto global_only = fit_riesz_lasso(dict, data, FunctionalSpec::ate(), -1.0, 50.0);
    for (std::size_t i = 0; i < 10; ++i) {
        const Point w = data.point(i);
        CHECK(localized->raw(w) ==
              doctest::Approx(spec.weighting()->weight(w.v) * global_only->raw(w)).epsilon(1e-12));
    }

    const auto global_fit = fit_riesz_for_spec(dict, data, FunctionalSpec::ate(),
                                               RieszOptions{RieszStrategy::LocalizeGlobal, -1.0, 75.0});
    CHECK(global_fit->method() == "lasso-qp");
    CHECK(global_fit->trim_bound() == 75.0);
}

TEST_CASE("oracle representers for the synthetic design satisfy their bounds") {
    const Dataset data = dgp_sample(2000, 10);
    const auto ate_riesz = oracle_ate_riesz();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double value = ate_riesz->raw(data.point(i));
        CHECK(std::abs(value) < 100.0);
        CHECK(ate_riesz->evaluate(data.point(i)) == value);
    }
    const auto weighting = std::make_shared<const LocalWeighting>(fit_v_window(data, 0.0, 0.1));
    const auto cate_riesz = oracle_cate_riesz(weighting);
    CHECK(cate_riesz->trim_bound() == doctest::Approx(50.0 / 0.1));
}
