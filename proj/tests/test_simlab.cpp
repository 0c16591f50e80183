#include <doctest.h>

#include "dml/bounds.hpp"
#include "dml/dgp.hpp"
#include "dml/montecarlo.hpp"
#include "dml/stats.hpp"

#include "oracle_helpers.hpp"

#include <cmath>
#include <vector>

using namespace dml;

TEST_CASE("synthetic population obeys its construction") {
    const Dataset data = dgp_sample(200000, 606);
    REQUIRE(data.size() == 200000);
    REQUIRE(data.x_dim() == 3);
    REQUIRE(data.has_v());

    std::size_t treated = 0;
    double max_abs_v = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Point w = data.point(i);
        max_abs_v = std::max(max_abs_v, std::abs(w.v));
        CHECK((w.d == 0.0 || w.d == 1.0));
        if (w.d == 1.0) ++treated;
        if (w.d == 0.0) CHECK(data.y(i) == 0.0);
        const double pi = true_propensity(w);
        CHECK(pi > 0.29);
        CHECK(pi < 0.99);
    }
    CHECK(max_abs_v < 0.5);
    // E[pi] is around 0.8 in this design.
    const double share = static_cast<double>(treated) / 200000.0;
    CHECK(share > 0.75);
    CHECK(share < 0.85);
}

TEST_CASE("population regressions match their closed forms by simulation") {
    const Dataset data = dgp_sample(1000000, 17);

    // E[X1 | V] = 1 + 2V: the OLS slope of X1 on V converges to 2.
    double svv = 0.0, svx = 0.0, v_mean = 0.0, x_mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        v_mean += data.v(i);
        x_mean += data.x(i)[0];
    }
    v_mean /= static_cast<double>(data.size());
    x_mean /= static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        svv += (data.v(i) - v_mean) * (data.v(i) - v_mean);
        svx += (data.v(i) - v_mean) * (data.x(i)[0] - x_mean);
    }
    CHECK(svx / svv == doctest::Approx(2.0).epsilon(0.01));

    // Treated outcomes center on gamma0 with noise variance 1/16.
    std::vector<double> sq_err;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.d(i) == 1.0) {
            const double noise = data.y(i) - true_gamma(data.point(i));
            sq_err.push_back(noise * noise);
        }
    }
    CHECK(stable_mean(sq_err) == doctest::Approx(1.0 / 16.0).epsilon(0.01));
}

TEST_CASE("contrast curve has the documented closed form and average") {
    CHECK(true_cate(0.0) == 0.0);
    CHECK(true_cate(0.25) == doctest::Approx(0.25 * 1.5 * 1.5 * 0.75 * 0.75).epsilon(1e-15));
    CHECK(true_cate(-0.25) == doctest::Approx(-0.25 * 0.25 * 1.5625).epsilon(1e-12));
    CHECK(true_ate() == doctest::Approx(7.0 / 60.0).epsilon(1e-15));
    const double quad =
        oracle::simpson([](double v) { return true_cate(v); }, -0.5, 0.5, 40000);
    CHECK(quad == doctest::Approx(true_ate()).epsilon(1e-10));

    // Kernel-window average of the contrast converges to the local value.
    const Dataset data = dgp_sample(400000, 4);
    std::vector<double> treated_near, control_near;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (std::abs(data.v(i) - 0.25) < 0.01) {
            (data.d(i) == 1.0 ? treated_near : control_near).push_back(data.y(i));
        }
    }
    REQUIRE(treated_near.size() > 100);
    REQUIRE(control_near.size() > 100);
    const double contrast = stable_mean(treated_near) - stable_mean(control_near);
    CHECK(contrast == doctest::Approx(true_cate(0.25)).epsilon(0.08));
}

TEST_CASE("samples are deterministic and rows are draw-aligned") {
    const Dataset a = dgp_sample(50, 9);
    const Dataset b = dgp_sample(50, 9);
    const Dataset c = dgp_sample(50, 10);
    bool all_equal = true;
    bool any_differs = false;
    for (std::size_t i = 0; i < 50; ++i) {
        all_equal = all_equal && a.y(i) == b.y(i) && a.d(i) == b.d(i) && a.v(i) == b.v(i) &&
                    a.x(i)[0] == b.x(i)[0] && a.x(i)[1] == b.x(i)[1] && a.x(i)[2] == b.x(i)[2];
        any_differs = any_differs || a.v(i) != c.v(i);
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("learner and regime names round trip") {
    for (LearnerKind kind : {LearnerKind::Lasso, LearnerKind::Forest, LearnerKind::Mlp,
                             LearnerKind::Oracle}) {
        CHECK(learner_from_name(learner_name(kind)) == kind);
    }
    CHECK(learner_from_name("forest") == LearnerKind::Forest);
    CHECK(learner_from_name("mlp") == LearnerKind::Mlp);
    CHECK(regime_from_name("low") == Regime::LowDim);
    CHECK(regime_from_name("high") == Regime::HighDim);
    CHECK(regime_family(Regime::HighDim) == Dictionary::Family::HighDim);
}

TEST_CASE("oracle coverage study is fast, calibrated, and thread-invariant") {
    McConfig config;
    config.learner = LearnerKind::Oracle;
    config.v_grid = {0.0, 0.25};
    config.ch_grid = {0.5};
    config.replications = 300;
    config.n = 400;
    config.seed = 21;
    config.threads = 1;

    const McResult serial = run_monte_carlo(config);
    config.threads = 4;
    const McResult parallel = run_monte_carlo(config);

    REQUIRE(serial.cells.size() == 2);
    REQUIRE(parallel.cells.size() == 2);
    for (std::size_t cell = 0; cell < serial.cells.size(); ++cell) {
        CHECK(serial.cells[cell].avg_estimate == parallel.cells[cell].avg_estimate);
        CHECK(serial.cells[cell].coverage95 == parallel.cells[cell].coverage95);
        CHECK(serial.cells[cell].truth ==
              doctest::Approx(true_cate(serial.cells[cell].v_star)).epsilon(1e-15));
        CHECK(serial.cells[cell].completed + serial.cells[cell].failures ==
              serial.cells[cell].requested);
        // Oracle nuisances should cover close to nominal even at n=400.
        CHECK(serial.cells[cell].coverage95 > 85.0);
        CHECK(serial.cells[cell].coverage80 > 65.0);
    }
}

TEST_CASE("global target reduces the grid to one average-contrast cell") {
    McConfig config;
    config.learner = LearnerKind::Oracle;
    config.global_target = true;
    config.replications = 200;
    config.n = 500;
    config.seed = 3;

    const McResult res = run_monte_carlo(config);
    REQUIRE(res.cells.size() == 1);
    CHECK(std::isnan(res.cells[0].v_star));
    CHECK(std::isnan(res.cells[0].c_h));
    CHECK(res.cells[0].truth == doctest::Approx(true_ate()).epsilon(1e-15));
    CHECK(res.cells[0].coverage95 > 88.0);
    CHECK(std::abs(res.cells[0].avg_estimate - true_ate()) < 0.05);
}

TEST_CASE("learner study runs end to end on a small budget") {
    McConfig config;
    config.learner = LearnerKind::Lasso;
    config.regime = Regime::LowDim;
    config.v_grid = {0.25};
    config.ch_grid = {0.5};
    config.replications = 20;
    config.n = 100;
    config.folds = 5;
    config.seed = 12;

    const McResult res = run_monte_carlo(config);
    REQUIRE(res.cells.size() == 1);
    const CoverageCell& cell = res.cells[0];
    CHECK(cell.requested == 20);
    CHECK(cell.completed >= 18);
    CHECK(std::isfinite(cell.avg_estimate));
    CHECK(std::isfinite(cell.avg_se));
    CHECK(cell.coverage95 >= 0.0);
    CHECK(cell.coverage95 <= 100.0);
    REQUIRE(res.draws.size() == 1);
    CHECK(res.draws[0].size() == 20);

    // Same seed, same numbers.
    const McResult again = run_monte_carlo(config);
    CHECK(again.cells[0].avg_estimate == cell.avg_estimate);
    CHECK(again.cells[0].coverage80 == cell.coverage80);
}

TEST_CASE("coverage tables round trip through csv") {
    McConfig config;
    config.learner = LearnerKind::Oracle;
    config.v_grid = {0.0};
    config.ch_grid = {0.25, 0.5};
    config.replications = 50;
    config.n = 200;
    config.seed = 5;

    const McResult res = run_monte_carlo(config);
    const std::string csv = coverage_table_csv(res);
    const McResult back = parse_coverage_csv(csv);

    CHECK(back.learner == res.learner);
    CHECK(back.regime == res.regime);
    CHECK(back.n == res.n);
    CHECK(back.replications == res.replications);
    CHECK(back.folds == res.folds);
    CHECK(back.seed == res.seed);
    REQUIRE(back.cells.size() == res.cells.size());
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
        CHECK(back.cells[i].v_star == res.cells[i].v_star);
        CHECK(back.cells[i].truth == res.cells[i].truth);
        CHECK(back.cells[i].c_h == res.cells[i].c_h);
        CHECK(back.cells[i].completed == res.cells[i].completed);
        CHECK(back.cells[i].failures == res.cells[i].failures);
        CHECK(back.cells[i].avg_estimate == res.cells[i].avg_estimate);
        CHECK(back.cells[i].avg_se == res.cells[i].avg_se);
        CHECK(back.cells[i].coverage80 == res.cells[i].coverage80);
        CHECK(back.cells[i].coverage95 == res.cells[i].coverage95);
        CHECK(back.cells[i].mc_se80 == res.cells[i].mc_se80);
        CHECK(back.cells[i].mc_se95 == res.cells[i].mc_se95);
        CHECK(back.cells[i].flagged == res.cells[i].flagged);
    }

    const std::string md = coverage_table_markdown(res);
    CHECK(md.find("| v ") != std::string::npos);
    CHECK(md.find("80% cover") != std::string::npos);
    CHECK(md.find("mc s.e. 95") != std::string::npos);
}

TEST_CASE("coverage parser rejects malformed tables") {
    CHECK_THROWS(parse_coverage_csv("not,a,table\n1,2,3\n"));
    CHECK_THROWS(parse_coverage_csv(""));
}

TEST_CASE("binomial monte carlo standard errors match the formula") {
    McConfig config;
    config.learner = LearnerKind::Oracle;
    config.global_target = true;
    config.replications = 100;
    config.n = 300;
    config.seed = 8;
    const McResult res = run_monte_carlo(config);
    const CoverageCell& cell = res.cells[0];
    const double p95 = cell.coverage95 / 100.0;
    const double expected =
        100.0 * std::sqrt(p95 * (1.0 - p95) / static_cast<double>(cell.completed));
    CHECK(cell.mc_se95 == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sigma_h scaling probe lands near the population exponent") {
    const std::vector<double> grid{0.4, 0.2, 0.1};
    const ScalingProbe probe =
        sigma_h_scaling_probe(grid, 20000, 0.0, KernelKind::Epanechnikov, 33);
    REQUIRE(probe.bandwidths.size() == 3);
    REQUIRE(probe.sigmas.size() == 3);
    CHECK(probe.sigmas[0] < probe.sigmas[2]);
    CHECK(probe.slope > -0.8);
    CHECK(probe.slope < -0.2);
    CHECK(probe.slope == doctest::Approx(log_log_slope(probe.bandwidths, probe.sigmas)).epsilon(1e-12));
}
