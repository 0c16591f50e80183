#ifndef DML_MONTECARLO_HPP
#define DML_MONTECARLO_HPP

#include "dml/dictionary.hpp"
#include "dml/forest.hpp"
#include "dml/kernel.hpp"
#include "dml/mlp.hpp"
#include "dml/riesz.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dml {

enum class LearnerKind { Lasso, Forest, Mlp, Oracle };
enum class Regime { LowDim, HighDim };

std::string_view learner_name(LearnerKind kind);
LearnerKind learner_from_name(std::string_view name);
std::string_view regime_name(Regime regime);
Regime regime_from_name(std::string_view name);
Dictionary::Family regime_family(Regime regime);

/// Coverage study over the synthetic benchmark population. The default grid
/// crosses three evaluation points with three bandwidth scalings; the global
/// variant replaces the grid with the single average contrast.
struct McConfig {
    LearnerKind learner = LearnerKind::Lasso;
    Regime regime = Regime::LowDim;
    bool global_target = false;
    std::vector<double> v_grid{-0.25, 0.0, 0.25};
    std::vector<double> ch_grid{0.25, 0.5, 1.0};
    std::size_t replications = 500;
    std::size_t n = 100;
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    KernelKind kernel = KernelKind::Gaussian;
    double lasso_lambda = -1.0; // negative selects the per-fit default
    double riesz_lambda = 0.02;
    RieszStrategy strategy = RieszStrategy::LocalizeGlobal;
    double trim_scale = 3.0;  // censoring bound: trim_scale globally, / h localized
    double oracle_trim = 100.0;
    ForestConfig forest;
    MlpConfig mlp;
    std::function<void(std::size_t done, std::size_t total)> progress;

    void validate() const;
};

struct RepOutcome {
    bool ok = false;
    double theta = 0.0;
    double sigma = 0.0;
    std::string error;
};

struct CoverageCell {
    double v_star = 0.0; // NaN for the global target
    double truth = 0.0;
    double c_h = 0.0; // NaN for the global target
    std::size_t requested = 0;
    std::size_t completed = 0;
    std::size_t failures = 0;
    double avg_estimate = 0.0;
    double avg_se = 0.0;
    double coverage80 = 0.0; // percent over completed replications
    double coverage95 = 0.0;
    double mc_se80 = 0.0; // binomial standard error, percentage points
    double mc_se95 = 0.0;
    bool flagged = false; // more than one percent of replications failed
};

struct McResult {
    std::string learner;
    std::string regime;
    std::size_t n = 0;
    std::size_t replications = 0;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::size_t total_failures = 0;
    std::vector<CoverageCell> cells;            // v-major, then bandwidth scaling
    std::vector<std::vector<RepOutcome>> draws; // [cell][replication]

    bool any_flagged() const;
};

McResult run_monte_carlo(const McConfig& config);

/// Full-precision machine form; parse_coverage_csv inverts it exactly apart
/// from the per-replication draws.
std::string coverage_table_csv(const McResult& result);
McResult parse_coverage_csv(const std::string& text);

/// Rounded presentation table plus failure footnotes.
std::string coverage_table_markdown(const McResult& result);

/// How the moment scale of the localized contrast grows as the window
/// shrinks: oracle nuisances on one synthetic sample, a log-log slope over
/// the bandwidth grid (population value -1/2).
struct ScalingProbe {
    std::vector<double> bandwidths;
    std::vector<double> sigmas;
    double slope = 0.0;
};

ScalingProbe sigma_h_scaling_probe(std::span<const double> h_grid, std::size_t n, double v_star,
                                   KernelKind kernel, std::uint64_t seed,
                                   double trim_scale = 50.0);

} // namespace dml

#endif
