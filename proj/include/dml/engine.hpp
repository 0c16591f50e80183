#ifndef DML_ENGINE_HPP
#define DML_ENGINE_HPP

#include "dml/dataset.hpp"
#include "dml/folds.hpp"
#include "dml/functional.hpp"
#include "dml/predictor.hpp"
#include "dml/riesz.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dml {

using GammaFactory =
    std::function<std::shared_ptr<const Predictor>(const Dataset& train, std::uint64_t seed)>;
using AlphaFactory =
    std::function<std::shared_ptr<const RieszEstimate>(const Dataset& train, std::uint64_t seed)>;

struct FoldRecord {
    int fold = 0; // 1-based
    std::size_t train_count = 0;
    std::size_t eval_count = 0;
    double mean_m = 0.0;
    double mean_correction = 0.0;
    double gamma_fingerprint = 0.0; // stable mean of regression predictions on held-out rows
    double alpha_fingerprint = 0.0; // stable mean of trimmed weights on held-out rows
};

struct DmlResult {
    double theta = 0.0;
    double sigma = 0.0;
    double level = 0.0;
    double critical = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
    std::size_t fold_count = 0;
    std::vector<double> m_values;    // original row order
    std::vector<double> corrections; // original row order
    std::vector<double> psi;         // original row order
    std::vector<FoldRecord> folds;
};

/// Two-sided normal critical value for a miscoverage level in (0, 1).
double critical_value(double level);

/// Cross-fitted estimate: the fold partition comes from substream(seed, 0)
/// and fold ell trains with substream(seed, ell + 1).
DmlResult dml_estimate(const Dataset& data, const FunctionalSpec& spec, const GammaFactory& gamma,
                       const AlphaFactory& alpha, std::size_t folds, std::uint64_t seed,
                       double level = 0.05);

/// Same, with a caller-supplied partition. Training sets are canonicalized,
/// so the fit depends only on which rows a fold contains.
DmlResult dml_estimate_with_partition(const Dataset& data, const FunctionalSpec& spec,
                                      const GammaFactory& gamma, const AlphaFactory& alpha,
                                      const FoldPartition& partition, std::uint64_t seed,
                                      double level = 0.05);

/// Evaluation half of the cross-fit: plug already-fitted per-fold nuisances
/// into the moment, fold ell scoring the rows in partition.members[ell].
DmlResult dml_estimate_with_nuisances(const Dataset& data, const FunctionalSpec& spec,
                                      std::span<const std::shared_ptr<const Predictor>> gammas,
                                      std::span<const std::shared_ptr<const RieszEstimate>> alphas,
                                      const FoldPartition& partition, double level = 0.05);

/// Plug in fixed nuisances with no sample splitting (true functions or probes).
DmlResult oracle_estimate(const Dataset& data, const FunctionalSpec& spec, const Predictor& gamma,
                          const RieszEstimate& alpha, double level = 0.05);

struct RobustnessProbe {
    DmlResult gamma_corrupted; // perturbed regression, true representer
    DmlResult alpha_corrupted; // true regression, perturbed representer
};

/// Perturbs one nuisance at a time (gamma by +d/2, alpha by +1/2) while the
/// other stays at its true value; the moment stays consistent either way.
RobustnessProbe double_robustness_probe(const Dataset& data, const FunctionalSpec& spec,
                                        std::shared_ptr<const Predictor> gamma0,
                                        std::shared_ptr<const RieszEstimate> alpha0,
                                        double level = 0.05);

} // namespace dml

#endif
