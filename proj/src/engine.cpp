#include "dml/engine.hpp"

#include "dml/errors.hpp"
#include "dml/rng.hpp"
#include "dml/stats.hpp"

#include <cmath>
#include <utility>

namespace dml {

double critical_value(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("miscoverage level must lie in (0, 1)");
    return normal_quantile(1.0 - level / 2.0);
}

namespace {

DmlResult finalize(DmlResult result, double level) {
    const std::size_t n = result.m_values.size();
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = result.m_values[i] + result.corrections[i];

    const double theta = stable_mean(scores);
    result.psi.resize(n);
    std::vector<double> psi_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.psi[i] = scores[i] - theta;
        psi_sq[i] = result.psi[i] * result.psi[i];
    }
    const double sigma_sq = stable_mean(psi_sq);
    if (!(sigma_sq > 0.0))
        throw UndefinedScaleError("variance estimate is zero; interval is undefined");

    result.theta = theta;
    result.sigma = std::sqrt(sigma_sq);
    result.level = level;
    result.critical = critical_value(level);
    const double half_width = result.critical * result.sigma / std::sqrt(static_cast<double>(n));
    result.ci_low = theta - half_width;
    result.ci_high = theta + half_width;
    result.n = n;
    return result;
}

} // namespace

DmlResult dml_estimate_with_nuisances(const Dataset& data, const FunctionalSpec& spec,
                                      std::span<const std::shared_ptr<const Predictor>> gammas,
                                      std::span<const std::shared_ptr<const RieszEstimate>> alphas,
                                      const FoldPartition& partition, double level) {
    const std::size_t n = data.size();
    if (partition.assignment.size() != n)
        throw PartitionError("partition does not match the sample size");
    if (gammas.size() != partition.fold_count || alphas.size() != partition.fold_count)
        throw ConfigError("need one fitted nuisance pair per fold");

    DmlResult result;
    result.fold_count = partition.fold_count;
    result.m_values.assign(n, 0.0);
    result.corrections.assign(n, 0.0);
    result.folds.reserve(partition.fold_count);

    for (std::size_t ell = 0; ell < partition.fold_count; ++ell) {
        try {
            const auto& gamma_hat = gammas[ell];
            const auto& alpha_hat = alphas[ell];
            if (!gamma_hat || !alpha_hat) throw ConfigError("null nuisance estimate");

            const std::vector<std::size_t>& eval_rows = partition.members[ell];
            std::vector<double> fold_m(eval_rows.size());
            std::vector<double> fold_corr(eval_rows.size());
            std::vector<double> fold_gamma(eval_rows.size());
            std::vector<double> fold_alpha(eval_rows.size());

            for (std::size_t k = 0; k < eval_rows.size(); ++k) {
                const std::size_t i = eval_rows[k];
                const Point w = data.point(i);
                const MomentValue value = moment_psi(w, data.y(i), 0.0, *gamma_hat, *alpha_hat, spec);
                result.m_values[i] = value.m_part;
                result.corrections[i] = value.correction_part;
                fold_m[k] = value.m_part;
                fold_corr[k] = value.correction_part;
                fold_gamma[k] = gamma_hat->predict(w);
                fold_alpha[k] = alpha_hat->evaluate(w);
            }

            FoldRecord record;
            record.fold = static_cast<int>(ell) + 1;
            record.train_count = n - eval_rows.size();
            record.eval_count = eval_rows.size();
            record.mean_m = stable_mean(fold_m);
            record.mean_correction = stable_mean(fold_corr);
            record.gamma_fingerprint = stable_mean(fold_gamma);
            record.alpha_fingerprint = stable_mean(fold_alpha);
            result.folds.push_back(record);
        } catch (const FoldError&) {
            throw;
        } catch (const std::exception& e) {
            throw FoldError(static_cast<int>(ell) + 1, e.what());
        }
    }

    return finalize(std::move(result), level);
}

DmlResult dml_estimate_with_partition(const Dataset& data, const FunctionalSpec& spec,
                                      const GammaFactory& gamma, const AlphaFactory& alpha,
                                      const FoldPartition& partition, std::uint64_t seed,
                                      double level) {
    if (!gamma || !alpha) throw ConfigError("both nuisance factories are required");
    if (partition.assignment.size() != data.size())
        throw PartitionError("partition does not match the sample size");

    std::vector<std::shared_ptr<const Predictor>> gammas(partition.fold_count);
    std::vector<std::shared_ptr<const RieszEstimate>> alphas(partition.fold_count);
    for (std::size_t ell = 0; ell < partition.fold_count; ++ell) {
        try {
            const Dataset train = data.subset_canonical(partition.complement(ell));
            const std::uint64_t fold_seed = Rng::substream(seed, ell + 1).next_u64();
            gammas[ell] = gamma(train, fold_seed);
            alphas[ell] = alpha(train, fold_seed);
            if (!gammas[ell] || !alphas[ell])
                throw ConfigError("nuisance factory returned a null estimate");
        } catch (const FoldError&) {
            throw;
        } catch (const std::exception& e) {
            throw FoldError(static_cast<int>(ell) + 1, e.what());
        }
    }
    return dml_estimate_with_nuisances(data, spec, gammas, alphas, partition, level);
}

DmlResult dml_estimate(const Dataset& data, const FunctionalSpec& spec, const GammaFactory& gamma,
                       const AlphaFactory& alpha, std::size_t folds, std::uint64_t seed,
                       double level) {
    const std::uint64_t partition_seed = Rng::substream(seed, 0).next_u64();
    const FoldPartition partition = partition_folds(data.size(), folds, partition_seed);
    return dml_estimate_with_partition(data, spec, gamma, alpha, partition, seed, level);
}

DmlResult oracle_estimate(const Dataset& data, const FunctionalSpec& spec, const Predictor& gamma,
                          const RieszEstimate& alpha, double level) {
    const std::size_t n = data.size();
    if (n == 0) throw ConfigError("sample is empty");

    DmlResult result;
    result.fold_count = 0;
    result.m_values.assign(n, 0.0);
    result.corrections.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        const MomentValue value =
            moment_psi(data.point(i), data.y(i), 0.0, gamma, alpha, spec);
        result.m_values[i] = value.m_part;
        result.corrections[i] = value.correction_part;
    }
    return finalize(std::move(result), level);
}

RobustnessProbe double_robustness_probe(const Dataset& data, const FunctionalSpec& spec,
                                        std::shared_ptr<const Predictor> gamma0,
                                        std::shared_ptr<const RieszEstimate> alpha0,
                                        double level) {
    if (!gamma0 || !alpha0) throw ConfigError("both true nuisances are required");

    const FunctionPredictor bad_gamma(
        [gamma0](const Point& w) { return gamma0->predict(w) + 0.5 * w.d; },
        [gamma0](const Point& w) { return gamma0->d_derivative(w) + 0.5; });
    const FunctionRiesz bad_alpha([alpha0](const Point& w) { return alpha0->raw(w) + 0.5; });

    RobustnessProbe probe;
    probe.gamma_corrupted = oracle_estimate(data, spec, bad_gamma, *alpha0, level);
    probe.alpha_corrupted = oracle_estimate(data, spec, *gamma0, bad_alpha, level);
    return probe;
}

} // namespace dml
