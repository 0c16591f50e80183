#include "dml/montecarlo.hpp"

#include "dml/bounds.hpp"
#include "dml/dgp.hpp"
#include "dml/engine.hpp"
#include "dml/errors.hpp"
#include "dml/lasso.hpp"
#include "dml/learners.hpp"
#include "dml/parallel.hpp"
#include "dml/rng.hpp"
#include "dml/stats.hpp"
#include "dml/weighting.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

namespace dml {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct CellSpec {
    double v_star = kNan;
    double c_h = kNan;
    double truth = 0.0;
};

std::vector<CellSpec> enumerate_cells(const McConfig& cfg) {
    std::vector<CellSpec> cells;
    if (cfg.global_target) {
        cells.push_back({kNan, kNan, true_ate()});
        return cells;
    }
    for (double v : cfg.v_grid)
        for (double ch : cfg.ch_grid) cells.push_back({v, ch, true_cate(v)});
    return cells;
}

using GammaFits = std::vector<std::shared_ptr<const Predictor>>;
using AlphaFits = std::vector<std::shared_ptr<const RieszEstimate>>;

std::shared_ptr<const Predictor> fit_gamma(const McConfig& cfg,
                                           const std::shared_ptr<const Dictionary>& dict,
                                           const Dataset& train, std::uint64_t seed) {
    switch (cfg.learner) {
    case LearnerKind::Lasso:
        return fit_lasso_regression(dict, train, cfg.lasso_lambda);
    case LearnerKind::Forest:
        return fit_forest_regression(dictionary_features(dict), train, cfg.forest, seed);
    case LearnerKind::Mlp:
        return fit_mlp_regression(dictionary_features(dict), train, cfg.mlp, seed);
    case LearnerKind::Oracle:
        return true_gamma_predictor();
    }
    throw ConfigError("unknown learner");
}

void fail_all(std::vector<std::vector<RepOutcome>>& draws, std::size_t rep, const char* what) {
    for (auto& cell : draws) {
        cell[rep].ok = false;
        cell[rep].error = what;
    }
}

void run_rep(std::size_t rep, const McConfig& cfg, const std::shared_ptr<const Dictionary>& dict,
             const std::vector<CellSpec>& cells, std::vector<std::vector<RepOutcome>>& draws) {
    const std::uint64_t rep_seed = Rng::substream(cfg.seed, rep).next_u64();
    const std::uint64_t data_seed = Rng::substream(rep_seed, 0).next_u64();
    const std::uint64_t est_seed = Rng::substream(rep_seed, 1).next_u64();

    std::optional<Dataset> data;
    try {
        data.emplace(dgp_sample(cfg.n, data_seed));
    } catch (const std::exception& e) {
        fail_all(draws, rep, e.what());
        return;
    }

    if (cfg.learner == LearnerKind::Oracle) {
        const auto gamma0 = true_gamma_predictor();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            RepOutcome& out = draws[c][rep];
            try {
                DmlResult res = [&] {
                    if (cfg.global_target)
                        return oracle_estimate(*data, FunctionalSpec::ate(), *gamma0,
                                               *oracle_ate_riesz(cfg.oracle_trim));
                    const double h = bandwidth_heuristic(cells[c].c_h, data->v_column(), cfg.n);
                    LocalWeighting weighting = LocalWeighting::fit(
                        data->v_column(), Kernel(cfg.kernel), cells[c].v_star, h);
                    auto wsp = std::make_shared<const LocalWeighting>(weighting);
                    return oracle_estimate(*data, FunctionalSpec::cate(weighting), *gamma0,
                                           *oracle_cate_riesz(wsp, cfg.trim_scale));
                }();
                out.ok = true;
                out.theta = res.theta;
                out.sigma = res.sigma;
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
        }
        return;
    }

    // Shared per-replication work: the fold partition, the regression fits,
    // and (under the localize-global strategy) the global representer fits
    // are identical across cells, so they are fitted once.
    std::optional<FoldPartition> partition;
    std::vector<Dataset> trains;
    GammaFits gammas;
    AlphaFits global_alphas;
    try {
        partition.emplace(
            partition_folds(cfg.n, cfg.folds, Rng::substream(est_seed, 0).next_u64()));
        for (std::size_t ell = 0; ell < cfg.folds; ++ell) {
            trains.push_back(data->subset_canonical(partition->complement(ell)));
            const std::uint64_t fold_seed = Rng::substream(est_seed, ell + 1).next_u64();
            gammas.push_back(fit_gamma(cfg, dict, trains.back(), fold_seed));
            const bool shared_alpha =
                cfg.global_target || cfg.strategy == RieszStrategy::LocalizeGlobal;
            if (shared_alpha)
                global_alphas.push_back(fit_riesz_lasso(dict, trains.back(),
                                                        FunctionalSpec::ate(), cfg.riesz_lambda,
                                                        cfg.trim_scale));
        }
    } catch (const std::exception& e) {
        fail_all(draws, rep, e.what());
        return;
    }

    for (std::size_t c = 0; c < cells.size(); ++c) {
        RepOutcome& out = draws[c][rep];
        try {
            DmlResult res = [&] {
                if (cfg.global_target)
                    return dml_estimate_with_nuisances(*data, FunctionalSpec::ate(), gammas,
                                                       global_alphas, *partition);
                const double h = bandwidth_heuristic(cells[c].c_h, data->v_column(), cfg.n);
                LocalWeighting weighting =
                    LocalWeighting::fit(data->v_column(), Kernel(cfg.kernel), cells[c].v_star, h);
                const FunctionalSpec spec = FunctionalSpec::cate(weighting);
                AlphaFits alphas;
                if (cfg.strategy == RieszStrategy::LocalizeGlobal) {
                    auto wsp = std::make_shared<const LocalWeighting>(weighting);
                    for (std::size_t ell = 0; ell < cfg.folds; ++ell)
                        alphas.push_back(std::make_shared<LocalizedRiesz>(
                            wsp, global_alphas[ell], cfg.trim_scale / h));
                } else {
                    for (std::size_t ell = 0; ell < cfg.folds; ++ell)
                        alphas.push_back(fit_riesz_lasso(dict, trains[ell], spec,
                                                         cfg.riesz_lambda, cfg.trim_scale / h));
                }
                return dml_estimate_with_nuisances(*data, spec, gammas, alphas, *partition);
            }();
            out.ok = true;
            out.theta = res.theta;
            out.sigma = res.sigma;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    }
}

std::string format_full(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

double parse_double(std::string_view field, std::size_t line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        std::ostringstream msg;
        msg << "coverage table line " << line_no << ": cannot parse number '" << field << "'";
        throw IngestError(msg.str());
    }
    return value;
}

std::size_t parse_count(std::string_view field, std::size_t line_no) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        std::ostringstream msg;
        msg << "coverage table line " << line_no << ": cannot parse count '" << field << "'";
        throw IngestError(msg.str());
    }
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

constexpr std::string_view kCsvHeader =
    "learner,regime,n,replications,folds,seed,v,truth,tuning,completed,failures,"
    "avg_estimate,avg_se,coverage80,coverage95,mc_se80,mc_se95,flagged";

} // namespace

std::string_view learner_name(LearnerKind kind) {
    switch (kind) {
    case LearnerKind::Lasso: return "lasso";
    case LearnerKind::Forest: return "rf";
    case LearnerKind::Mlp: return "nn";
    case LearnerKind::Oracle: return "oracle";
    }
    throw ConfigError("unknown learner");
}

LearnerKind learner_from_name(std::string_view name) {
    if (name == "lasso") return LearnerKind::Lasso;
    if (name == "rf" || name == "forest") return LearnerKind::Forest;
    if (name == "nn" || name == "mlp") return LearnerKind::Mlp;
    if (name == "oracle") return LearnerKind::Oracle;
    throw ConfigError("unknown learner '" + std::string(name) +
                      "'; expected lasso, rf, nn, or oracle");
}

std::string_view regime_name(Regime regime) {
    switch (regime) {
    case Regime::LowDim: return "low";
    case Regime::HighDim: return "high";
    }
    throw ConfigError("unknown regime");
}

Regime regime_from_name(std::string_view name) {
    if (name == "low") return Regime::LowDim;
    if (name == "high") return Regime::HighDim;
    throw ConfigError("unknown regime '" + std::string(name) + "'; expected low or high");
}

Dictionary::Family regime_family(Regime regime) {
    return regime == Regime::LowDim ? Dictionary::Family::LowDim : Dictionary::Family::HighDim;
}

void McConfig::validate() const {
    if (replications == 0) throw ConfigError("replications must be positive");
    if (n < 2) throw ConfigError("sample size must be at least 2");
    if (threads == 0) throw ConfigError("thread count must be positive");
    if (learner != LearnerKind::Oracle && (folds < 2 || n < 2 * folds))
        throw ConfigError("cross-fitting needs at least 2 folds and 2 rows per fold");
    if (!global_target) {
        if (v_grid.empty()) throw ConfigError("evaluation grid is empty");
        if (ch_grid.empty()) throw ConfigError("bandwidth scaling grid is empty");
        for (double ch : ch_grid)
            if (!(ch > 0.0)) throw ConfigError("bandwidth scalings must be positive");
    }
    if (!(trim_scale > 0.0)) throw ConfigError("trim scale must be positive");
    if (!(oracle_trim > 0.0)) throw ConfigError("oracle trim bound must be positive");
}

bool McResult::any_flagged() const {
    return std::any_of(cells.begin(), cells.end(),
                       [](const CoverageCell& c) { return c.flagged; });
}

McResult run_monte_carlo(const McConfig& cfg) {
    cfg.validate();

    const auto dict = make_dictionary(regime_family(cfg.regime), true, 3);
    const std::vector<CellSpec> cells = enumerate_cells(cfg);

    McResult result;
    result.learner = learner_name(cfg.learner);
    result.regime = regime_name(cfg.regime);
    result.n = cfg.n;
    result.replications = cfg.replications;
    result.folds = cfg.learner == LearnerKind::Oracle ? 0 : cfg.folds;
    result.seed = cfg.seed;
    result.draws.assign(cells.size(), std::vector<RepOutcome>(cfg.replications));

    const auto start = std::chrono::steady_clock::now();
    std::atomic<std::size_t> done{0};
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
        run_rep(rep, cfg, dict, cells, result.draws);
        if (cfg.progress) cfg.progress(done.fetch_add(1) + 1, cfg.replications);
    });
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double c80 = critical_value(0.20);
    const double c95 = critical_value(0.05);
    const double root_n = std::sqrt(static_cast<double>(cfg.n));

    for (std::size_t c = 0; c < cells.size(); ++c) {
        CoverageCell cell;
        cell.v_star = cells[c].v_star;
        cell.truth = cells[c].truth;
        cell.c_h = cells[c].c_h;
        cell.requested = cfg.replications;

        std::vector<double> thetas;
        std::vector<double> ses;
        std::size_t cover80 = 0;
        std::size_t cover95 = 0;
        for (const RepOutcome& out : result.draws[c]) {
            if (!out.ok) continue;
            const double se = out.sigma / root_n;
            thetas.push_back(out.theta);
            ses.push_back(se);
            const double err = std::abs(out.theta - cell.truth);
            if (err <= c80 * se) ++cover80;
            if (err <= c95 * se) ++cover95;
        }

        cell.completed = thetas.size();
        cell.failures = cfg.replications - cell.completed;
        cell.flagged = cell.failures * 100 > cfg.replications;
        if (cell.completed > 0) {
            cell.avg_estimate = stable_mean(thetas);
            cell.avg_se = stable_mean(ses);
            const double p80 = static_cast<double>(cover80) / static_cast<double>(cell.completed);
            const double p95 = static_cast<double>(cover95) / static_cast<double>(cell.completed);
            cell.coverage80 = 100.0 * p80;
            cell.coverage95 = 100.0 * p95;
            cell.mc_se80 =
                100.0 * std::sqrt(p80 * (1.0 - p80) / static_cast<double>(cell.completed));
            cell.mc_se95 =
                100.0 * std::sqrt(p95 * (1.0 - p95) / static_cast<double>(cell.completed));
        } else {
            cell.avg_estimate = kNan;
            cell.avg_se = kNan;
            cell.coverage80 = kNan;
            cell.coverage95 = kNan;
            cell.mc_se80 = kNan;
            cell.mc_se95 = kNan;
            cell.flagged = true;
        }
        result.total_failures += cell.failures;
        result.cells.push_back(cell);
    }
    return result;
}

std::string coverage_table_csv(const McResult& result) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const CoverageCell& cell : result.cells) {
        out << result.learner << ',' << result.regime << ',' << result.n << ','
            << result.replications << ',' << result.folds << ',' << result.seed << ','
            << format_full(cell.v_star) << ',' << format_full(cell.truth) << ','
            << format_full(cell.c_h) << ',' << cell.completed << ',' << cell.failures << ','
            << format_full(cell.avg_estimate) << ',' << format_full(cell.avg_se) << ','
            << format_full(cell.coverage80) << ',' << format_full(cell.coverage95) << ','
            << format_full(cell.mc_se80) << ',' << format_full(cell.mc_se95) << ','
            << (cell.flagged ? 1 : 0) << '\n';
    }
    return out.str();
}

McResult parse_coverage_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IngestError("coverage table is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader)
        throw IngestError("coverage table has an unexpected header: '" + line + "'");

    McResult result;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 18) {
            std::ostringstream msg;
            msg << "coverage table line " << line_no << ": expected 18 fields, found "
                << fields.size();
            throw IngestError(msg.str());
        }

        if (result.cells.empty()) {
            result.learner = std::string(fields[0]);
            result.regime = std::string(fields[1]);
            result.n = parse_count(fields[2], line_no);
            result.replications = parse_count(fields[3], line_no);
            result.folds = parse_count(fields[4], line_no);
            result.seed = parse_count(fields[5], line_no);
        }

        CoverageCell cell;
        cell.v_star = parse_double(fields[6], line_no);
        cell.truth = parse_double(fields[7], line_no);
        cell.c_h = parse_double(fields[8], line_no);
        cell.requested = result.replications;
        cell.completed = parse_count(fields[9], line_no);
        cell.failures = parse_count(fields[10], line_no);
        cell.avg_estimate = parse_double(fields[11], line_no);
        cell.avg_se = parse_double(fields[12], line_no);
        cell.coverage80 = parse_double(fields[13], line_no);
        cell.coverage95 = parse_double(fields[14], line_no);
        cell.mc_se80 = parse_double(fields[15], line_no);
        cell.mc_se95 = parse_double(fields[16], line_no);
        cell.flagged = parse_count(fields[17], line_no) != 0;
        result.total_failures += cell.failures;
        result.cells.push_back(cell);
    }
    if (result.cells.empty()) throw IngestError("coverage table has no rows");
    return result;
}

std::string coverage_table_markdown(const McResult& result) {
    auto fixed = [](double value, int digits) {
        if (std::isnan(value)) return std::string("-");
        char buffer[64];
        std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
        return std::string(buffer);
    };

    std::ostringstream out;
    out << "| v | target | tuning | avg. est. | avg. s.e. | 80% cover | 95% cover"
           " | mc s.e. 80 | mc s.e. 95 |\n";
    out << "|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const CoverageCell& cell : result.cells) {
        out << "| " << (std::isnan(cell.v_star) ? std::string("all") : fixed(cell.v_star, 2))
            << " | " << fixed(cell.truth, 2) << " | "
            << (std::isnan(cell.c_h) ? std::string("-") : fixed(cell.c_h, 2)) << " | "
            << fixed(cell.avg_estimate, 2) << " | " << fixed(cell.avg_se, 2) << " | "
            << fixed(cell.coverage80, 0) << " | " << fixed(cell.coverage95, 0) << " | "
            << fixed(cell.mc_se80, 1) << " | " << fixed(cell.mc_se95, 1) << " |\n";
    }
    out << '\n';
    out << "learner = " << result.learner << ", regime = " << result.regime << ", n = " << result.n
        << ", replications = " << result.replications << ", folds = " << result.folds
        << ", seed = " << result.seed << "\n";
    for (const CoverageCell& cell : result.cells) {
        if (cell.failures == 0) continue;
        out << "- cell v = " << (std::isnan(cell.v_star) ? std::string("all") : fixed(cell.v_star, 2))
            << ", tuning = " << (std::isnan(cell.c_h) ? std::string("-") : fixed(cell.c_h, 2))
            << ": " << cell.failures << " of " << result.replications
            << " replications failed" << (cell.flagged ? " (flagged)" : "") << "\n";
    }
    return out.str();
}

ScalingProbe sigma_h_scaling_probe(std::span<const double> h_grid, std::size_t n, double v_star,
                                   KernelKind kernel, std::uint64_t seed, double trim_scale) {
    if (h_grid.size() < 2) throw ConfigError("scaling probe needs at least two bandwidths");

    const Dataset data = dgp_sample(n, seed);
    const auto gamma0 = true_gamma_predictor();

    ScalingProbe probe;
    for (double h : h_grid) {
        if (!(h > 0.0)) throw ConfigError("bandwidths must be positive");
        const LocalWeighting weighting =
            LocalWeighting::fit(data.v_column(), Kernel(kernel), v_star, h);
        const auto wsp = std::make_shared<const LocalWeighting>(weighting);
        const DmlResult res = oracle_estimate(data, FunctionalSpec::cate(weighting), *gamma0,
                                              *oracle_cate_riesz(wsp, trim_scale));
        probe.bandwidths.push_back(h);
        probe.sigmas.push_back(res.sigma);
    }
    probe.slope = log_log_slope(probe.bandwidths, probe.sigmas);
    return probe;
}

} // namespace dml
