#include "dml/cli.hpp"

#include "dml/config.hpp"
#include "dml/dgp.hpp"
#include "dml/engine.hpp"
#include "dml/errors.hpp"
#include "dml/lasso.hpp"
#include "dml/learners.hpp"
#include "dml/stats.hpp"
#include "dml/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace dml {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::mutex log_mutex;

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("io", msg) {}
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string format_full(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

FunctionalSpec build_spec(const EstimateConfig& cfg, const Dataset& data) {
    switch (cfg.kind) {
    case FunctionalKind::Ate:
        return FunctionalSpec::ate();
    case FunctionalKind::AvgDeriv:
        return FunctionalSpec::avg_deriv();
    case FunctionalKind::Cate:
    case FunctionalKind::HetDeriv: {
        if (!data.has_v())
            throw ConfigError("the localized functional needs a v column in the data");
        const double h = cfg.bandwidth > 0.0
                             ? cfg.bandwidth
                             : bandwidth_heuristic(cfg.bandwidth_scale, data.v_column(),
                                                   data.size());
        LocalWeighting weighting =
            LocalWeighting::fit(data.v_column(), Kernel(cfg.kernel), cfg.center, h);
        return cfg.kind == FunctionalKind::Cate ? FunctionalSpec::cate(std::move(weighting))
                                                : FunctionalSpec::het_deriv(std::move(weighting));
    }
    case FunctionalKind::Rdd: {
        const double h = cfg.bandwidth > 0.0
                             ? cfg.bandwidth
                             : bandwidth_heuristic(cfg.bandwidth_scale, data.d_column(),
                                                   data.size());
        LocalWeighting right = LocalWeighting::fit(data.d_column(), Kernel(cfg.kernel),
                                                   cfg.center, h, WindowSide::Right);
        LocalWeighting left = LocalWeighting::fit(data.d_column(), Kernel(cfg.kernel), cfg.center,
                                                  h, WindowSide::Left);
        return FunctionalSpec::rdd(std::move(right), std::move(left));
    }
    }
    throw ConfigError("unknown functional kind");
}

GammaFactory build_gamma_factory(const EstimateConfig& cfg,
                                 std::shared_ptr<const Dictionary> dict) {
    switch (cfg.learner) {
    case LearnerKind::Lasso:
        return [dict, lambda = cfg.lasso_lambda](const Dataset& train, std::uint64_t) {
            return fit_lasso_regression(dict, train, lambda);
        };
    case LearnerKind::Forest:
        return [dict, forest = cfg.forest](const Dataset& train, std::uint64_t seed) {
            return fit_forest_regression(dictionary_features(dict), train, forest, seed);
        };
    case LearnerKind::Mlp:
        return [dict, mlp = cfg.mlp](const Dataset& train, std::uint64_t seed) {
            return fit_mlp_regression(dictionary_features(dict), train, mlp, seed);
        };
    case LearnerKind::Oracle:
        break;
    }
    throw ConfigError("unsupported learner");
}

ordered_json echo_bound_inputs(const BoundInputs& in) {
    ordered_json echo;
    echo["folds"] = in.folds;
    echo["n"] = in.n;
    echo["q"] = in.q;
    echo["Q_bar"] = in.Q_bar;
    echo["sigma_bar"] = in.sigma_bar;
    echo["alpha_bar"] = in.alpha_bar;
    echo["alpha_trim"] = in.alpha_trim;
    echo["epsilon"] = in.epsilon;
    echo["epsilon_prime"] = in.epsilon_prime;
    echo["r_gamma"] = in.r_gamma;
    echo["r_alpha"] = in.r_alpha;
    echo["p_gamma"] = in.p_gamma;
    echo["p_alpha"] = in.p_alpha;
    echo["sigma"] = in.sigma;
    echo["kappa"] = in.kappa;
    echo["zeta"] = in.zeta;
    echo["theta_error"] = in.theta_error;
    return echo;
}

json finite_or_null(double value) {
    if (std::isfinite(value)) return value;
    return nullptr;
}

} // namespace

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("DML_LOG");
        if (!env) return LogLevel::Info;
        const std::string value(env);
        if (value == "quiet") return LogLevel::Quiet;
        if (value == "debug") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

void log_info(const std::string& message) {
    if (log_level() == LogLevel::Quiet) return;
    const std::lock_guard<std::mutex> lock(log_mutex);
    std::fprintf(stderr, "[dml] %s\n", message.c_str());
}

void log_debug(const std::string& message) {
    if (log_level() != LogLevel::Debug) return;
    const std::lock_guard<std::mutex> lock(log_mutex);
    std::fprintf(stderr, "[dml:debug] %s\n", message.c_str());
}

int cmd_estimate(const std::string& config_path, const CliOverrides& overrides) {
    EstimateConfig cfg = parse_estimate_config(load_json(config_path));
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.folds) cfg.folds = *overrides.folds;
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;

    log_info("reading " + cfg.data_path);
    const Dataset data = read_csv(cfg.data_path, cfg.roles);
    if (cfg.folds < 2 || data.size() < 2 * cfg.folds)
        throw ConfigError("dataset is too small for the requested fold count");

    const FunctionalSpec spec = build_spec(cfg, data);
    const auto dict = make_dictionary(regime_family(cfg.regime), data.has_v(), data.x_dim());
    const GammaFactory gamma = build_gamma_factory(cfg, dict);
    const RieszOptions riesz_options{cfg.strategy, cfg.riesz_lambda, cfg.trim_scale};
    const AlphaFactory alpha = [dict, spec, riesz_options](const Dataset& train, std::uint64_t) {
        return fit_riesz_for_spec(dict, train, spec, riesz_options);
    };

    log_info("cross-fitting with " + std::to_string(cfg.folds) + " folds");
    const DmlResult res = dml_estimate(data, spec, gamma, alpha, cfg.folds, cfg.seed, cfg.level);

    std::vector<double> abs3(res.n), four(res.n);
    for (std::size_t i = 0; i < res.n; ++i) {
        const double a = std::abs(res.psi[i]);
        abs3[i] = a * a * a;
        four[i] = a * a * a * a;
    }
    const double kappa_hat = std::cbrt(stable_mean(abs3));
    const double zeta_hat = std::pow(stable_mean(four), 0.25);
    const double be_term = berry_esseen_term(kappa_hat, res.sigma, static_cast<double>(res.n));
    const double psi_mean = stable_mean(res.psi);
    const double se = res.sigma / std::sqrt(static_cast<double>(res.n));

    ordered_json out;
    out["command"] = "estimate";
    out["version"] = DML_VERSION;
    out["config"] = echo_config(cfg);
    ordered_json result;
    result["theta"] = res.theta;
    result["sigma"] = res.sigma;
    result["se"] = se;
    result["level"] = res.level;
    result["critical"] = res.critical;
    result["ci_low"] = res.ci_low;
    result["ci_high"] = res.ci_high;
    result["n"] = res.n;
    result["folds"] = res.fold_count;
    ordered_json fold_details = ordered_json::array();
    for (const FoldRecord& fold : res.folds)
        fold_details.push_back({{"fold", fold.fold},
                                {"train_count", fold.train_count},
                                {"eval_count", fold.eval_count},
                                {"mean_m", fold.mean_m},
                                {"mean_correction", fold.mean_correction},
                                {"gamma_fingerprint", fold.gamma_fingerprint},
                                {"alpha_fingerprint", fold.alpha_fingerprint}});
    result["fold_details"] = fold_details;
    result["diagnostics"] = {{"psi_mean", psi_mean},
                             {"kappa_hat", kappa_hat},
                             {"zeta_hat", zeta_hat},
                             {"berry_esseen_term", be_term}};
    out["result"] = result;

    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    write_text(dir / "estimate.json", out.dump(2) + "\n");

    std::ostringstream csv;
    csv << "theta,sigma,se,ci_low,ci_high,level,critical,n,folds,seed\n"
        << format_full(res.theta) << ',' << format_full(res.sigma) << ',' << format_full(se) << ','
        << format_full(res.ci_low) << ',' << format_full(res.ci_high) << ','
        << format_full(res.level) << ',' << format_full(res.critical) << ',' << res.n << ','
        << res.fold_count << ',' << cfg.seed << '\n';
    write_text(dir / "estimate.csv", csv.str());

    std::printf("theta      %.6f\n", res.theta);
    std::printf("sigma      %.6f\n", res.sigma);
    std::printf("se         %.6f\n", se);
    std::printf("%2.0f%% CI     [%.6f, %.6f]\n", 100.0 * (1.0 - res.level), res.ci_low,
                res.ci_high);
    std::printf("psi mean   %.3e\n", psi_mean);
    std::printf("kappa_hat  %.6f\n", kappa_hat);
    std::printf("zeta_hat   %.6f\n", zeta_hat);
    std::printf("be term    %.6f\n", be_term);
    log_info("wrote " + (dir / "estimate.json").string() + " and " +
             (dir / "estimate.csv").string());
    return 0;
}

int cmd_simulate(const std::string& config_path, const CliOverrides& overrides) {
    SimulateConfig cfg = parse_simulate_config(load_json(config_path));
    if (overrides.seed) cfg.mc.seed = *overrides.seed;
    if (overrides.replications) cfg.mc.replications = *overrides.replications;
    if (overrides.threads) cfg.mc.threads = *overrides.threads;
    if (overrides.folds) cfg.mc.folds = *overrides.folds;
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    cfg.mc.validate();

    const std::size_t total = cfg.mc.replications;
    const std::size_t stride = std::max<std::size_t>(1, total / 20);
    cfg.mc.progress = [total, stride](std::size_t done, std::size_t) {
        if (done % stride == 0 || done == total)
            log_info("replications " + std::to_string(done) + "/" + std::to_string(total));
    };

    log_info("running " + std::to_string(total) + " replications, learner " +
             std::string(learner_name(cfg.mc.learner)) + ", regime " +
             std::string(regime_name(cfg.mc.regime)));
    const McResult res = run_monte_carlo(cfg.mc);

    const std::string stem =
        "coverage_" + std::string(regime_name(cfg.mc.regime)) + "_" + res.learner;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    const fs::path csv_path = dir / (stem + ".csv");
    const fs::path md_path = dir / (stem + ".md");
    write_text(csv_path, coverage_table_csv(res));
    write_text(md_path, coverage_table_markdown(res));

    ordered_json manifest;
    manifest["command"] = "simulate";
    manifest["version"] = DML_VERSION;
    manifest["config"] = echo_config(cfg);
    manifest["wall_seconds"] = res.wall_seconds;
    manifest["total_failures"] = res.total_failures;
    ordered_json flagged = ordered_json::array();
    for (const CoverageCell& cell : res.cells)
        if (cell.flagged)
            flagged.push_back({{"v", finite_or_null(cell.v_star)},
                               {"tuning", finite_or_null(cell.c_h)},
                               {"failures", cell.failures}});
    manifest["flagged_cells"] = flagged;
    manifest["outputs"] = {csv_path.string(), md_path.string()};
    manifest["timestamp"] = utc_timestamp();
    write_text(dir / ("manifest_" + std::string(regime_name(cfg.mc.regime)) + "_" + res.learner +
                      ".json"),
               manifest.dump(2) + "\n");

    std::fputs(coverage_table_markdown(res).c_str(), stdout);
    log_info("wrote " + csv_path.string());
    if (res.any_flagged()) {
        log_info("one or more cells exceeded the failure threshold");
        return 1;
    }
    return 0;
}

int cmd_bounds(const std::string& config_path, const CliOverrides& overrides) {
    BoundsConfig cfg = parse_bounds_config(load_json(config_path));
    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    ordered_json out;
    out["command"] = "bounds";
    out["version"] = DML_VERSION;

    if (cfg.inputs) {
        const BoundInputs& in = *cfg.inputs;
        const VarianceBound var = variance_bound(in);
        out["inputs"] = echo_bound_inputs(in);
        ordered_json report;
        report["delta_basic"] = delta_basic(in);
        report["delta_refined"] = finite_or_null(delta_refined(in));
        report["berry_esseen"] = berry_esseen_term(in.kappa, in.sigma, in.n);
        report["gaussian_remainder_basic"] = gaussian_remainder(in, false);
        report["gaussian_remainder_refined"] = finite_or_null(gaussian_remainder(in, true));
        report["variance"] = {{"delta_prime", var.delta_prime},
                              {"delta_dprime", var.delta_dprime},
                              {"total", var.total}};
        out["report"] = report;
        write_text(dir / "bounds.json", out.dump(2) + "\n");
        std::printf("delta_basic          %.6g\n", delta_basic(in));
        std::printf("delta_refined        %.6g\n", delta_refined(in));
        std::printf("berry_esseen         %.6g\n", berry_esseen_term(in.kappa, in.sigma, in.n));
        std::printf("variance bound       %.6g\n", var.total);
        log_info("wrote " + (dir / "bounds.json").string());
        return 0;
    }

    if (!cfg.sequence.empty()) {
        const CorollaryReport report = corollary_checklist(cfg.sequence);
        std::ostringstream csv;
        csv << "index,n,regularity,condition1,condition2,condition3\n";
        for (std::size_t i = 0; i < cfg.sequence.size(); ++i)
            csv << i << ',' << format_full(cfg.sequence[i].n) << ','
                << format_full(report.regularity[i]) << ',' << format_full(report.condition1[i])
                << ',' << format_full(report.condition2[i]) << ','
                << format_full(report.condition3[i]) << '\n';
        write_text(dir / "corollary.csv", csv.str());

        ordered_json checks;
        checks["regularity_non_increasing"] = report.regularity_ok;
        checks["condition1_non_increasing"] = report.condition1_ok;
        checks["condition2_non_increasing"] = report.condition2_ok;
        checks["condition3_non_increasing"] = report.condition3_ok;
        out["checklist"] = checks;
        write_text(dir / "bounds.json", out.dump(2) + "\n");
        std::printf("regularity non-increasing: %s\n", report.regularity_ok ? "yes" : "no");
        std::printf("condition1 non-increasing: %s\n", report.condition1_ok ? "yes" : "no");
        std::printf("condition2 non-increasing: %s\n", report.condition2_ok ? "yes" : "no");
        std::printf("condition3 non-increasing: %s\n", report.condition3_ok ? "yes" : "no");
        log_info("wrote " + (dir / "corollary.csv").string());
        return 0;
    }

    const BoundsProbeConfig& probe_cfg = *cfg.probe;
    const ScalingProbe probe =
        sigma_h_scaling_probe(probe_cfg.bandwidths, probe_cfg.n, probe_cfg.center,
                              probe_cfg.kernel, probe_cfg.seed, probe_cfg.trim_scale);
    std::ostringstream csv;
    csv << "bandwidth,sigma\n";
    for (std::size_t i = 0; i < probe.bandwidths.size(); ++i)
        csv << format_full(probe.bandwidths[i]) << ',' << format_full(probe.sigmas[i]) << '\n';
    write_text(dir / "scaling.csv", csv.str());
    out["probe"] = {{"slope", probe.slope},
                    {"bandwidths", probe.bandwidths},
                    {"sigmas", probe.sigmas}};
    write_text(dir / "bounds.json", out.dump(2) + "\n");
    std::printf("log sigma vs log h slope: %.4f\n", probe.slope);
    log_info("wrote " + (dir / "scaling.csv").string());
    return 0;
}

int cmd_report(const std::string& input_dir, const std::string& output_path) {
    const fs::path dir(input_dir);
    if (!fs::is_directory(dir)) throw ConfigError("'" + input_dir + "' is not a directory");

    struct Entry {
        int rank = 0;
        std::string name;
        McResult table;
    };
    auto learner_rank = [](const std::string& learner) {
        if (learner == "nn") return 0;
        if (learner == "rf") return 1;
        if (learner == "lasso") return 2;
        if (learner == "oracle") return 3;
        return 4;
    };

    std::vector<Entry> entries;
    for (const auto& item : fs::directory_iterator(dir)) {
        if (!item.is_regular_file()) continue;
        const std::string name = item.path().filename().string();
        if (name.rfind("coverage_", 0) != 0 || item.path().extension() != ".csv") continue;
        std::ifstream in(item.path());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        Entry entry;
        entry.table = parse_coverage_csv(buffer.str());
        entry.name = name;
        entry.rank = (entry.table.regime == "high" ? 10 : 0) + learner_rank(entry.table.learner);
        entries.push_back(std::move(entry));
    }
    if (entries.empty())
        throw IngestError("no coverage_*.csv tables found in '" + input_dir + "'");

    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.rank != b.rank ? a.rank < b.rank : a.name < b.name;
    });

    std::ostringstream md;
    md << "# Coverage studies\n\n";
    bool any_flagged = false;
    for (const Entry& entry : entries) {
        md << "## learner = " << entry.table.learner << ", regime = " << entry.table.regime
           << "\n\n";
        md << coverage_table_markdown(entry.table) << "\n";
        if (entry.table.any_flagged()) {
            any_flagged = true;
            md << "Warning: this table has cells above the failure threshold.\n\n";
        }
    }

    const fs::path out_path =
        output_path.empty() ? dir / "report.md" : fs::path(output_path);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    write_text(out_path, md.str());
    std::printf("wrote %s (%zu tables)\n", out_path.string().c_str(), entries.size());
    return any_flagged ? 1 : 0;
}

int report_error(const std::exception& e) {
    const Error* known = dynamic_cast<const Error*>(&e);
    json err;
    err["error"] = {{"tag", known ? known->tag() : "internal"}, {"message", e.what()}};
    std::printf("%s\n", err.dump().c_str());
    return known && known->tag() == "config" ? 2 : 1;
}

} // namespace dml
