#include "dml/config.hpp"

#include "dml/errors.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace dml {

namespace {

using nlohmann::json;

/// Tracks which keys of one JSON object were consumed; finish() rejects the
/// rest so misspellings never pass silently.
class Walker {
public:
    Walker(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    bool has(const char* key) const { return obj_.contains(key); }

    double number(const char* key, double fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ConfigError(dotted(key) + " must be a number");
        return v->get<double>();
    }

    double require_number(const char* key) {
        if (!has(key)) throw ConfigError(dotted(key) + " is required");
        return number(key, 0.0);
    }

    std::size_t count(const char* key, std::size_t fallback) {
        return static_cast<std::size_t>(u64(key, fallback));
    }

    std::uint64_t u64(const char* key, std::uint64_t fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        const bool ok = v->is_number_unsigned() ||
                        (v->is_number_integer() && v->get<std::int64_t>() >= 0);
        if (!ok) throw ConfigError(dotted(key) + " must be a non-negative integer");
        return v->get<std::uint64_t>();
    }

    bool boolean(const char* key, bool fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(dotted(key) + " must be a boolean");
        return v->get<bool>();
    }

    std::string text(const char* key, std::string fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(dotted(key) + " must be a string");
        return v->get<std::string>();
    }

    std::string require_text(const char* key) {
        if (!has(key)) throw ConfigError(dotted(key) + " is required");
        return text(key, "");
    }

    std::vector<double> numbers(const char* key, std::vector<double> fallback) {
        const json* v = take(key);
        if (!v) return fallback;
        if (!v->is_array()) throw ConfigError(dotted(key) + " must be an array of numbers");
        std::vector<double> out;
        for (const json& item : *v) {
            if (!item.is_number()) throw ConfigError(dotted(key) + " must be an array of numbers");
            out.push_back(item.get<double>());
        }
        return out;
    }

    std::vector<std::string> require_texts(const char* key) {
        if (!has(key)) throw ConfigError(dotted(key) + " is required");
        const json* v = take(key);
        if (!v->is_array()) throw ConfigError(dotted(key) + " must be an array of strings");
        std::vector<std::string> out;
        for (const json& item : *v) {
            if (!item.is_string()) throw ConfigError(dotted(key) + " must be an array of strings");
            out.push_back(item.get<std::string>());
        }
        return out;
    }

    const json* object(const char* key) {
        const json* v = take(key);
        if (!v) return nullptr;
        if (!v->is_object()) throw ConfigError(dotted(key) + " must be an object");
        return v;
    }

    const json* array(const char* key) {
        const json* v = take(key);
        if (!v) return nullptr;
        if (!v->is_array()) throw ConfigError(dotted(key) + " must be an array");
        return v;
    }

    std::string dotted(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!seen_.count(item.key()))
                throw ConfigError("unknown key '" + dotted(item.key().c_str()) + "'");
    }

private:
    const json* take(const char* key) {
        seen_.insert(key);
        const auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

ForestConfig parse_forest(Walker& w) {
    ForestConfig out;
    out.trees = w.count("trees", out.trees);
    out.min_leaf = w.count("min_leaf", out.min_leaf);
    out.max_depth = w.count("max_depth", out.max_depth);
    out.mtry = w.count("mtry", out.mtry);
    if (out.trees == 0) throw ConfigError(w.dotted("trees") + " must be positive");
    if (out.min_leaf == 0) throw ConfigError(w.dotted("min_leaf") + " must be positive");
    return out;
}

MlpConfig parse_mlp(Walker& w) {
    MlpConfig out;
    out.hidden = w.count("hidden", out.hidden);
    out.max_epochs = w.count("max_epochs", out.max_epochs);
    out.init_step = w.number("init_step", out.init_step);
    if (out.hidden == 0) throw ConfigError(w.dotted("hidden") + " must be positive");
    if (!(out.init_step > 0.0)) throw ConfigError(w.dotted("init_step") + " must be positive");
    return out;
}

BoundInputs parse_bound_inputs(const json& obj, const std::string& path) {
    Walker w(obj, path);
    BoundInputs in;
    in.folds = w.number("folds", in.folds);
    in.n = w.require_number("n");
    in.q = w.number("q", in.q);
    in.Q_bar = w.number("Q_bar", in.Q_bar);
    in.sigma_bar = w.number("sigma_bar", in.sigma_bar);
    in.alpha_bar = w.number("alpha_bar", in.alpha_bar);
    in.alpha_trim = w.number("alpha_trim", in.alpha_trim);
    in.epsilon = w.number("epsilon", in.epsilon);
    in.epsilon_prime = w.number("epsilon_prime", in.epsilon_prime);
    in.r_gamma = w.require_number("r_gamma");
    in.r_alpha = w.require_number("r_alpha");
    in.p_gamma = w.number("p_gamma", in.p_gamma);
    in.p_alpha = w.number("p_alpha", in.p_alpha);
    in.sigma = w.require_number("sigma");
    in.kappa = w.number("kappa", in.kappa);
    in.zeta = w.number("zeta", in.zeta);
    in.theta_error = w.number("theta_error", in.theta_error);
    w.finish();
    in.validate();
    return in;
}

} // namespace

std::string_view strategy_name(RieszStrategy strategy) {
    return strategy == RieszStrategy::LocalizeGlobal ? "localize-global" : "direct-local";
}

RieszStrategy strategy_from_name(std::string_view name) {
    if (name == "localize-global") return RieszStrategy::LocalizeGlobal;
    if (name == "direct-local") return RieszStrategy::DirectLocal;
    throw ConfigError("unknown strategy '" + std::string(name) +
                      "'; expected localize-global or direct-local");
}

EstimateConfig parse_estimate_config(const json& root) {
    Walker w(root, "config");
    EstimateConfig out;
    out.data_path = w.require_text("data");

    {
        const json* cols = w.object("columns");
        if (!cols) throw ConfigError("config.columns is required");
        Walker cw(*cols, "config.columns");
        out.roles.y = cw.require_text("y");
        out.roles.d = cw.require_text("d");
        out.roles.v = cw.text("v", "");
        out.roles.x = cw.require_texts("x");
        cw.finish();
        if (out.roles.x.empty()) throw ConfigError("config.columns.x must not be empty");
    }

    {
        const json* fn = w.object("functional");
        if (!fn) throw ConfigError("config.functional is required");
        Walker fw(*fn, "config.functional");
        out.kind = functional_from_name(fw.require_text("kind"));
        const bool local = is_local(out.kind);
        out.kernel = Kernel::from_name(
            fw.text("kernel", out.kind == FunctionalKind::Rdd ? "uniform" : "epanechnikov"))
                         .kind();
        if (local) {
            out.center = fw.require_number("center");
            out.bandwidth = fw.number("bandwidth", -1.0);
            out.bandwidth_scale = fw.number("bandwidth_scale", -1.0);
            const bool has_h = out.bandwidth > 0.0;
            const bool has_scale = out.bandwidth_scale > 0.0;
            if (has_h == has_scale)
                throw ConfigError(
                    "config.functional needs exactly one of bandwidth or bandwidth_scale");
        } else {
            if (fw.has("center") || fw.has("bandwidth") || fw.has("bandwidth_scale") ||
                fw.has("kernel"))
                throw ConfigError("config.functional: localization keys only apply to local kinds");
        }
        fw.finish();
    }

    {
        const json* ln = w.object("learner");
        if (!ln) throw ConfigError("config.learner is required");
        Walker lw(*ln, "config.learner");
        out.learner = learner_from_name(lw.require_text("kind"));
        if (out.learner == LearnerKind::Oracle)
            throw ConfigError("config.learner.kind: the oracle learner is simulation-only");
        out.regime = regime_from_name(lw.text("regime", "low"));
        switch (out.learner) {
        case LearnerKind::Lasso:
            out.lasso_lambda = lw.number("lambda", -1.0);
            break;
        case LearnerKind::Forest:
            out.forest = parse_forest(lw);
            break;
        case LearnerKind::Mlp:
            out.mlp = parse_mlp(lw);
            break;
        case LearnerKind::Oracle:
            break;
        }
        lw.finish();
    }

    if (const json* rz = w.object("riesz")) {
        Walker rw(*rz, "config.riesz");
        out.riesz_lambda = rw.number("lambda", -1.0);
        out.strategy = strategy_from_name(
            rw.text("strategy", std::string(strategy_name(out.strategy))));
        out.trim_scale = rw.number("trim_scale", out.trim_scale);
        rw.finish();
        if (!(out.trim_scale > 0.0)) throw ConfigError("config.riesz.trim_scale must be positive");
    }

    out.folds = w.count("folds", out.folds);
    out.seed = w.u64("seed", out.seed);
    out.level = w.number("level", out.level);
    out.output_dir = w.text("output_dir", out.output_dir);
    w.finish();

    if (out.folds < 2) throw ConfigError("config.folds must be at least 2");
    if (!(out.level > 0.0 && out.level < 1.0))
        throw ConfigError("config.level must lie in (0, 1)");
    return out;
}

SimulateConfig parse_simulate_config(const json& root) {
    Walker w(root, "config");
    SimulateConfig out;
    McConfig& mc = out.mc;

    mc.learner = learner_from_name(w.require_text("learner"));
    mc.regime = regime_from_name(w.text("regime", "low"));
    const std::string target = w.text("target", "cate");
    if (target == "ate")
        mc.global_target = true;
    else if (target == "cate")
        mc.global_target = false;
    else
        throw ConfigError("config.target must be 'cate' or 'ate'");

    mc.v_grid = w.numbers("v_grid", mc.v_grid);
    mc.ch_grid = w.numbers("bandwidth_scales", mc.ch_grid);
    mc.replications = w.count("replications", mc.replications);
    mc.n = w.count("n", mc.n);
    mc.folds = w.count("folds", mc.folds);
    mc.seed = w.u64("seed", mc.seed);
    mc.threads = w.count("threads", mc.threads);
    mc.kernel = Kernel::from_name(w.text("kernel", std::string(Kernel(mc.kernel).name()))).kind();
    mc.lasso_lambda = w.number("lasso_lambda", mc.lasso_lambda);
    mc.riesz_lambda = w.number("riesz_lambda", mc.riesz_lambda);
    mc.strategy = strategy_from_name(w.text("strategy", std::string(strategy_name(mc.strategy))));
    mc.trim_scale = w.number("trim_scale", mc.trim_scale);
    mc.oracle_trim = w.number("oracle_trim", mc.oracle_trim);

    if (const json* fo = w.object("forest")) {
        Walker fw(*fo, "config.forest");
        mc.forest = parse_forest(fw);
        fw.finish();
    }
    if (const json* mo = w.object("mlp")) {
        Walker mw(*mo, "config.mlp");
        mc.mlp = parse_mlp(mw);
        mw.finish();
    }

    out.output_dir = w.text("output_dir", out.output_dir);
    w.finish();
    mc.validate();
    return out;
}

BoundsConfig parse_bounds_config(const json& root) {
    Walker w(root, "config");
    BoundsConfig out;

    int modes = 0;
    if (const json* in = w.object("inputs")) {
        out.inputs = parse_bound_inputs(*in, "config.inputs");
        ++modes;
    }
    if (const json* seq = w.array("sequence")) {
        for (std::size_t i = 0; i < seq->size(); ++i)
            out.sequence.push_back(
                parse_bound_inputs((*seq)[i], "config.sequence[" + std::to_string(i) + "]"));
        if (out.sequence.empty()) throw ConfigError("config.sequence must not be empty");
        ++modes;
    }
    if (const json* pr = w.object("probe")) {
        Walker pw(*pr, "config.probe");
        BoundsProbeConfig probe;
        probe.bandwidths = pw.numbers("bandwidths", {});
        if (probe.bandwidths.size() < 2)
            throw ConfigError("config.probe.bandwidths needs at least two values");
        probe.n = pw.count("n", probe.n);
        probe.center = pw.number("center", probe.center);
        probe.kernel =
            Kernel::from_name(pw.text("kernel", std::string(Kernel(probe.kernel).name()))).kind();
        probe.seed = pw.u64("seed", probe.seed);
        probe.trim_scale = pw.number("trim_scale", probe.trim_scale);
        pw.finish();
        out.probe = std::move(probe);
        ++modes;
    }

    out.output_dir = w.text("output_dir", out.output_dir);
    w.finish();
    if (modes != 1)
        throw ConfigError("config must contain exactly one of inputs, sequence, or probe");
    return out;
}

nlohmann::ordered_json echo_config(const EstimateConfig& config) {
    nlohmann::ordered_json echo;
    echo["data"] = config.data_path;
    echo["columns"] = {{"y", config.roles.y}, {"d", config.roles.d}, {"x", config.roles.x}};
    if (!config.roles.v.empty()) echo["columns"]["v"] = config.roles.v;

    nlohmann::ordered_json fn;
    fn["kind"] = std::string(functional_name(config.kind));
    if (is_local(config.kind)) {
        fn["center"] = config.center;
        if (config.bandwidth > 0.0) fn["bandwidth"] = config.bandwidth;
        if (config.bandwidth_scale > 0.0) fn["bandwidth_scale"] = config.bandwidth_scale;
        fn["kernel"] = std::string(Kernel(config.kernel).name());
    }
    echo["functional"] = fn;

    nlohmann::ordered_json ln;
    ln["kind"] = std::string(learner_name(config.learner));
    ln["regime"] = std::string(regime_name(config.regime));
    switch (config.learner) {
    case LearnerKind::Lasso:
        ln["lambda"] = config.lasso_lambda;
        break;
    case LearnerKind::Forest:
        ln["trees"] = config.forest.trees;
        ln["min_leaf"] = config.forest.min_leaf;
        ln["max_depth"] = config.forest.max_depth;
        ln["mtry"] = config.forest.mtry;
        break;
    case LearnerKind::Mlp:
        ln["hidden"] = config.mlp.hidden;
        ln["max_epochs"] = config.mlp.max_epochs;
        ln["init_step"] = config.mlp.init_step;
        break;
    case LearnerKind::Oracle:
        break;
    }
    echo["learner"] = ln;

    echo["riesz"] = {{"lambda", config.riesz_lambda},
                     {"strategy", std::string(strategy_name(config.strategy))},
                     {"trim_scale", config.trim_scale}};
    echo["folds"] = config.folds;
    echo["seed"] = config.seed;
    echo["level"] = config.level;
    echo["output_dir"] = config.output_dir;
    return echo;
}

nlohmann::ordered_json echo_config(const SimulateConfig& config) {
    const McConfig& mc = config.mc;
    nlohmann::ordered_json echo;
    echo["learner"] = std::string(learner_name(mc.learner));
    echo["regime"] = std::string(regime_name(mc.regime));
    echo["target"] = mc.global_target ? "ate" : "cate";
    if (!mc.global_target) {
        echo["v_grid"] = mc.v_grid;
        echo["bandwidth_scales"] = mc.ch_grid;
        echo["kernel"] = std::string(Kernel(mc.kernel).name());
    }
    echo["replications"] = mc.replications;
    echo["n"] = mc.n;
    echo["folds"] = mc.folds;
    echo["seed"] = mc.seed;
    echo["threads"] = mc.threads;
    echo["lasso_lambda"] = mc.lasso_lambda;
    echo["riesz_lambda"] = mc.riesz_lambda;
    echo["strategy"] = std::string(strategy_name(mc.strategy));
    echo["trim_scale"] = mc.trim_scale;
    echo["oracle_trim"] = mc.oracle_trim;
    if (mc.learner == LearnerKind::Forest)
        echo["forest"] = {{"trees", mc.forest.trees},
                          {"min_leaf", mc.forest.min_leaf},
                          {"max_depth", mc.forest.max_depth},
                          {"mtry", mc.forest.mtry}};
    if (mc.learner == LearnerKind::Mlp)
        echo["mlp"] = {{"hidden", mc.mlp.hidden},
                       {"max_epochs", mc.mlp.max_epochs},
                       {"init_step", mc.mlp.init_step}};
    echo["output_dir"] = config.output_dir;
    return echo;
}

} // namespace dml
