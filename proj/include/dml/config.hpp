#ifndef DML_CONFIG_HPP
#define DML_CONFIG_HPP

#include "dml/bounds.hpp"
#include "dml/dataset.hpp"
#include "dml/functional.hpp"
#include "dml/kernel.hpp"
#include "dml/montecarlo.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dml {

std::string_view strategy_name(RieszStrategy strategy);
RieszStrategy strategy_from_name(std::string_view name);

/// All configs are strict: unknown keys and type mismatches raise
/// ConfigError naming the offending dotted path. Absent optional keys take
/// the defaults below, and the resolved values are echoed into artifacts.
struct EstimateConfig {
    std::string data_path;
    ColumnRoles roles;
    FunctionalKind kind = FunctionalKind::Ate;
    double center = 0.0;
    double bandwidth = -1.0;       // absolute window half-width
    double bandwidth_scale = -1.0; // multiplies sd * n^{-1/5}
    KernelKind kernel = KernelKind::Epanechnikov;
    LearnerKind learner = LearnerKind::Lasso;
    Regime regime = Regime::LowDim;
    double lasso_lambda = -1.0;
    ForestConfig forest;
    MlpConfig mlp;
    double riesz_lambda = -1.0;
    RieszStrategy strategy = RieszStrategy::LocalizeGlobal;
    double trim_scale = 50.0;
    std::size_t folds = 5;
    std::uint64_t seed = 1;
    double level = 0.05;
    std::string output_dir = ".";
};

struct SimulateConfig {
    McConfig mc;
    std::string output_dir = ".";
};

struct BoundsProbeConfig {
    std::vector<double> bandwidths;
    std::size_t n = 100000;
    double center = 0.0;
    KernelKind kernel = KernelKind::Epanechnikov;
    std::uint64_t seed = 1;
    double trim_scale = 50.0;
};

/// Exactly one of `inputs` (single report), `sequence` (trajectories), or
/// `probe` (bandwidth scaling) is set.
struct BoundsConfig {
    std::optional<BoundInputs> inputs;
    std::vector<BoundInputs> sequence;
    std::optional<BoundsProbeConfig> probe;
    std::string output_dir = ".";
};

EstimateConfig parse_estimate_config(const nlohmann::json& root);
SimulateConfig parse_simulate_config(const nlohmann::json& root);
BoundsConfig parse_bounds_config(const nlohmann::json& root);

nlohmann::ordered_json echo_config(const EstimateConfig& config);
nlohmann::ordered_json echo_config(const SimulateConfig& config);

} // namespace dml

#endif
