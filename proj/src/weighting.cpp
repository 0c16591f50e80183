#include "dml/weighting.hpp"

#include <cmath>
#include <string>

#include "dml/errors.hpp"
#include "dml/stats.hpp"

namespace dml {

namespace {

double map_argument(double value, double center, double h, WindowSide side) {
    const double t = value - center;
    switch (side) {
        case WindowSide::TwoSided: return t / h;
        case WindowSide::Right: return (2.0 * t - h) / (2.0 * h);
        case WindowSide::Left: return (-2.0 * t - h) / (2.0 * h);
    }
    return 0.0;
}

} // namespace

double LocalWeighting::mapped(double value) const {
    return map_argument(value, center_, h_, side_);
}

double LocalWeighting::weight(double value) const {
    return kernel_(mapped(value)) / (h_ * omega_);
}

LocalWeighting LocalWeighting::fit(std::span<const double> values, Kernel kernel, double center,
                                   double h, WindowSide side) {
    if (!(h > 0.0)) throw ConfigError("bandwidth must be positive, got " + std::to_string(h));
    if (values.empty()) throw ConfigError("cannot fit a local weighting on an empty column");
    if (side != WindowSide::TwoSided && kernel.half_width() > 0.5) {
        // A wider kernel would let the half window leak across the cutoff.
        throw ConfigError("one-sided windows need a kernel supported inside (-1/2, 1/2); '" +
                          std::string(kernel.name()) + "' is too wide");
    }
    std::vector<double> terms(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        terms[i] = kernel(map_argument(values[i], center, h, side)) / h;
    }
    const double omega = stable_mean(terms);
    if (!(omega > 0.0)) {
        throw EmptyWindowError("no observations under the kernel window at center=" +
                               std::to_string(center) + ", h=" + std::to_string(h));
    }
    return LocalWeighting(kernel, center, h, side, omega);
}

std::vector<double> local_weights(const Dataset& data, const LocalWeighting& weighting) {
    const bool use_v = weighting.side() == WindowSide::TwoSided;
    if (use_v && !data.has_v()) {
        throw ConfigError("two-sided localization needs a v column, but the dataset has none");
    }
    std::vector<double> weights(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        weights[i] = weighting.weight(use_v ? data.v(i) : data.d(i));
    }
    return weights;
}

double bandwidth_heuristic(double c_h, std::span<const double> v_values, std::size_t n) {
    if (!(c_h > 0.0)) throw ConfigError("bandwidth constant must be positive");
    if (v_values.size() < 2 || n < 2) {
        throw ConfigError("bandwidth heuristic needs at least two observations");
    }
    const double sd = sample_sd(v_values);
    if (!(sd > 0.0)) {
        throw DegenerateCovariateError("localization covariate has zero variance");
    }
    return c_h * sd * std::pow(static_cast<double>(n), -0.2);
}

} // namespace dml
