#include "dml/kernel.hpp"

#include <cmath>
#include <limits>

#include "dml/errors.hpp"

namespace dml {

double Kernel::half_width() const {
    switch (kind_) {
        case KernelKind::Uniform: return 0.5;
        case KernelKind::Gaussian: return std::numeric_limits<double>::infinity();
        default: return 1.0;
    }
}

double Kernel::operator()(double u) const {
    if (std::abs(u) >= half_width()) return 0.0;
    switch (kind_) {
        case KernelKind::Uniform:
            return 1.0;
        case KernelKind::Epanechnikov:
            return 0.75 * (1.0 - u * u);
        case KernelKind::Biweight: {
            const double t = 1.0 - u * u;
            return 15.0 / 16.0 * t * t;
        }
        case KernelKind::Order4:
            // Epanechnikov-based fourth order construction: the quadratic
            // prefactor cancels the second moment while keeping unit mass.
            return (15.0 / 8.0 - 35.0 / 8.0 * u * u) * 0.75 * (1.0 - u * u);
        case KernelKind::Gaussian:
            return 0.3989422804014327 * std::exp(-0.5 * u * u);
    }
    return 0.0;
}

std::string_view Kernel::name() const {
    switch (kind_) {
        case KernelKind::Uniform: return "uniform";
        case KernelKind::Epanechnikov: return "epanechnikov";
        case KernelKind::Biweight: return "biweight";
        case KernelKind::Order4: return "order4";
        case KernelKind::Gaussian: return "gaussian";
    }
    return "unknown";
}

Kernel Kernel::from_name(std::string_view name) {
    if (name == "uniform") return Kernel(KernelKind::Uniform);
    if (name == "epanechnikov") return Kernel(KernelKind::Epanechnikov);
    if (name == "biweight") return Kernel(KernelKind::Biweight);
    if (name == "order4") return Kernel(KernelKind::Order4);
    if (name == "gaussian") return Kernel(KernelKind::Gaussian);
    throw ConfigError("unknown kernel '" + std::string(name) +
                      "' (expected uniform, epanechnikov, biweight, order4, or gaussian)");
}

} // namespace dml
