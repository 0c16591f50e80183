#ifndef DML_WEIGHTING_HPP
#define DML_WEIGHTING_HPP

#include <span>
#include <vector>

#include "dml/dataset.hpp"
#include "dml/kernel.hpp"

namespace dml {

/// Which side of the evaluation point the window covers. Right and left are
/// the half-kernels used for discontinuity contrasts; they weight the running
/// variable d instead of the localization covariate v and require a kernel
/// supported inside (-1/2, 1/2).
enum class WindowSide { TwoSided, Right, Left };

/// Kernel localization weight with a sample plug-in normalizer:
///   weight(t) = K(u(t)) / (h * omega_hat),  omega_hat = mean_i K(u(t_i)) / h.
/// By construction the weights average to one over the normalizing sample.
class LocalWeighting {
public:
    /// Fits the normalizer on `values` (the v column for two-sided windows,
    /// the d column for half windows). Throws EmptyWindowError when no
    /// observation falls inside the window.
    static LocalWeighting fit(std::span<const double> values, Kernel kernel, double center,
                              double h, WindowSide side = WindowSide::TwoSided);

    double weight(double value) const;

    Kernel kernel() const { return kernel_; }
    double center() const { return center_; }
    double bandwidth() const { return h_; }
    double omega() const { return omega_; }
    WindowSide side() const { return side_; }

private:
    LocalWeighting(Kernel kernel, double center, double h, WindowSide side, double omega)
        : kernel_(kernel), center_(center), h_(h), side_(side), omega_(omega) {}

    double mapped(double value) const;

    Kernel kernel_;
    double center_;
    double h_;
    WindowSide side_;
    double omega_;
};

/// Per-row weights for the dataset column selected by the weighting's side.
std::vector<double> local_weights(const Dataset& data, const LocalWeighting& weighting);

/// Rule-of-thumb bandwidth c_h * sd(v) * n^{-1/5}.
double bandwidth_heuristic(double c_h, std::span<const double> v_values, std::size_t n);

} // namespace dml

#endif
