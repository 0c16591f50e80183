#ifndef DML_KERNEL_HPP
#define DML_KERNEL_HPP

#include <string>
#include <string_view>

namespace dml {

enum class KernelKind { Uniform, Epanechnikov, Biweight, Order4, Gaussian };

/// Symmetric kernel that integrates to one. The uniform kernel lives on the
/// open interval (-1/2, 1/2); epanechnikov, biweight, and order4 on (-1, 1);
/// the gaussian kernel is the standard normal density on the whole line. The
/// order-4 kernel takes negative values but has vanishing second moment.
class Kernel {
public:
    explicit Kernel(KernelKind kind) : kind_(kind) {}

    KernelKind kind() const { return kind_; }
    double half_width() const;
    bool nonnegative() const { return kind_ != KernelKind::Order4; }

    double operator()(double u) const;

    std::string_view name() const;
    static Kernel from_name(std::string_view name);

private:
    KernelKind kind_;
};

} // namespace dml

#endif
