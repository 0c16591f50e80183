#ifndef DML_FUNCTIONAL_HPP
#define DML_FUNCTIONAL_HPP

#include <optional>
#include <string_view>

#include "dml/predictor.hpp"
#include "dml/weighting.hpp"

namespace dml {

class RieszEstimate;

/// Target functional families. Global kinds average over the whole sample;
/// local kinds weight observations by a kernel window.
enum class FunctionalKind { Ate, Cate, Rdd, AvgDeriv, HetDeriv };

bool is_local(FunctionalKind kind);
std::string_view functional_name(FunctionalKind kind);
FunctionalKind functional_from_name(std::string_view name);

/// Mean-square-continuity exponent: 1 for contrast functionals, 1/2 for
/// derivative functionals.
double ms_continuity_exponent(FunctionalKind kind);

/// Declarative description of the target: the kind plus any localization
/// windows, able to evaluate m(w, f) for a candidate regression f.
class FunctionalSpec {
public:
    static FunctionalSpec ate();
    static FunctionalSpec avg_deriv();
    static FunctionalSpec cate(LocalWeighting weighting);
    static FunctionalSpec het_deriv(LocalWeighting weighting);
    static FunctionalSpec rdd(LocalWeighting right, LocalWeighting left);

    FunctionalKind kind() const { return kind_; }
    double q() const { return ms_continuity_exponent(kind_); }
    bool local() const { return is_local(kind_); }

    /// The localization window (the right one for discontinuity contrasts);
    /// null for global kinds.
    const LocalWeighting* weighting() const;
    /// The left window of a discontinuity contrast; null otherwise.
    const LocalWeighting* weighting_minus() const;

    /// m(w, f) for this functional. Derivative kinds require a predictor
    /// with an analytic d-derivative.
    double m(const Point& w, const Predictor& f) const;

    /// The same functional without its localization window (used when a
    /// representer is fit globally and localized afterwards).
    FunctionalSpec unlocalized() const;

private:
    FunctionalSpec(FunctionalKind kind, std::optional<LocalWeighting> w,
                   std::optional<LocalWeighting> w_minus)
        : kind_(kind), weighting_(std::move(w)), weighting_minus_(std::move(w_minus)) {}

    FunctionalKind kind_;
    std::optional<LocalWeighting> weighting_;
    std::optional<LocalWeighting> weighting_minus_;
};

/// One evaluation of the doubly robust moment, split into its parts so that
/// the decomposition psi = m + correction - theta stays an exact identity.
struct MomentValue {
    double m_part = 0.0;
    double correction_part = 0.0;
    double psi = 0.0;
};

MomentValue moment_psi(const Point& w, double y, double theta, const Predictor& gamma,
                       const RieszEstimate& alpha, const FunctionalSpec& spec);

} // namespace dml

#endif
