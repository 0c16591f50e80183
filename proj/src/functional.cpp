#include "dml/functional.hpp"

#include <string>

#include "dml/errors.hpp"
#include "dml/riesz.hpp"

namespace dml {

bool is_local(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::Ate:
        case FunctionalKind::AvgDeriv:
            return false;
        case FunctionalKind::Cate:
        case FunctionalKind::Rdd:
        case FunctionalKind::HetDeriv:
            return true;
    }
    return false;
}

std::string_view functional_name(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::Ate: return "ate";
        case FunctionalKind::Cate: return "cate";
        case FunctionalKind::Rdd: return "rdd";
        case FunctionalKind::AvgDeriv: return "avg-deriv";
        case FunctionalKind::HetDeriv: return "het-deriv";
    }
    return "unknown";
}

FunctionalKind functional_from_name(std::string_view name) {
    if (name == "ate") return FunctionalKind::Ate;
    if (name == "cate") return FunctionalKind::Cate;
    if (name == "rdd") return FunctionalKind::Rdd;
    if (name == "avg-deriv") return FunctionalKind::AvgDeriv;
    if (name == "het-deriv") return FunctionalKind::HetDeriv;
    throw ConfigError("unknown functional '" + std::string(name) +
                      "' (expected ate, cate, rdd, avg-deriv, or het-deriv)");
}

double ms_continuity_exponent(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::Ate:
        case FunctionalKind::Cate:
        case FunctionalKind::Rdd:
            return 1.0;
        case FunctionalKind::AvgDeriv:
        case FunctionalKind::HetDeriv:
            return 0.5;
    }
    return 1.0;
}

FunctionalSpec FunctionalSpec::ate() {
    return FunctionalSpec(FunctionalKind::Ate, std::nullopt, std::nullopt);
}

FunctionalSpec FunctionalSpec::avg_deriv() {
    return FunctionalSpec(FunctionalKind::AvgDeriv, std::nullopt, std::nullopt);
}

FunctionalSpec FunctionalSpec::cate(LocalWeighting weighting) {
    if (weighting.side() != WindowSide::TwoSided) {
        throw ConfigError("cate expects a two-sided localization window");
    }
    return FunctionalSpec(FunctionalKind::Cate, std::move(weighting), std::nullopt);
}

FunctionalSpec FunctionalSpec::het_deriv(LocalWeighting weighting) {
    if (weighting.side() != WindowSide::TwoSided) {
        throw ConfigError("het-deriv expects a two-sided localization window");
    }
    return FunctionalSpec(FunctionalKind::HetDeriv, std::move(weighting), std::nullopt);
}

FunctionalSpec FunctionalSpec::rdd(LocalWeighting right, LocalWeighting left) {
    if (right.side() != WindowSide::Right || left.side() != WindowSide::Left) {
        throw ConfigError("rdd expects a right window and a left window");
    }
    return FunctionalSpec(FunctionalKind::Rdd, std::move(right), std::move(left));
}

const LocalWeighting* FunctionalSpec::weighting() const {
    return weighting_ ? &*weighting_ : nullptr;
}

const LocalWeighting* FunctionalSpec::weighting_minus() const {
    return weighting_minus_ ? &*weighting_minus_ : nullptr;
}

FunctionalSpec FunctionalSpec::unlocalized() const {
    switch (kind_) {
        case FunctionalKind::Ate:
        case FunctionalKind::AvgDeriv:
            return *this;
        case FunctionalKind::Cate:
            return ate();
        case FunctionalKind::HetDeriv:
            return avg_deriv();
        case FunctionalKind::Rdd:
            throw UnsupportedFunctionalError(
                "a discontinuity contrast has no unlocalized counterpart");
    }
    return *this;
}

namespace {

double treatment_contrast(const Point& w, const Predictor& f) {
    Point treated = w;
    treated.d = 1.0;
    Point control = w;
    control.d = 0.0;
    return f.predict(treated) - f.predict(control);
}

double d_derivative_checked(const Point& w, const Predictor& f, FunctionalKind kind) {
    if (!f.has_d_derivative()) {
        throw UnsupportedFunctionalError(std::string(functional_name(kind)) +
                                         " needs a predictor with an analytic d-derivative");
    }
    return f.d_derivative(w);
}

} // namespace

double FunctionalSpec::m(const Point& w, const Predictor& f) const {
    switch (kind_) {
        case FunctionalKind::Ate:
            return treatment_contrast(w, f);
        case FunctionalKind::Cate:
            return weighting_->weight(w.v) * treatment_contrast(w, f);
        case FunctionalKind::Rdd:
            return (weighting_->weight(w.d) - weighting_minus_->weight(w.d)) * f.predict(w);
        case FunctionalKind::AvgDeriv:
            return d_derivative_checked(w, f, kind_);
        case FunctionalKind::HetDeriv:
            return weighting_->weight(w.v) * d_derivative_checked(w, f, kind_);
    }
    return 0.0;
}

MomentValue moment_psi(const Point& w, double y, double theta, const Predictor& gamma,
                       const RieszEstimate& alpha, const FunctionalSpec& spec) {
    MomentValue value;
    value.m_part = spec.m(w, gamma);
    value.correction_part = alpha.evaluate(w) * (y - gamma.predict(w));
    value.psi = value.m_part + value.correction_part - theta;
    return value;
}

} // namespace dml
