#ifndef DML_PREDICTOR_HPP
#define DML_PREDICTOR_HPP

#include <functional>
#include <memory>
#include <utility>

#include "dml/dataset.hpp"
#include "dml/errors.hpp"

namespace dml {

/// A fitted regression surface f : (d, v, x) -> R. Predictors are immutable
/// once constructed; derivative functionals require an analytic d-derivative,
/// which only some implementations can provide.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual double predict(const Point& w) const = 0;

    virtual bool has_d_derivative() const { return false; }

    virtual double d_derivative(const Point&) const {
        throw UnsupportedFunctionalError("this predictor has no analytic d-derivative");
    }
};

class ConstantPredictor final : public Predictor {
public:
    explicit ConstantPredictor(double value) : value_(value) {}
    double predict(const Point&) const override { return value_; }
    bool has_d_derivative() const override { return true; }
    double d_derivative(const Point&) const override { return 0.0; }

private:
    double value_;
};

/// Wraps arbitrary callables, mainly for oracle nuisances and tests. The
/// derivative callable is optional.
class FunctionPredictor final : public Predictor {
public:
    using Fn = std::function<double(const Point&)>;

    explicit FunctionPredictor(Fn fn, Fn d_derivative = nullptr)
        : fn_(std::move(fn)), deriv_(std::move(d_derivative)) {}

    double predict(const Point& w) const override { return fn_(w); }
    bool has_d_derivative() const override { return static_cast<bool>(deriv_); }
    double d_derivative(const Point& w) const override {
        if (!deriv_) return Predictor::d_derivative(w);
        return deriv_(w);
    }

private:
    Fn fn_, deriv_;
};

} // namespace dml

#endif
