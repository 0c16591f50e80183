#ifndef DML_DICTIONARY_HPP
#define DML_DICTIONARY_HPP

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "dml/predictor.hpp"

namespace dml {

/// Polynomial basis over the variables (d[, v], x1..xp). The low-dimensional
/// family is the constant, the raw variables, and all pairwise cross
/// products; the high-dimensional family is every monomial of total degree
/// at most four. The constant is always the first entry, and every basis
/// function carries an analytic partial derivative in d.
class Dictionary {
public:
    enum class Family { LowDim, HighDim };

    Dictionary(Family family, bool has_v, std::size_t x_dim);

    Family family() const { return family_; }
    std::size_t size() const { return exponents_.size(); }
    std::size_t var_count() const { return var_count_; }
    bool has_v() const { return has_v_; }

    void expand(const Point& w, double* out) const;
    std::vector<double> expand(const Point& w) const;

    /// Entrywise d/dd of the basis at w.
    void expand_d_derivative(const Point& w, double* out) const;
    std::vector<double> expand_d_derivative(const Point& w) const;

    double eval_basis(std::size_t j, const Point& w) const;

    /// Feature matrix of expanded rows, one dataset row per matrix row.
    Eigen::MatrixXd expand_rows(const Dataset& data) const;

private:
    void gather(const Point& w, double* vars) const;

    Family family_;
    bool has_v_;
    std::size_t x_dim_;
    std::size_t var_count_;
    unsigned max_degree_;
    std::vector<std::vector<std::uint8_t>> exponents_; // per basis fn, per variable
};

std::shared_ptr<const Dictionary> make_dictionary(Dictionary::Family family, bool has_v,
                                                  std::size_t x_dim);

/// f(w) = coef . b(w), with the exact analytic d-derivative of the basis.
class DictionaryLinearPredictor final : public Predictor {
public:
    DictionaryLinearPredictor(std::shared_ptr<const Dictionary> dict, Eigen::VectorXd coef);

    double predict(const Point& w) const override;
    bool has_d_derivative() const override { return true; }
    double d_derivative(const Point& w) const override;

    const Eigen::VectorXd& coefficients() const { return coef_; }
    const Dictionary& dictionary() const { return *dict_; }

private:
    std::shared_ptr<const Dictionary> dict_;
    Eigen::VectorXd coef_;
};

} // namespace dml

#endif
