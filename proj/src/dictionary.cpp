#include "dml/dictionary.hpp"

#include <stdexcept>

#include "dml/errors.hpp"

namespace dml {

namespace {

void enumerate_degree(std::vector<std::vector<std::uint8_t>>& out, std::vector<std::uint8_t>& cur,
                      std::size_t var, unsigned remaining) {
    if (var + 1 == cur.size()) {
        cur[var] = static_cast<std::uint8_t>(remaining);
        out.push_back(cur);
        return;
    }
    for (unsigned e = 0; e <= remaining; ++e) {
        cur[var] = static_cast<std::uint8_t>(e);
        enumerate_degree(out, cur, var + 1, remaining - e);
    }
}

double int_pow(double base, unsigned exp) {
    double result = 1.0;
    while (exp > 0) {
        if (exp & 1u) result *= base;
        base *= base;
        exp >>= 1u;
    }
    return result;
}

} // namespace

Dictionary::Dictionary(Family family, bool has_v, std::size_t x_dim)
    : family_(family), has_v_(has_v), x_dim_(x_dim), var_count_(1 + (has_v ? 1 : 0) + x_dim) {
    if (family == Family::LowDim) {
        max_degree_ = 2;
        exponents_.emplace_back(var_count_, 0); // constant
        for (std::size_t i = 0; i < var_count_; ++i) {
            std::vector<std::uint8_t> e(var_count_, 0);
            e[i] = 1;
            exponents_.push_back(std::move(e));
        }
        for (std::size_t i = 0; i < var_count_; ++i) {
            for (std::size_t j = i + 1; j < var_count_; ++j) {
                std::vector<std::uint8_t> e(var_count_, 0);
                e[i] = 1;
                e[j] = 1;
                exponents_.push_back(std::move(e));
            }
        }
    } else {
        max_degree_ = 4;
        std::vector<std::uint8_t> cur(var_count_, 0);
        for (unsigned degree = 0; degree <= max_degree_; ++degree) {
            enumerate_degree(exponents_, cur, 0, degree);
        }
    }
}

void Dictionary::gather(const Point& w, double* vars) const {
    std::size_t k = 0;
    vars[k++] = w.d;
    if (has_v_) vars[k++] = w.v;
    if (w.x.size() != x_dim_) {
        throw ConfigError("observation has " + std::to_string(w.x.size()) +
                          " covariates, dictionary expects " + std::to_string(x_dim_));
    }
    for (double value : w.x) vars[k++] = value;
}

void Dictionary::expand(const Point& w, double* out) const {
    double vars[64];
    gather(w, vars);
    // powers[v * (max_degree_+1) + e] = vars[v]^e
    double powers[64 * 5];
    const unsigned cols = max_degree_ + 1;
    for (std::size_t v = 0; v < var_count_; ++v) {
        powers[v * cols] = 1.0;
        for (unsigned e = 1; e < cols; ++e) {
            powers[v * cols + e] = powers[v * cols + e - 1] * vars[v];
        }
    }
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
        double value = 1.0;
        const auto& exps = exponents_[j];
        for (std::size_t v = 0; v < var_count_; ++v) {
            value *= powers[v * cols + exps[v]];
        }
        out[j] = value;
    }
}

std::vector<double> Dictionary::expand(const Point& w) const {
    std::vector<double> out(size());
    expand(w, out.data());
    return out;
}

void Dictionary::expand_d_derivative(const Point& w, double* out) const {
    double vars[64];
    gather(w, vars);
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
        const auto& exps = exponents_[j];
        const unsigned ed = exps[0];
        if (ed == 0) {
            out[j] = 0.0;
            continue;
        }
        double value = static_cast<double>(ed) * int_pow(vars[0], ed - 1);
        for (std::size_t v = 1; v < var_count_; ++v) {
            value *= int_pow(vars[v], exps[v]);
        }
        out[j] = value;
    }
}

std::vector<double> Dictionary::expand_d_derivative(const Point& w) const {
    std::vector<double> out(size());
    expand_d_derivative(w, out.data());
    return out;
}

double Dictionary::eval_basis(std::size_t j, const Point& w) const {
    double vars[64];
    gather(w, vars);
    const auto& exps = exponents_[j];
    double value = 1.0;
    for (std::size_t v = 0; v < var_count_; ++v) value *= int_pow(vars[v], exps[v]);
    return value;
}

Eigen::MatrixXd Dictionary::expand_rows(const Dataset& data) const {
    Eigen::MatrixXd features(data.size(), size());
    std::vector<double> row(size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        expand(data.point(i), row.data());
        for (std::size_t j = 0; j < size(); ++j) features(i, j) = row[j];
    }
    return features;
}

std::shared_ptr<const Dictionary> make_dictionary(Dictionary::Family family, bool has_v,
                                                  std::size_t x_dim) {
    if (1 + (has_v ? 1 : 0) + x_dim > 64) {
        throw ConfigError("dictionary supports at most 64 variables");
    }
    return std::make_shared<const Dictionary>(family, has_v, x_dim);
}

DictionaryLinearPredictor::DictionaryLinearPredictor(std::shared_ptr<const Dictionary> dict,
                                                     Eigen::VectorXd coef)
    : dict_(std::move(dict)), coef_(std::move(coef)) {
    if (static_cast<std::size_t>(coef_.size()) != dict_->size()) {
        throw ConfigError("coefficient vector does not match dictionary size");
    }
}

double DictionaryLinearPredictor::predict(const Point& w) const {
    std::vector<double> basis(dict_->size());
    dict_->expand(w, basis.data());
    double value = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) value += coef_[j] * basis[j];
    return value;
}

double DictionaryLinearPredictor::d_derivative(const Point& w) const {
    std::vector<double> basis(dict_->size());
    dict_->expand_d_derivative(w, basis.data());
    double value = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) value += coef_[j] * basis[j];
    return value;
}

} // namespace dml
