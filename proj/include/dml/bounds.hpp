#ifndef DML_BOUNDS_HPP
#define DML_BOUNDS_HPP

#include "dml/dataset.hpp"
#include "dml/predictor.hpp"
#include "dml/riesz.hpp"

#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace dml {

/// Everything the finite-sample error bounds consume. Rates and moment
/// parameters are population-level inputs; callers may plug in empirical
/// estimates. Unknown projected rates stay at infinity, which makes any term
/// containing them drop out of minima.
struct BoundInputs {
    double folds = 5;    // number of cross-fitting folds L
    double n = 0;        // sample size
    double q = 1.0;      // mean-square continuity exponent
    double Q_bar = 0.0;  // continuity constant
    double sigma_bar = 0.0; // conditional noise bound
    double alpha_bar = 0.0; // sup norm of the true representer
    double alpha_trim = 0.0; // sup norm imposed on the estimated representer
    double epsilon = 0.05;       // tolerated failure probability, location bound
    double epsilon_prime = 0.05; // tolerated failure probability, variance bound
    double r_gamma = 0.0; // mean square error of the regression
    double r_alpha = 0.0; // mean square error of the representer
    double p_gamma = std::numeric_limits<double>::infinity(); // projected rate
    double p_alpha = std::numeric_limits<double>::infinity(); // projected rate
    double sigma = 0.0; // oracle moment standard deviation
    double kappa = 0.0; // oracle moment third-moment scale
    double zeta = 0.0;  // oracle moment fourth-moment scale
    double theta_error = 0.0; // realized estimation error of the point estimate

    void validate() const;
};

/// Gaussian approximation penalty using only mean square rates.
double delta_basic(const BoundInputs& in);

/// Sharper penalty available when the estimated representer is censored and
/// projected rates are known.
double delta_refined(const BoundInputs& in);

double berry_esseen_term(double kappa, double sigma, double n);

/// Full Kolmogorov-distance bound: the Berry-Esseen term plus the chosen
/// penalty over sqrt(2 pi) plus the failure probability.
double gaussian_remainder(const BoundInputs& in, bool refined);

struct VarianceBound {
    double delta_prime = 0.0;
    double delta_dprime = 0.0;
    double total = 0.0; // bound on |sigma_hat^2 - sigma^2|
};

VarianceBound variance_bound(const BoundInputs& in);

/// Standardized localization bias sqrt(n) C h^v / sigma_h.
double approximation_error(double C, double h, double v_order, double n, double sigma_h);

/// The four interval-validity conditions evaluated along a sequence of
/// inputs, plus whether each trajectory is non-increasing.
struct CorollaryReport {
    std::vector<double> regularity; // {(kappa/sigma)^3 + zeta^2} / sqrt(n)
    std::vector<double> condition1; // (sqrt(Q) + alpha_bar/sigma + alpha_trim) R_gamma^{q/2}
    std::vector<double> condition2; // sigma_bar sqrt(R_alpha)
    std::vector<double> condition3; // min of the three coupling terms, over sigma
    bool regularity_ok = false;
    bool condition1_ok = false;
    bool condition2_ok = false;
    bool condition3_ok = false;
};

CorollaryReport corollary_checklist(std::span<const BoundInputs> sequence);

/// Held-out mean square error of cross-fitted nuisances against reference
/// functions, per fold and averaged.
struct RateEstimates {
    double r_gamma = 0.0;
    double r_alpha = 0.0;
    std::vector<double> per_fold_gamma;
    std::vector<double> per_fold_alpha;
};

RateEstimates empirical_rates(std::span<const std::shared_ptr<const Predictor>> gammas,
                              std::span<const std::shared_ptr<const RieszEstimate>> alphas,
                              const Predictor& gamma0, const RieszEstimate& alpha0,
                              const Dataset& fresh);

/// Least squares slope of log(y) on log(x); inputs must be positive.
double log_log_slope(std::span<const double> x, std::span<const double> y);

} // namespace dml

#endif
