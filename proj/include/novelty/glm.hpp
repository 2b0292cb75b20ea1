#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "novelty/glm_family.hpp"

namespace novelty {

inline constexpr std::string_view kInterceptColumn = "(intercept)";

struct DesignMatrix {
  Eigen::VectorXd outcome;
  Eigen::MatrixXd predictors;
  std::vector<std::string> columns;

  Eigen::Index rows() const { return predictors.rows(); }
  Eigen::Index cols() const { return predictors.cols(); }
  /// Throws std::out_of_range for unknown names.
  Eigen::Index column(std::string_view name) const;
  std::optional<Eigen::Index> intercept() const;
};

enum class RobustCorrection {
  small_sample,  // HC0 scaled by n / (n - k)
  hc0,
};

struct FitOptions {
  double tolerance = 1e-10;  // on max |delta beta|
  int max_iterations = 100;
  double separation_norm = 1e3;
  RobustCorrection correction = RobustCorrection::small_sample;
};

struct FitResult {
  Family family = Family::poisson;
  std::vector<std::string> columns;
  Eigen::VectorXd coefficients;
  Eigen::VectorXd model_se;
  Eigen::VectorXd robust_se;
  Eigen::MatrixXd robust_covariance;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  std::size_t n = 0;
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;  // non-empty when !converged

  Eigen::Index index(std::string_view column) const;
  double coefficient(std::string_view column) const { return coefficients(index(column)); }
  double robust_error(std::string_view column) const { return robust_se(index(column)); }
};

/// Maximum-likelihood fit by iteratively reweighted least squares. Throws
/// UndefinedError on invalid outcomes, a single outcome class, an all-zero
/// count outcome or a rank-deficient design. Non-convergence (including
/// suspected separation) is reported through FitResult::converged.
FitResult fit_glm(Family family, const DesignMatrix& design, const FitOptions& options = {});

inline FitResult fit_poisson(const DesignMatrix& d, const FitOptions& o = {}) { return fit_glm(Family::poisson, d, o); }
inline FitResult fit_logistic(const DesignMatrix& d, const FitOptions& o = {}) { return fit_glm(Family::logistic, d, o); }
inline FitResult fit_probit(const DesignMatrix& d, const FitOptions& o = {}) { return fit_glm(Family::probit, d, o); }

/// Sandwich covariance A^-1 B A^-1 with A the observed information and B the
/// sum of outer products of per-observation scores. Throws ConvergenceError
/// for unconverged fits and UndefinedError for a singular A.
Eigen::MatrixXd robust_covariance(const FitResult& fit, const DesignMatrix& design,
                                  RobustCorrection correction = RobustCorrection::small_sample);
Eigen::VectorXd robust_se(const FitResult& fit, const DesignMatrix& design,
                          RobustCorrection correction = RobustCorrection::small_sample);

/// 100 (exp(beta sd) - 1): percent change in the expected count (or odds)
/// for a one-SD increase.
double percent_change(double beta, double sd);

/// beta_x sd(x) / sqrt(var(X beta) + 1).
double std_coef_probit(double beta_x, double sd_x, double var_linear_predictor);
double std_coef_probit(const FitResult& fit, const DesignMatrix& design, std::string_view column);

/// McFadden pseudo-R^2 in percent.
double mcfadden_r2(const FitResult& fit);
double mcfadden_r2(double log_likelihood, double null_log_likelihood);

/// Log-likelihood of the intercept-only model, computed in closed form.
double null_log_likelihood(Family family, const Eigen::VectorXd& outcome);

/// Two-sided Wald p-value of beta / se.
double wald_p_value(double beta, double se);
/// "***" p < 0.001, "**" p < 0.01, "*" p < 0.05, else "".
std::string significance_stars(double p);

struct CountFrequency {
  int count = 0;
  std::size_t observed_n = 0;
  double observed = 0.0;   // observed_n / n
  double predicted = 0.0;  // Poisson pmf at the intercept-only MLE
};

/// Observed vs intercept-only Poisson frequencies for k = 0..max(y).
std::vector<CountFrequency> poisson_count_diagnostics(std::span<const double> y);

/// Pearson correlation of mid-ranks.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace novelty
