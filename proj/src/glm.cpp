#include "novelty/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "novelty/errors.hpp"
#include "novelty/stats.hpp"

namespace novelty {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_count(double v) { return v >= 0.0 && std::floor(v) == v && std::isfinite(v); }

void validate_outcome(Family family, const Eigen::VectorXd& y) {
  if (family == Family::poisson) {
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (!is_count(y(i))) throw UndefinedError(fmt::format("Poisson outcome {} is not a non-negative integer", y(i)));
    if ((y.array() > 0.0).count() == 0) throw UndefinedError("Poisson outcome is identically zero; the MLE diverges");
    return;
  }
  Eigen::Index ones = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw UndefinedError(fmt::format("binary outcome {} is not 0 or 1", y(i)));
    ones += y(i) == 1.0 ? 1 : 0;
  }
  if (ones == 0 || ones == y.size())
    throw UndefinedError(fmt::format("{} outcome has a single class", to_string(family)));
}

void validate_design(const DesignMatrix& design) {
  const auto n = design.rows();
  const auto k = design.cols();
  if (design.outcome.size() != n) throw UndefinedError("outcome length differs from the number of design rows");
  if (static_cast<Eigen::Index>(design.columns.size()) != k)
    throw UndefinedError("column names differ from the number of design columns");
  if (k == 0) throw UndefinedError("design has no columns");
  if (n <= k) throw UndefinedError(fmt::format("design has {} rows for {} columns", n, k));
  if (!design.predictors.allFinite() || !design.outcome.allFinite())
    throw UndefinedError("design contains non-finite values");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.predictors);
  if (qr.rank() < k) {
    // Regress each dropped column on the independent ones to name the whole
    // collinear set, not just the column that happened to be pivoted last.
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::Index r = qr.rank();
    Eigen::MatrixXd basis(n, r);
    for (Eigen::Index i = 0; i < r; ++i) basis.col(i) = design.predictors.col(perm(i));
    std::vector<bool> involved(static_cast<std::size_t>(k), false);
    for (Eigen::Index i = r; i < k; ++i) {
      involved[static_cast<std::size_t>(perm(i))] = true;
      const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(design.predictors.col(perm(i)));
      const double scale = std::max(1.0, coef.cwiseAbs().maxCoeff());
      for (Eigen::Index j = 0; j < r; ++j)
        if (std::abs(coef(j)) > 1e-8 * scale) involved[static_cast<std::size_t>(perm(j))] = true;
    }
    std::string names;
    for (std::size_t c = 0; c < involved.size(); ++c)
      if (involved[c]) names += (names.empty() ? "" : ", ") + design.columns[c];
    throw UndefinedError(fmt::format("design is rank deficient; collinear columns: {}", names));
  }
}

}  // namespace

Eigen::Index DesignMatrix::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Eigen::Index>(i);
  throw std::out_of_range(fmt::format("no design column '{}'", name));
}

std::optional<Eigen::Index> DesignMatrix::intercept() const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == kInterceptColumn) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

Eigen::Index FitResult::index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == column) return static_cast<Eigen::Index>(i);
  throw std::out_of_range(fmt::format("no coefficient '{}'", column));
}

double null_log_likelihood(Family family, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const double ybar = y.mean();
  if (family == Family::poisson) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      ll += -ybar - std::lgamma(y(i) + 1.0);
      if (y(i) > 0.0) ll += y(i) * std::log(ybar);
    }
    return ll;
  }
  const double ones = y.sum();
  double ll = 0.0;
  if (ones > 0.0) ll += ones * std::log(ybar);
  if (n - ones > 0.0) ll += (n - ones) * std::log1p(-ybar);
  return ll;
}

FitResult fit_glm(Family family, const DesignMatrix& design, const FitOptions& options) {
  validate_design(design);
  validate_outcome(family, design.outcome);

  const auto& x = design.predictors;
  const auto& y = design.outcome;
  const auto k = design.cols();

  FitResult fit;
  fit.family = family;
  fit.columns = design.columns;
  fit.n = static_cast<std::size_t>(design.rows());
  fit.null_log_likelihood = null_log_likelihood(family, y);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  if (auto ic = design.intercept()) beta(*ic) = link(family, y.mean());
  double ll = log_likelihood(family, x, y, beta);

  Eigen::VectorXd d1(y.size());
  Eigen::VectorXd weights(y.size());
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    fit.iterations = iter;
    const Eigen::VectorXd eta = x * beta;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const auto t = observation_terms(family, eta(i), y(i));
      d1(i) = t.d1;
      weights(i) = t.fisher;
    }
    const Eigen::MatrixXd info = x.transpose() * weights.asDiagonal() * x;
    const Eigen::VectorXd grad = x.transpose() * d1;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-14) {
      fit.diagnostic = "information matrix became singular (possible perfect separation)";
      break;
    }
    Eigen::VectorXd step = ldlt.solve(grad);

    Eigen::VectorXd next = beta + step;
    double next_ll = log_likelihood(family, x, y, next);
    for (int halving = 0; halving < 30 && !(next_ll >= ll - 1e-12 * std::abs(ll)); ++halving) {
      step *= 0.5;
      next = beta + step;
      next_ll = log_likelihood(family, x, y, next);
    }
    beta = next;
    ll = next_ll;

    if (!beta.allFinite() || !std::isfinite(ll)) {
      fit.diagnostic = "non-finite coefficients";
      break;
    }
    if (beta.norm() > options.separation_norm) {
      fit.diagnostic = fmt::format("coefficient norm exceeded {} (possible perfect separation)", options.separation_norm);
      break;
    }
    if (step.cwiseAbs().maxCoeff() < options.tolerance) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged && fit.diagnostic.empty())
    fit.diagnostic = fmt::format("did not converge within {} iterations", options.max_iterations);

  fit.coefficients = beta;
  fit.log_likelihood = ll;
  fit.model_se = Eigen::VectorXd::Constant(k, kNaN);
  fit.robust_se = Eigen::VectorXd::Constant(k, kNaN);
  if (!fit.converged) return fit;

  const Eigen::MatrixXd info = observed_information(family, x, y, beta);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (!lu.isInvertible()) {
    fit.converged = false;
    fit.diagnostic = "observed information is singular at the estimate";
    return fit;
  }
  fit.model_se = lu.inverse().diagonal().cwiseSqrt();
  fit.robust_covariance = robust_covariance(fit, design, options.correction);
  fit.robust_se = fit.robust_covariance.diagonal().cwiseSqrt();
  return fit;
}

Eigen::MatrixXd robust_covariance(const FitResult& fit, const DesignMatrix& design, RobustCorrection correction) {
  if (!fit.converged) throw ConvergenceError("robust standard errors need a converged fit: " + fit.diagnostic);
  const auto& x = design.predictors;
  const auto& y = design.outcome;
  const Eigen::MatrixXd a = observed_information(fit.family, x, y, fit.coefficients);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw UndefinedError("observed information matrix is singular");
  const Eigen::MatrixXd a_inv = lu.inverse();
  const Eigen::MatrixXd scores = score_contributions(fit.family, x, y, fit.coefficients);
  const Eigen::MatrixXd b = scores.transpose() * scores;
  Eigen::MatrixXd v = a_inv * b * a_inv;
  if (correction == RobustCorrection::small_sample) {
    const double n = static_cast<double>(design.rows());
    const double k = static_cast<double>(design.cols());
    v *= n / (n - k);
  }
  return v;
}

Eigen::VectorXd robust_se(const FitResult& fit, const DesignMatrix& design, RobustCorrection correction) {
  return robust_covariance(fit, design, correction).diagonal().cwiseSqrt();
}

double percent_change(double beta, double sd) {
  if (!(sd > 0.0)) throw UndefinedError("percent change needs a positive standard deviation");
  return 100.0 * std::expm1(beta * sd);
}

double std_coef_probit(double beta_x, double sd_x, double var_linear_predictor) {
  return beta_x * sd_x / std::sqrt(var_linear_predictor + 1.0);
}

double std_coef_probit(const FitResult& fit, const DesignMatrix& design, std::string_view column) {
  if (fit.family != Family::probit) throw std::invalid_argument("fully standardized coefficients need a probit fit");
  if (!fit.converged) throw ConvergenceError("standardized coefficient of an unconverged fit: " + fit.diagnostic);
  const auto c = design.column(column);
  const Eigen::VectorXd col = design.predictors.col(c);
  const double var_x = sample_variance(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
  if (!(var_x > 0.0)) throw UndefinedError(fmt::format("column '{}' has zero variance", column));
  const Eigen::VectorXd xb = design.predictors * fit.coefficients;
  const double var_xb = sample_variance(std::span<const double>(xb.data(), static_cast<std::size_t>(xb.size())));
  return std_coef_probit(fit.coefficient(column), std::sqrt(var_x), var_xb);
}

double mcfadden_r2(double log_likelihood, double null_log_likelihood) {
  if (null_log_likelihood == 0.0) throw UndefinedError("pseudo-R2 undefined: null log-likelihood is 0");
  return 100.0 * (1.0 - log_likelihood / null_log_likelihood);
}

double mcfadden_r2(const FitResult& fit) { return mcfadden_r2(fit.log_likelihood, fit.null_log_likelihood); }

double wald_p_value(double beta, double se) {
  if (!(se > 0.0)) return beta == 0.0 ? 1.0 : 0.0;
  return std::erfc(std::abs(beta / se) / std::numbers::sqrt2);
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

std::vector<CountFrequency> poisson_count_diagnostics(std::span<const double> y) {
  if (y.empty()) throw UndefinedError("count diagnostics need at least one observation");
  int max_count = 0;
  double sum = 0.0;
  for (double v : y) {
    if (!is_count(v)) throw UndefinedError(fmt::format("count {} is not a non-negative integer", v));
    max_count = std::max(max_count, static_cast<int>(v));
    sum += v;
  }
  const double n = static_cast<double>(y.size());
  const double lambda = sum / n;
  std::vector<CountFrequency> out(static_cast<std::size_t>(max_count) + 1);
  for (double v : y) ++out[static_cast<std::size_t>(v)].observed_n;
  for (int k = 0; k <= max_count; ++k) {
    auto& row = out[static_cast<std::size_t>(k)];
    row.count = k;
    row.observed = static_cast<double>(row.observed_n) / n;
    if (lambda == 0.0)
      row.predicted = k == 0 ? 1.0 : 0.0;
    else
      row.predicted = std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
  }
  return out;
}

namespace {
std::vector<double> mid_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}
}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UndefinedError("spearman: vectors differ in length");
  if (x.size() < 2) throw UndefinedError("spearman: need at least two observations");
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedError("spearman: zero rank variance");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace novelty
