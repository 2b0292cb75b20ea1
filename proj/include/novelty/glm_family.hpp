#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace novelty {

enum class Family { poisson, logistic, probit };

constexpr std::string_view to_string(Family family) {
  switch (family) {
    case Family::poisson: return "poisson";
    case Family::logistic: return "logistic";
    case Family::probit: return "probit";
  }
  return "poisson";
}

constexpr std::optional<Family> parse_family(std::string_view text) {
  for (auto f : {Family::poisson, Family::logistic, Family::probit})
    if (to_string(f) == text) return f;
  return std::nullopt;
}

namespace detail {

template <typename Scalar>
Scalar log_normal_cdf(Scalar x) {
  using std::erfc;
  using std::log;
  if (x > Scalar(-30)) return log(Scalar(0.5) * erfc(-x / std::numbers::sqrt2_v<Scalar>));
  // Asymptotic expansion of the Mills ratio in the far lower tail.
  const Scalar x2 = x * x;
  return -Scalar(0.5) * x2 - log(-x) - Scalar(0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar>) +
         log(Scalar(1) - Scalar(1) / x2 + Scalar(3) / (x2 * x2));
}

/// phi(x) / Phi(x), finite for all x.
template <typename Scalar>
Scalar inverse_mills(Scalar x) {
  using std::exp;
  using std::log;
  const Scalar log_phi = -Scalar(0.5) * x * x - Scalar(0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar>);
  return exp(log_phi - log_normal_cdf(x));
}

template <typename Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return x > Scalar(0) ? x + log1p(exp(-x)) : log1p(exp(x));
}

}  // namespace detail

/// Per-observation log-likelihood of outcome y at linear predictor eta, and
/// its first and second derivatives in eta. `fisher` is the expected
/// information weight used by the IRLS step.
template <typename Scalar>
struct ObservationTerms {
  Scalar log_lik;
  Scalar d1;
  Scalar d2;
  Scalar fisher;
};

template <typename Scalar>
ObservationTerms<Scalar> observation_terms(Family family, Scalar eta, Scalar y) {
  using std::exp;
  using std::lgamma;
  switch (family) {
    case Family::poisson: {
      const Scalar mu = exp(eta);
      return {y * eta - mu - lgamma(y + Scalar(1)), y - mu, -mu, mu};
    }
    case Family::logistic: {
      const Scalar p = Scalar(1) / (Scalar(1) + exp(-eta));
      const Scalar w = p * (Scalar(1) - p);
      return {y * eta - detail::softplus(eta), y - p, -w, w};
    }
    case Family::probit: {
      const Scalar lam_pos = detail::inverse_mills(eta);   // d/deta log Phi(eta)
      const Scalar lam_neg = detail::inverse_mills(-eta);  // -d/deta log Phi(-eta)
      const Scalar ll = y * detail::log_normal_cdf(eta) + (Scalar(1) - y) * detail::log_normal_cdf(-eta);
      const Scalar d1 = y * lam_pos - (Scalar(1) - y) * lam_neg;
      const Scalar d2 = -y * lam_pos * (eta + lam_pos) - (Scalar(1) - y) * lam_neg * (lam_neg - eta);
      // phi^2 / (Phi (1 - Phi)) == lam_pos * lam_neg
      return {ll, d1, d2, lam_pos * lam_neg};
    }
  }
  return {};
}

/// Inverse link applied to a mean outcome: the natural starting intercept.
template <typename Scalar>
Scalar link(Family family, Scalar mean) {
  using std::log;
  switch (family) {
    case Family::poisson: return log(mean);
    case Family::logistic: return log(mean / (Scalar(1) - mean));
    case Family::probit: {
      // Phi^-1 by Newton iterations on log Phi; the mean is bounded away from 0/1.
      Scalar x = Scalar(0);
      for (int i = 0; i < 60; ++i) {
        using std::exp;
        const Scalar phi_x = exp(-Scalar(0.5) * x * x) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
        const Scalar f = exp(detail::log_normal_cdf(x)) - mean;
        if (phi_x == Scalar(0)) break;
        x -= f / phi_x;
      }
      return x;
    }
  }
  return Scalar(0);
}

template <typename DerivedX, typename DerivedY, typename DerivedB>
typename DerivedX::Scalar log_likelihood(Family family, const Eigen::MatrixBase<DerivedX>& x,
                                         const Eigen::MatrixBase<DerivedY>& y,
                                         const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eta = x * beta;
  Scalar total(0);
  for (Eigen::Index i = 0; i < eta.size(); ++i) total += observation_terms(family, eta(i), y(i)).log_lik;
  return total;
}

/// Rows are the per-observation gradients d1_i * x_i.
template <typename DerivedX, typename DerivedY, typename DerivedB>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> score_contributions(
    Family family, const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
    const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eta = x * beta;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d1(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) d1(i) = observation_terms(family, eta(i), y(i)).d1;
  return d1.asDiagonal() * x;
}

/// Negative Hessian of the log-likelihood.
template <typename DerivedX, typename DerivedY, typename DerivedB>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, Eigen::Dynamic> observed_information(
    Family family, const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedY>& y,
    const Eigen::MatrixBase<DerivedB>& beta) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eta = x * beta;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) w(i) = -observation_terms(family, eta(i), y(i)).d2;
  return x.transpose() * w.asDiagonal() * x;
}

}  // namespace novelty
