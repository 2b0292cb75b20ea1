#include <doctest.h>

#include <cmath>
#include <random>

#include "novelty/errors.hpp"
#include "glm_oracles.hpp"
#include "novelty/glm.hpp"

using namespace novelty;

using oracle::make_design;
using oracle::random_design;

namespace {
DesignMatrix design(std::vector<double> y, std::vector<std::vector<double>> xs = {},
                    std::vector<std::string> names = {}) {
  return make_design(std::move(y), std::move(xs), std::move(names));
}
}  // namespace

TEST_CASE("Poisson closed-form estimates") {
  auto fit = fit_poisson(design({0, 1, 2, 3}));
  REQUIRE(fit.converged);
  CHECK(fit.coefficient(kInterceptColumn) == doctest::Approx(std::log(1.5)).epsilon(1e-12));

  auto dummy = fit_poisson(design({1, 1, 2, 2}, {{0, 0, 1, 1}}, {"d"}));
  REQUIRE(dummy.converged);
  CHECK(dummy.coefficient("d") == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(std::abs(dummy.coefficient(kInterceptColumn)) < 1e-12);

  CHECK_THROWS_AS(fit_poisson(design({0, 0, 0})), UndefinedError);
  CHECK_THROWS_AS(fit_poisson(design({0, 1.5, 0})), UndefinedError);
}

TEST_CASE("binary closed-form estimates") {
  auto logit = fit_logistic(design({1, 0, 0, 0}));
  REQUIRE(logit.converged);
  CHECK(logit.coefficient(kInterceptColumn) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));

  auto probit = fit_probit(design({1, 0, 1, 0}));
  REQUIRE(probit.converged);
  CHECK(std::abs(probit.coefficient(kInterceptColumn)) < 1e-12);

  CHECK_THROWS_AS(fit_logistic(design({1, 1, 1})), UndefinedError);
  CHECK_THROWS_AS(fit_probit(design({0, 0, 0})), UndefinedError);
  CHECK_THROWS_AS(fit_logistic(design({0, 2, 1})), UndefinedError);
}

TEST_CASE("null log-likelihood matches the intercept-only fit") {
  for (Family f : {Family::poisson, Family::logistic, Family::probit}) {
    auto d = random_design(f, 4, 300);
    DesignMatrix only;
    only.outcome = d.outcome;
    only.predictors = d.predictors.leftCols(1);
    only.columns = {std::string(kInterceptColumn)};
    auto fit = fit_glm(f, only);
    REQUIRE(fit.converged);
    CHECK(fit.log_likelihood == doctest::Approx(null_log_likelihood(f, d.outcome)).epsilon(1e-12));
    CHECK(mcfadden_r2(fit) == doctest::Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("robust standard errors in closed form") {
  auto constant = design({3, 3, 3});
  auto fit = fit_poisson(constant);
  REQUIRE(fit.converged);
  CHECK(robust_se(fit, constant)(0) == doctest::Approx(0.0).epsilon(1e-12));

  auto two = design({0, 2});
  auto fit2 = fit_poisson(two);
  REQUIRE(fit2.converged);
  CHECK(robust_se(fit2, two)(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(robust_se(fit2, two, RobustCorrection::hc0)(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(fit2.robust_se(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("information and sandwich match finite differences") {
  for (Family f : {Family::poisson, Family::logistic, Family::probit}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto d = random_design(f, seed, 150);
      auto fit = fit_glm(f, d);
      REQUIRE(fit.converged);
      const Eigen::MatrixXd analytic = observed_information(f, d.predictors, d.outcome, fit.coefficients);
      const Eigen::MatrixXd numeric = oracle::fd_information(f, d, fit.coefficients);
      CHECK((analytic - numeric).cwiseAbs().maxCoeff() / numeric.cwiseAbs().maxCoeff() < 1e-5);
      const auto se = oracle::sandwich_se(f, d, fit.coefficients);
      for (Eigen::Index j = 0; j < d.cols(); ++j) CHECK(std::abs(fit.robust_se(j) - se(j)) < 1e-6);
    }
  }
}

TEST_CASE("score equations hold at the estimate") {
  for (Family f : {Family::poisson, Family::logistic, Family::probit}) {
    auto d = random_design(f, 21, 500);
    auto fit = fit_glm(f, d);
    REQUIRE(fit.converged);
    CHECK(oracle::gradient(f, d, fit.coefficients).cwiseAbs().maxCoeff() < 1e-8);
    const Eigen::VectorXd eta = d.predictors * fit.coefficients;
    if (f == Family::poisson) CHECK(eta.array().exp().sum() == doctest::Approx(d.outcome.sum()).epsilon(1e-10));
    if (f == Family::logistic)
      CHECK((1.0 / (1.0 + (-eta.array()).exp())).sum() == doctest::Approx(d.outcome.sum()).epsilon(1e-10));
  }
}

TEST_CASE("percent change") {
  CHECK(percent_change(0.0, 2.0) == 0.0);
  CHECK(percent_change(std::log(2.0), 1.0) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(percent_change(0.59, 1.38) == doctest::Approx(125.7).epsilon(1e-3));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> beta(-3, 3), sd(0.01, 3);
  for (int i = 0; i < 1000; ++i) {
    const double b = beta(rng), s = sd(rng);
    CHECK(std::abs((1 + percent_change(b, s) / 100) * (1 + percent_change(-b, s) / 100) - 1) < 1e-12);
  }
  CHECK_THROWS_AS(percent_change(1.0, 0.0), UndefinedError);
}

TEST_CASE("fully standardized probit coefficient") {
  CHECK(std_coef_probit(0.5, 2.0, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std_coef_probit(0.5, 2.0, 1.0) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(std_coef_probit(0.0, 2.0, 1.0) == 0.0);

  // latent y* = 0.8 x + e with sd(x) = 1.5: population value 1.2 / sqrt(1.44 + 1)
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  const int n = 20000;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = 1.5 * z(rng);
    y[i] = 0.8 * x[i] + z(rng) > 0 ? 1.0 : 0.0;
  }
  auto d = design(y, {x});
  auto fit = fit_probit(d);
  REQUIRE(fit.converged);
  CHECK(std_coef_probit(fit, d, "x1") == doctest::Approx(1.2 / std::sqrt(2.44)).epsilon(0.02));
}

TEST_CASE("McFadden pseudo R2") {
  CHECK(mcfadden_r2(-50.0, -100.0) == doctest::Approx(50.0));
  CHECK(mcfadden_r2(-100.0, -100.0) == 0.0);
  CHECK_THROWS_AS(mcfadden_r2(0.0, 0.0), UndefinedError);
}

TEST_CASE("Wald p-values and stars") {
  CHECK(wald_p_value(1.959963984540054, 1.0) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(wald_p_value(0.0, 1.0) == 1.0);
  CHECK(significance_stars(0.0005) == "***");
  CHECK(significance_stars(0.005) == "**");
  CHECK(significance_stars(0.03) == "*");
  CHECK(significance_stars(0.2) == "");
}

TEST_CASE("count diagnostics") {
  std::vector<double> y{0, 0, 1, 1};
  auto rows = poisson_count_diagnostics(y);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].observed == 0.5);
  CHECK(rows[1].observed == 0.5);
  CHECK(rows[0].predicted == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(rows[0].predicted == doctest::Approx(0.6065).epsilon(1e-4));
  CHECK(rows[1].predicted == doctest::Approx(0.3033).epsilon(1e-3));
  CHECK(rows[0].observed_n + rows[1].observed_n == y.size());
}

TEST_CASE("Spearman correlation") {
  std::vector<double> x{1, 2, 3}, same{1, 2, 3}, rev{3, 2, 1}, mixed{3, 1, 2};
  CHECK(spearman(x, same) == doctest::Approx(1.0));
  CHECK(spearman(x, rev) == doctest::Approx(-1.0));
  CHECK(spearman(x, mixed) == doctest::Approx(-0.5));
  std::vector<double> ties{1, 1, 2}, other{1, 2, 3};
  CHECK(spearman(ties, other) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("perfect separation is reported, not fitted") {
  auto d = design({0, 0, 1, 1}, {{-2, -1, 1, 2}});
  auto fit = fit_logistic(d);
  CHECK_FALSE(fit.converged);
  CHECK_FALSE(fit.diagnostic.empty());
  CHECK(std::isnan(fit.robust_se(1)));
  CHECK_THROWS_AS(robust_se(fit, d), ConvergenceError);
}

TEST_CASE("rank deficiency names the collinear columns") {
  auto d = design({1, 2, 3, 1, 2}, {{1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}}, {"alpha", "beta"});
  try {
    fit_poisson(d);
    FAIL("expected rank deficiency");
  } catch (const UndefinedError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("alpha") != std::string::npos);
    CHECK(msg.find("beta") != std::string::npos);
  }
}
