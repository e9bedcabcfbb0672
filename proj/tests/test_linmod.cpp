#include <doctest.h>

#include <cmath>

#include "citepred/linmod.hpp"
#include "citepred/random.hpp"
#include "oracles.hpp"

using namespace citepred;
using doctest::Approx;

namespace {

Eigen::MatrixXd random_design(CounterRng& rng, Eigen::Index n, Eigen::Index p) {
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) x(i, j) = rng.normal();
  }
  return x;
}

}  // namespace

TEST_CASE("exact linear data") {
  Eigen::MatrixXd x(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i + 1.0;
    y(i) = 2.0 * (i + 1.0);
  }
  const auto fit = fit_ols(x, y, {"Intercept", "x"});
  CHECK(fit.beta(0) == Approx(0.0).epsilon(1e-12));
  CHECK(fit.beta(1) == Approx(2.0).epsilon(1e-12));
  CHECK(fit.r2 == Approx(1.0));
  CHECK(fit.sigma_hat < 1e-12);

  Eigen::MatrixXd row(1, 2);
  row << 1.0, 3.0;
  CHECK(predict_lm(fit, row)(0) == Approx(6.0));
  CHECK(predict_lm(fit, row, PredictionScale::raw)(0) == Approx(std::sinh(6.0)));
}

TEST_CASE("matches the normal equations on random problems") {
  CounterRng rng(2024, 7);
  const Eigen::MatrixXd x = random_design(rng, 200, 10);
  Eigen::VectorXd y(200);
  for (Eigen::Index i = 0; i < 200; ++i) y(i) = x.row(i).sum() + rng.normal();
  const auto fit = fit_ols(x, y);
  const Eigen::VectorXd ref = oracle::normal_equations(x, y);
  CHECK((fit.beta - ref).norm() <= 1e-8 * ref.norm());
}

TEST_CASE("parameter recovery") {
  CounterRng rng(31, 0);
  const Eigen::Index n = 10000;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  const Eigen::Vector3d beta_star(1.760, 0.722, -0.480);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = std::asinh(static_cast<double>(rng.poisson(30.0)));
    x(i, 2) = std::asinh(static_cast<double>(rng.poisson(10.0)));
    y(i) = x.row(i).dot(beta_star) + 0.1 * rng.normal();
  }
  const auto fit = fit_ols(x, y, {"Intercept", "References", "Age"});
  for (int j = 0; j < 3; ++j) CHECK(std::fabs(fit.beta(j) - beta_star(j)) < 0.02);
}

TEST_CASE("inference identities") {
  CounterRng rng(5, 5);
  const Eigen::MatrixXd x = random_design(rng, 120, 5);
  Eigen::VectorXd y(120);
  for (Eigen::Index i = 0; i < 120; ++i) y(i) = 0.5 * x(i, 1) - 0.2 * x(i, 3) + rng.normal();
  const auto fit = fit_ols(x, y);
  CHECK(fit.df_resid == 115);
  CHECK(fit.df_model == 4);
  CHECK(fit.sigma_hat * fit.sigma_hat * static_cast<double>(fit.df_resid) == Approx(fit.rss).epsilon(1e-12));
  CHECK(fit.r2 >= fit.adj_r2);
  CHECK(fit.sigma_mle() == Approx(std::sqrt(fit.rss / 120.0)));
  for (Eigen::Index j = 0; j < 5; ++j) {
    CHECK(fit.p_values(j) >= 0.0);
    CHECK(fit.p_values(j) <= 1.0);
    CHECK(fit.t_stats(j) == Approx(fit.beta(j) / fit.std_errors(j)));
  }
  // Standard errors against σ̂²(XᵀX)⁻¹ formed explicitly.
  const Eigen::MatrixXd cov = fit.sigma_hat * fit.sigma_hat * (x.transpose() * x).inverse();
  for (Eigen::Index j = 0; j < 5; ++j) CHECK(fit.std_errors(j) == Approx(std::sqrt(cov(j, j))).epsilon(1e-9));
  // F from R²: (R²/k)/((1−R²)/df).
  CHECK(fit.f_stat == Approx((fit.r2 / 4.0) / ((1.0 - fit.r2) / 115.0)).epsilon(1e-10));

  const Eigen::VectorXd resid = y - x * fit.beta;
  CHECK((x.transpose() * resid).norm() <= 1e-8 * (x.transpose() * y).norm());
  CHECK(std::fabs(predict_lm(fit, x).mean() - y.mean()) < 1e-10);
  CHECK(std::fabs(resid.mean()) < 1e-10);
}

TEST_CASE("rank deficiency names the columns") {
  CounterRng rng(8, 8);
  Eigen::MatrixXd x = random_design(rng, 50, 4);
  x.col(3) = 2.0 * x.col(1) - x.col(2);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(50);
  try {
    fit_ols(x, y, {"Intercept", "a", "b", "c"});
    FAIL("expected rank deficiency");
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK((msg.find("a") != std::string::npos || msg.find("b") != std::string::npos ||
           msg.find("c") != std::string::npos));
  }
  CHECK_THROWS_AS(fit_ols(x.topRows(4), y.head(4)), ValidationError);
}

TEST_CASE("design-matrix entry points") {
  DesignMatrix dm;
  dm.x = Eigen::MatrixXd::Ones(4, 1);
  dm.y = Eigen::VectorXd::LinSpaced(4, 0.0, 3.0);
  dm.column_names = {"Intercept"};
  dm.row_ids = {"a", "b", "c", "d"};
  dm.response_kind = ResponseKind::citation_count;
  CHECK_THROWS_AS(fit_ols(dm), ConfigError);
  dm.response_kind = ResponseKind::weighted_sjr;
  const auto fit = fit_ols(dm);
  CHECK(fit.beta(0) == Approx(1.5));
  CHECK(std::isnan(fit.f_stat));

  DesignMatrix other = dm;
  other.column_names = {"Other"};
  CHECK_THROWS_AS(predict_lm(fit, other), ShapeError);
  CHECK_THROWS_AS(predict_lm(fit, Eigen::MatrixXd::Ones(2, 3)), ShapeError);

  // Intercept at 1.760 and all other covariates zero.
  FittedLinearModel table;
  table.beta = Eigen::Vector3d(1.760, 0.722, -0.480);
  table.column_names = {"Intercept", "References", "Age"};
  CHECK(predict_lm(table, Eigen::RowVector3d(1.0, 0.0, 0.0))(0) == Approx(1.760));
}

TEST_CASE("coefficient interpretation") {
  for (double b : {0.722, 0.0, -0.480}) {
    const auto r = interpret_lm_coefficient(b);
    CHECK(r.percent_effect_large_x == b);
    CHECK(r.unit_effect_small_x == b);
  }
}

TEST_CASE("gaussian nll") {
  Eigen::VectorXd y(2), mu(2);
  y << 0.0, 1.0;
  mu << 0.0, 0.0;
  // 2·½log(2π) + 1/2 for σ = 1
  CHECK(gaussian_nll(y, mu, 1.0) == Approx(std::log(2.0 * M_PI) + 0.5).epsilon(1e-14));
  CHECK_THROWS_AS(gaussian_nll(y, mu, 0.0), DomainError);
}
