#include <catch_amalgamated.hpp>

#include <bbabc/regression.hpp>

#include "generators.hpp"
#include "oracles.hpp"

using namespace bbabc;
namespace t = bbabc::testing;

TEST_CASE("weighted least squares agrees with the normal equations") {
  t::Gen gen(17);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = gen.integer(20, 200);
    const Eigen::Index p = gen.integer(1, 6);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = gen.normal(gen.uniform(-5, 5), gen.uniform(0.5, 20));
      y[i] = gen.normal();
      w[i] = gen.uniform(0.01, 1.0);
    }
    WeightedLinearRegression fit;
    fit.fit(x, y, w);
    const Eigen::VectorXd coef = t::wls_normal_equations(x, y, w);
    for (int k = 0; k < 5; ++k) {
      Eigen::RowVectorXd q(p);
      for (Eigen::Index j = 0; j < p; ++j) q[j] = gen.normal(0, 10);
      REQUIRE(fit.predict(q) == Catch::Approx(t::wls_predict(coef, q)).epsilon(1e-8).margin(1e-9));
    }
    CHECK(fit.rank() == static_cast<std::size_t>(p + 1));
  }
}

TEST_CASE("exact linear response is reproduced") {
  Eigen::MatrixXd x(6, 2);
  x << 1, 2, 2, 1, 3, 5, 4, 4, 5, 0, 6, 9;
  Eigen::VectorXd y = 1.5 + 2.0 * x.col(0).array() - 0.5 * x.col(1).array();
  WeightedLinearRegression fit;
  fit.fit(x, y, Eigen::VectorXd::Ones(6));
  Eigen::RowVectorXd q(2);
  q << 10, -3;
  CHECK(fit.predict(q) == Catch::Approx(1.5 + 20.0 + 1.5).epsilon(1e-12));
  const Eigen::VectorXd all = fit.predict_all(x);
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(all[i] == Catch::Approx(y[i]).epsilon(1e-12));
}

TEST_CASE("collinear and constant columns give stable fitted values") {
  t::Gen gen(3);
  const Eigen::Index n = 100;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = gen.uniform(0, 100);
    x(i, 0) = a;
    x(i, 1) = 100.0 - a;  // fixed row total
    x(i, 2) = 7.0;        // constant
    x(i, 3) = gen.normal();
    y[i] = 0.1 * a + x(i, 3) + gen.normal(0, 0.01);
  }
  WeightedLinearRegression fit;
  fit.fit(x, y, Eigen::VectorXd::Ones(n));
  CHECK(fit.active_columns() == std::vector<Eigen::Index>{0, 1, 3});
  CHECK(fit.rank() == 3u);
  Eigen::RowVectorXd q(4);
  q << 30, 70, 7, 0.5;
  CHECK(fit.predict(q) == Catch::Approx(3.5).margin(0.01));
}

TEST_CASE("zero-weight rows are ignored") {
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 3, 100;
  Eigen::VectorXd y(5);
  y << 0, 2, 4, 6, -1e6;
  Eigen::VectorXd w(5);
  w << 1, 1, 1, 1, 0;
  WeightedLinearRegression fit;
  fit.fit(x, y, w);
  Eigen::RowVectorXd q(1);
  q << 10;
  CHECK(fit.predict(q) == Catch::Approx(20.0).epsilon(1e-12));

  y[4] = std::numeric_limits<double>::quiet_NaN();
  CHECK_NOTHROW(fit.fit(x, y, w));
  w[0] = -1.0;
  CHECK_THROWS_AS(fit.fit(x, y, w), RegressionError);
  CHECK_THROWS_AS(fit.fit(x, y, Eigen::VectorXd::Zero(5)), RegressionError);
  CHECK_THROWS_AS(fit.fit(x, y, Eigen::VectorXd::Ones(4)), std::invalid_argument);
  CHECK_THROWS_AS(WeightedLinearRegression{}.predict(q), RegressionError);
}

TEST_CASE("neural net is deterministic and fits a smooth curve") {
  t::Gen gen(8);
  const Eigen::Index n = 300;
  Eigen::MatrixXd x(n, 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = gen.uniform(-2, 2);
    y[i] = std::tanh(2.0 * x(i, 0)) + gen.normal(0, 0.05);
  }
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  NeuralNetOptions opt;
  opt.epochs = 1500;
  NeuralNetRegression a(opt), b(opt);
  a.fit(x, y, w);
  b.fit(x, y, w);
  Eigen::RowVectorXd q(1);
  double sq = 0.0;
  for (double v : {-1.5, -0.5, 0.0, 0.5, 1.5}) {
    q << v;
    REQUIRE(a.predict(q) == b.predict(q));
    sq += std::pow(a.predict(q) - std::tanh(2.0 * v), 2);
  }
  CHECK(std::sqrt(sq / 5) < 0.1);

  const auto lin = make_regression(RegressionBackend::Linear);
  const auto nn = make_regression(RegressionBackend::NeuralNet);
  CHECK(dynamic_cast<WeightedLinearRegression*>(lin.get()) != nullptr);
  CHECK(dynamic_cast<NeuralNetRegression*>(nn.get()) != nullptr);
}
