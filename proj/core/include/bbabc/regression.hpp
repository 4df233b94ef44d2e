#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace bbabc {

class RegressionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Weighted regression of a scalar response on a row-per-observation design.
// Rows with zero weight are ignored by fit().
class WeightedRegression {
 public:
  virtual ~WeightedRegression() = default;

  virtual void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) = 0;
  virtual double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const = 0;
  Eigen::VectorXd predict_all(const Eigen::MatrixXd& x) const;
};

// Weighted least squares with an intercept. Columns are standardized and
// constant columns dropped; the remaining system is solved by a rank-revealing
// complete orthogonal decomposition, so collinear summaries (fixed row totals)
// give the minimum-norm coefficients and well-defined fitted values.
class WeightedLinearRegression final : public WeightedRegression {
 public:
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) override;
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;

  std::size_t rank() const noexcept { return rank_; }
  const std::vector<Eigen::Index>& active_columns() const noexcept { return active_; }

 private:
  std::vector<Eigen::Index> active_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  Eigen::VectorXd coef_;  // intercept first
  std::size_t rank_ = 0;
};

struct NeuralNetOptions {
  int hidden_units = 5;
  int epochs = 400;
  double learning_rate = 0.03;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
};

// One hidden tanh layer, linear output, weighted squared loss with weight
// decay, trained full-batch with Adam from a seeded initialization.
class NeuralNetRegression final : public WeightedRegression {
 public:
  explicit NeuralNetRegression(NeuralNetOptions options = {}) : options_(options) {}

  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) override;
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;

 private:
  NeuralNetOptions options_;
  std::vector<Eigen::Index> active_;
  Eigen::VectorXd mean_, scale_;
  double y_mean_ = 0.0, y_scale_ = 1.0;
  Eigen::MatrixXd w1_;  // hidden x inputs
  Eigen::VectorXd b1_, w2_;
  double b2_ = 0.0;
};

enum class RegressionBackend { Linear, NeuralNet };

std::unique_ptr<WeightedRegression> make_regression(RegressionBackend backend,
                                                    const NeuralNetOptions& nn = {});

}  // namespace bbabc
