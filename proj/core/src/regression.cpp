#include "bbabc/regression.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bbabc/rng.hpp"

namespace bbabc {
namespace {

struct Standardized {
  std::vector<Eigen::Index> rows;     // positive-weight rows
  std::vector<Eigen::Index> columns;  // non-constant columns
  Eigen::VectorXd mean, scale;        // over `columns`
  Eigen::MatrixXd z;                  // rows x columns
  Eigen::VectorXd y, w;
};

Standardized standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  if (x.rows() != y.size() || x.rows() != w.size()) {
    throw std::invalid_argument(fmt::format("regression: {} rows, {} responses, {} weights", x.rows(),
                                            y.size(), w.size()));
  }
  Standardized s;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!(w[i] >= 0.0)) throw RegressionError("regression weight is negative or NaN");
    if (w[i] > 0.0) {
      if (!std::isfinite(y[i]) || !x.row(i).allFinite()) throw RegressionError("non-finite regression input");
      s.rows.push_back(i);
      total += w[i];
    }
  }
  if (s.rows.empty() || !(total > 0.0)) throw RegressionError("regression has no positively weighted rows");

  const auto n = static_cast<Eigen::Index>(s.rows.size());
  s.y.resize(n);
  s.w.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    s.y[r] = y[s.rows[static_cast<std::size_t>(r)]];
    s.w[r] = w[s.rows[static_cast<std::size_t>(r)]] / total;
  }

  std::vector<double> means, scales;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    double m = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) m += s.w[r] * x(s.rows[static_cast<std::size_t>(r)], c);
    double v = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double d = x(s.rows[static_cast<std::size_t>(r)], c) - m;
      v += s.w[r] * d * d;
    }
    const double sd = std::sqrt(v);
    if (sd > 1e-12 * std::max(1.0, std::fabs(m))) {
      s.columns.push_back(c);
      means.push_back(m);
      scales.push_back(sd);
    }
  }
  const auto p = static_cast<Eigen::Index>(s.columns.size());
  s.mean = Eigen::Map<Eigen::VectorXd>(means.data(), p);
  s.scale = Eigen::Map<Eigen::VectorXd>(scales.data(), p);
  s.z.resize(n, p);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) {
      s.z(r, c) = (x(s.rows[static_cast<std::size_t>(r)], s.columns[static_cast<std::size_t>(c)]) - s.mean[c]) /
                  s.scale[c];
    }
  }
  return s;
}

Eigen::VectorXd project(const Eigen::Ref<const Eigen::RowVectorXd>& x, const std::vector<Eigen::Index>& columns,
                        const Eigen::VectorXd& mean, const Eigen::VectorXd& scale) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(columns.size()));
  for (Eigen::Index c = 0; c < z.size(); ++c) {
    z[c] = (x[columns[static_cast<std::size_t>(c)]] - mean[c]) / scale[c];
  }
  return z;
}

}  // namespace

Eigen::VectorXd WeightedRegression::predict_all(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
  return out;
}

void WeightedLinearRegression::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  Standardized s = standardize(x, y, w);
  const Eigen::Index n = s.z.rows();
  const Eigen::Index p = s.z.cols();

  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setOnes();
  a.rightCols(p) = s.z;
  const Eigen::VectorXd sw = s.w.cwiseSqrt();
  a = sw.asDiagonal() * a;
  const Eigen::VectorXd b = sw.asDiagonal() * s.y;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(a);
  coef_ = cod.solve(b);
  rank_ = static_cast<std::size_t>(cod.rank());
  if (!coef_.allFinite()) throw RegressionError("weighted least squares produced non-finite coefficients");

  active_ = std::move(s.columns);
  mean_ = std::move(s.mean);
  scale_ = std::move(s.scale);
}

double WeightedLinearRegression::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (coef_.size() == 0) throw RegressionError("predict called before fit");
  const Eigen::VectorXd z = project(x, active_, mean_, scale_);
  return coef_[0] + coef_.tail(z.size()).dot(z);
}

void NeuralNetRegression::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  Standardized s = standardize(x, y, w);
  const Eigen::Index n = s.z.rows();
  const Eigen::Index p = s.z.cols();
  const Eigen::Index h = options_.hidden_units;

  y_mean_ = s.w.dot(s.y);
  const double var = s.w.dot((s.y.array() - y_mean_).square().matrix());
  y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd t = (s.y.array() - y_mean_) / y_scale_;

  RngStream rng(options_.seed, 0x6e6e6574ull);
  const double init = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(p, 1)));
  w1_.resize(h, p);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < p; ++j) w1_(i, j) = (2.0 * rng.uniform() - 1.0) * init;
  b1_ = Eigen::VectorXd::Zero(h);
  w2_.resize(h);
  for (Eigen::Index i = 0; i < h; ++i) w2_[i] = (2.0 * rng.uniform() - 1.0) / std::sqrt(static_cast<double>(h));
  b2_ = 0.0;

  // Adam state.
  Eigen::MatrixXd m_w1 = Eigen::MatrixXd::Zero(h, p), v_w1 = m_w1;
  Eigen::VectorXd m_b1 = Eigen::VectorXd::Zero(h), v_b1 = m_b1, m_w2 = m_b1, v_w2 = m_b1;
  double m_b2 = 0.0, v_b2 = 0.0;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double lr = options_.learning_rate;
  const double decay = options_.weight_decay;

  for (int epoch = 1; epoch <= options_.epochs; ++epoch) {
    const Eigen::MatrixXd pre = (s.z * w1_.transpose()).rowwise() + b1_.transpose();  // n x h
    const Eigen::MatrixXd act = pre.array().tanh();
    const Eigen::VectorXd out = act * w2_ + Eigen::VectorXd::Constant(n, b2_);
    const Eigen::VectorXd g_out = 2.0 * s.w.cwiseProduct(out - t);  // dL/dout

    const Eigen::VectorXd g_w2 = act.transpose() * g_out + 2.0 * decay * w2_;
    const double g_b2 = g_out.sum();
    const Eigen::MatrixXd g_act = g_out * w2_.transpose();
    const Eigen::MatrixXd g_pre = g_act.array() * (1.0 - act.array().square());
    const Eigen::MatrixXd g_w1 = g_pre.transpose() * s.z + 2.0 * decay * w1_;
    const Eigen::VectorXd g_b1 = g_pre.colwise().sum().transpose();

    const double c1 = 1.0 - std::pow(beta1, epoch);
    const double c2 = 1.0 - std::pow(beta2, epoch);
    auto step = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
      param -= (lr * (m / c1).array() / ((v / c2).array().sqrt() + eps)).matrix();
    };
    step(w1_, m_w1, v_w1, g_w1);
    step(b1_, m_b1, v_b1, g_b1);
    step(w2_, m_w2, v_w2, g_w2);
    m_b2 = beta1 * m_b2 + (1.0 - beta1) * g_b2;
    v_b2 = beta2 * v_b2 + (1.0 - beta2) * g_b2 * g_b2;
    b2_ -= lr * (m_b2 / c1) / (std::sqrt(v_b2 / c2) + eps);
  }
  if (!w1_.allFinite() || !w2_.allFinite() || !std::isfinite(b2_)) {
    throw RegressionError("neural network training diverged");
  }
  active_ = std::move(s.columns);
  mean_ = std::move(s.mean);
  scale_ = std::move(s.scale);
}

double NeuralNetRegression::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (w2_.size() == 0) throw RegressionError("predict called before fit");
  const Eigen::VectorXd z = project(x, active_, mean_, scale_);
  const Eigen::VectorXd act = (w1_ * z + b1_).array().tanh();
  return (act.dot(w2_) + b2_) * y_scale_ + y_mean_;
}

std::unique_ptr<WeightedRegression> make_regression(RegressionBackend backend, const NeuralNetOptions& nn) {
  if (backend == RegressionBackend::NeuralNet) return std::make_unique<NeuralNetRegression>(nn);
  return std::make_unique<WeightedLinearRegression>();
}

}  // namespace bbabc
