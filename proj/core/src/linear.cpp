#include "argn/linear.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "argn/error.hpp"

namespace argn {

void LogisticRegression::fit(const Matrix& X, std::span<const int> labels, int n_classes) {
  if (X.rows != labels.size()) throw ConfigError("logistic regression: label count does not match rows");
  if (X.rows == 0) throw ConfigError("logistic regression: no training rows");
  if (n_classes < 2) throw ConfigError("logistic regression needs at least two classes");
  for (int y : labels)
    if (y < 0 || y >= n_classes) throw ConfigError("logistic regression: label out of range");
  n_classes_ = n_classes;
  const std::size_t n = X.rows, p = X.cols, K = static_cast<std::size_t>(n_classes);

  mean_.assign(p, 0.0);
  scale_.assign(p, 1.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) mean_[c] += X(r, c);
  for (auto& m : mean_) m /= static_cast<double>(n);
  for (std::size_t c = 0; c < p; ++c) {
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (X(r, c) - mean_[c]) * (X(r, c) - mean_[c]);
    var /= static_cast<double>(n);
    scale_[c] = var > 1e-12 ? 1.0 / std::sqrt(var) : 0.0;
  }
  Matrix Z(n, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) Z(r, c) = (X(r, c) - mean_[c]) * scale_[c];

  weights_ = Matrix(p + 1, K);
  Matrix m(p + 1, K), v(p + 1, K), grad(p + 1, K);
  std::vector<double> logits(K), prob(K);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  for (int it = 1; it <= options_.iterations; ++it) {
    std::fill(grad.data.begin(), grad.data.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto z = Z.row(r);
      for (std::size_t k = 0; k < K; ++k) {
        double s = weights_(p, k);
        for (std::size_t c = 0; c < p; ++c) s += z[c] * weights_(c, k);
        logits[k] = s;
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) total += (prob[k] = std::exp(logits[k] - mx));
      for (std::size_t k = 0; k < K; ++k) {
        const double g = prob[k] / total - (static_cast<std::size_t>(labels[r]) == k ? 1.0 : 0.0);
        for (std::size_t c = 0; c < p; ++c) grad(c, k) += g * z[c];
        grad(p, k) += g;
      }
    }
    const double c1 = 1.0 - std::pow(b1, it), c2 = 1.0 - std::pow(b2, it);
    for (std::size_t idx = 0; idx < grad.data.size(); ++idx) {
      double g = grad.data[idx] / static_cast<double>(n);
      if (idx < p * K) g += options_.l2 * weights_.data[idx];
      m.data[idx] = b1 * m.data[idx] + (1 - b1) * g;
      v.data[idx] = b2 * v.data[idx] + (1 - b2) * g * g;
      weights_.data[idx] -= options_.learning_rate * (m.data[idx] / c1) / (std::sqrt(v.data[idx] / c2) + eps);
    }
  }
}

Matrix LogisticRegression::predict_proba(const Matrix& X) const {
  if (n_classes_ == 0) throw ConfigError("logistic regression used before fit");
  const std::size_t p = mean_.size(), K = static_cast<std::size_t>(n_classes_);
  if (X.cols != p) throw ConfigError("logistic regression: feature width mismatch");
  Matrix out(X.rows, K);
  std::vector<double> logits(K);
  for (std::size_t r = 0; r < X.rows; ++r) {
    for (std::size_t k = 0; k < K; ++k) {
      double s = weights_(p, k);
      for (std::size_t c = 0; c < p; ++c) s += (X(r, c) - mean_[c]) * scale_[c] * weights_(c, k);
      logits[k] = s;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += (out(r, k) = std::exp(logits[k] - mx));
    for (std::size_t k = 0; k < K; ++k) out(r, k) /= total;
  }
  return out;
}

std::vector<double> LogisticRegression::score(const Matrix& X) const {
  if (n_classes_ != 2) throw ConfigError("score() needs a binary model");
  const Matrix p = predict_proba(X);
  std::vector<double> out(X.rows);
  for (std::size_t r = 0; r < X.rows; ++r) out[r] = p(r, 1);
  return out;
}

void RidgeRegression::fit(const Matrix& X, std::span<const double> y) {
  if (X.rows != y.size()) throw ConfigError("ridge regression: target count does not match rows");
  if (X.rows == 0) throw ConfigError("ridge regression: no training rows");
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Mat> A(X.data.data(), static_cast<Eigen::Index>(X.rows), static_cast<Eigen::Index>(X.cols));
  const Eigen::Map<const Eigen::VectorXd> b(y.data(), static_cast<Eigen::Index>(y.size()));
  const Eigen::RowVectorXd x_mean = A.colwise().mean();
  const double y_mean = b.mean();
  const Eigen::MatrixXd Ac = A.rowwise() - x_mean;
  const Eigen::VectorXd bc = b.array() - y_mean;
  Eigen::MatrixXd gram = Ac.transpose() * Ac;
  gram.diagonal().array() += lambda_;
  const Eigen::VectorXd w = gram.ldlt().solve(Ac.transpose() * bc);
  coef_.assign(w.data(), w.data() + w.size());
  intercept_ = y_mean - x_mean.dot(w);
}

std::vector<double> RidgeRegression::predict(const Matrix& X) const {
  if (X.cols != coef_.size()) throw ConfigError("ridge regression: feature width mismatch");
  std::vector<double> out(X.rows, intercept_);
  for (std::size_t r = 0; r < X.rows; ++r)
    for (std::size_t c = 0; c < X.cols; ++c) out[r] += X(r, c) * coef_[c];
  return out;
}

}  // namespace argn
