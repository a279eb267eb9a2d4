#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "argn/features.hpp"

namespace argn {

/// Multinomial logistic regression on z-scored features, fitted by full-batch
/// Adam on the L2-penalised mean cross-entropy. Deterministic (zero init).
class LogisticRegression {
 public:
  struct Options {
    double l2 = 1e-3;
    int iterations = 400;
    double learning_rate = 0.05;
  };

  LogisticRegression() = default;
  explicit LogisticRegression(Options options) : options_(options) {}

  void fit(const Matrix& X, std::span<const int> labels, int n_classes);
  /// Row-major n x n_classes probabilities.
  Matrix predict_proba(const Matrix& X) const;
  /// P(class 1) for binary problems.
  std::vector<double> score(const Matrix& X) const;
  int n_classes() const { return n_classes_; }

 private:
  Options options_;
  int n_classes_ = 0;
  std::vector<double> mean_, scale_;
  Matrix weights_;  // (p + 1) x K, last row is the intercept
};

/// Closed-form ridge regression with an unpenalised intercept.
class RidgeRegression {
 public:
  explicit RidgeRegression(double lambda = 1e-3) : lambda_(lambda) {}

  void fit(const Matrix& X, std::span<const double> y);
  std::vector<double> predict(const Matrix& X) const;
  std::span<const double> coefficients() const { return coef_; }
  double intercept() const { return intercept_; }

 private:
  double lambda_;
  std::vector<double> coef_;
  double intercept_ = 0.0;
};

}  // namespace argn
