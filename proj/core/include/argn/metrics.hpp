#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "argn/features.hpp"
#include "argn/table.hpp"

namespace argn {

/// Base-2 Jensen-Shannon divergence between the empirical category
/// distributions (missing counts as a category). In [0, 1].
double jsd(std::span<const Cell> real, std::span<const Cell> syn);

/// 1-Wasserstein distance after min-max scaling both samples with their
/// combined range. Missing values are dropped. Degenerate range gives 0.
double wasserstein1(std::span<const std::optional<double>> real, std::span<const std::optional<double>> syn);

/// Mixed association matrix: Pearson (numeric/numeric), correlation ratio
/// (categorical/numeric), Cramer's V (categorical/categorical). Constant
/// columns have all-zero rows and columns, including the diagonal.
Matrix association_matrix(const RawTable& table);

/// Frobenius norm of the difference of the two association matrices; `syn`
/// is read under `real`'s schema.
double association_l2(const RawTable& real, const RawTable& syn);

/// Mann-Whitney AUC with midranks; labels are 0/1. Throws if one class is absent.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Held-out AUC of a logistic classifier separating real (0) from synthetic (1)
/// rows after a stratified 80/20 split. 0.5 means indistinguishable.
double detection_score(const RawTable& real, const RawTable& syn, std::uint64_t seed);

struct MlScores {
  std::optional<double> auc;
  std::optional<double> macro_f1;
  std::optional<double> rmse;
};

struct MlEfficiency {
  std::string target;
  std::string task;  // "classification" or "regression"
  MlScores synthetic;
  MlScores baseline;  // same model trained on real_train
};

/// Train-synthetic-test-real: logistic regression for categorical targets,
/// ridge regression for numeric ones.
MlEfficiency ml_efficiency(const RawTable& real_train, const RawTable& syn_train, const RawTable& real_test,
                           const std::string& target);

double macro_f1(std::span<const int> truth, std::span<const int> predicted, int n_classes);

struct MixedDistanceSpec {
  enum class Aggregation { l1, l2 };
  Aggregation aggregation = Aggregation::l1;
};

/// Per-row distance to the closest `train` row. Categorical cells contribute a
/// 0/1 mismatch; numeric cells |a-b| scaled by train's range; a missing/present
/// numeric pair contributes 1.
std::vector<double> dcr(const RawTable& train, const RawTable& other, const MixedDistanceSpec& spec = {});

struct DcrCurve {
  std::vector<double> distance;
  std::vector<double> cdf_syn;
  std::vector<double> cdf_test;
  double q98 = 0.0;
  double integral = 0.0;
};

/// Trapezoidal integral of CDF_syn - CDF_test on the merged grid from 0 up to
/// the first test DCR where CDF_test reaches 0.98. Positive flags a privacy risk.
double dcr_cdf_integral(std::span<const double> dcr_train_syn, std::span<const double> dcr_train_test);
/// Same integral plus the full merged-grid CDFs for plotting.
DcrCurve dcr_curve(std::span<const double> dcr_train_syn, std::span<const double> dcr_train_test);

struct EvalReport {
  std::map<std::string, double> jsd;
  double jsd_mean = 0.0;
  std::map<std::string, double> wd;
  double wd_mean = 0.0;
  double association_l2 = 0.0;
  std::optional<double> detection_auc;
  std::optional<MlEfficiency> ml_efficiency;
  std::optional<double> dcr_integral;
};

struct EvalOptions {
  std::optional<std::string> target;
  std::uint64_t seed = 0;
};

/// Full metric suite. `real` must carry an inferred schema; `syn` is read under
/// it. With a holdout, the DCR integral and ML efficiency (tested on the
/// holdout) are included.
EvalReport evaluate(const RawTable& real, const RawTable& syn, const RawTable* holdout, const EvalOptions& options);

}  // namespace argn
