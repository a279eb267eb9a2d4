#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "argn/features.hpp"
#include "argn/table.hpp"

namespace argn {

enum class AttackKind {
  naive_gh,
  hist_gh,
  corr_gh,
  logistic_gh,
  closest_hamming,
  closest_l2,
  direct_lookup,
  kernel_density,
  query_based,
};

std::string_view to_string(AttackKind kind);
AttackKind attack_from_string(std::string_view s);
std::vector<AttackKind> all_attacks();
/// Shadow-feature attacks go through the meta-classifier; the rest score
/// each synthetic set directly.
bool is_feature_attack(AttackKind kind);

struct AuditConfig {
  int n_shadow = 64;
  std::size_t shadow_size = 500;
  std::vector<std::size_t> target_indices;
  std::vector<AttackKind> attacks = all_attacks();
  int n_queries = 100;
  std::size_t subset_size = 3;
  int hist_bins = 10;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const AuditConfig&) const = default;
};

struct AttackResult {
  std::string attack;
  std::vector<double> scores;
  std::vector<int> labels;
  double auc = 0.5;
  double accuracy = 0.5;
};

/// Predict "member" when the score exceeds the median score.
double median_accuracy(std::span<const double> scores, std::span<const int> labels);
AttackResult make_result(std::string name, std::vector<double> scores, std::vector<int> labels);

/// Mean cosine distance to the k nearest other rows under one-hot + min-max
/// encoding. Rows with a zero vector are compared with a constant 1 appended
/// to both vectors.
std::vector<double> achilles_score(const RawTable& table, int k = 5);
/// Indices of the n highest Achilles scores, most vulnerable first.
std::vector<std::size_t> top_vulnerable(const RawTable& table, std::size_t n, int k = 5);

struct ShadowTrial {
  RawTable train;
  bool member = false;
};

/// Exactly n_shadow/2 trials contain the target. Every set has shadow_size
/// rows drawn without replacement from the pool. The target must not be in
/// the pool.
std::vector<ShadowTrial> build_shadow_trials(const RawTable& aux_pool, std::span<const Cell> target,
                                             const AuditConfig& cfg);

/// Everything an attacker derives from public knowledge: the auxiliary pool's
/// schema, ranges and vocabularies, plus the target record.
struct AttackContext {
  TableSchema schema;
  std::vector<Cell> target;
  std::vector<double> lo, hi;                      // numeric ranges of the pool
  std::vector<std::vector<std::string>> vocab;     // categorical values of the pool
  std::vector<std::vector<std::size_t>> queries;   // column subsets for query_based
  FeatureEncoder encoding;                         // one-hot + min-max, fitted on the pool
  int hist_bins = 10;

  static AttackContext build(const RawTable& aux_pool, std::span<const Cell> target, const AuditConfig& cfg);
  /// Histogram bin of a numeric cell, hist_bins for missing.
  std::size_t bin(std::size_t column, const Cell& cell) const;
};

std::vector<double> extract_features(const RawTable& syn, const AttackContext& ctx, AttackKind kind);

/// Trains on a shadow set and returns a synthetic table of the same size.
using ShadowGenerator = std::function<RawTable(const RawTable& train, std::uint64_t seed)>;

/// Runs the generator on every trial (in parallel, seeds derived per trial).
/// Failures are rethrown naming the trial index.
std::vector<RawTable> synthesize_shadow_sets(const std::vector<ShadowTrial>& trials, const ShadowGenerator& generator,
                                             std::uint64_t seed);

/// Logistic meta-classifier over shadow features with 4-fold stratified
/// cross-validation; every trial is scored once while held out.
AttackResult run_shadow_attack(std::span<const RawTable> syn_sets, std::span<const int> labels,
                               const AttackContext& ctx, AttackKind kind, std::uint64_t seed);
AttackResult run_shadow_attack(const std::vector<ShadowTrial>& trials, const ShadowGenerator& generator,
                               const AttackContext& ctx, AttackKind kind, std::uint64_t seed);

/// Meta-classifier on precomputed feature vectors (one per trial).
AttackResult meta_classify(std::string name, const std::vector<std::vector<double>>& features,
                           std::span<const int> labels, std::uint64_t seed);

/// Scores each synthetic set by proximity of its rows to the target.
AttackResult run_distance_attack(std::span<const RawTable> syn_sets, std::span<const int> labels,
                                 const AttackContext& ctx, AttackKind kind);

struct TargetAudit {
  std::size_t target_index = 0;
  double achilles = 0.0;
  std::vector<AttackResult> attacks;
};

struct AuditReport {
  AuditConfig config;
  std::vector<TargetAudit> targets;
};

/// Full pipeline over cfg.target_indices: the pool is `data` minus all targets.
AuditReport run_audit(const RawTable& data, const AuditConfig& cfg, const ShadowGenerator& generator);

}  // namespace argn
