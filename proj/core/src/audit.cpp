#include "argn/audit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>

#include "argn/error.hpp"
#include "argn/linear.hpp"
#include "argn/metrics.hpp"
#include "argn/parallel.hpp"
#include "argn/rng.hpp"

namespace argn {

namespace {

constexpr std::string_view kAttackNames[] = {"naive_gh",    "hist_gh",       "corr_gh",
                                             "logistic_gh", "closest_hamming", "closest_l2",
                                             "direct_lookup", "kernel_density", "query_based"};

bool cells_equal(const ColumnSpec& spec, const Cell& a, const Cell& b) {
  if (!a || !b) return !a && !b;
  if (spec.kind == ColumnKind::categorical) return *a == *b;
  const auto x = numeric_cell(spec, a);
  const auto y = numeric_cell(spec, b);
  if (x && y) return *x == *y;
  return *a == *b;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double cosine_distance(std::span<const double> a, double na2, std::span<const double> b, double nb2) {
  double dot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
  if (na2 == 0.0 || nb2 == 0.0) {
    dot += 1.0;
    na2 += 1.0;
    nb2 += 1.0;
  }
  return std::max(0.0, 1.0 - dot / std::sqrt(na2 * nb2));
}

}  // namespace

std::string_view to_string(AttackKind kind) { return kAttackNames[static_cast<std::size_t>(kind)]; }

AttackKind attack_from_string(std::string_view s) {
  for (std::size_t k = 0; k < std::size(kAttackNames); ++k)
    if (kAttackNames[k] == s) return static_cast<AttackKind>(k);
  throw ConfigError("unknown attack '" + std::string(s) + "'");
}

std::vector<AttackKind> all_attacks() {
  std::vector<AttackKind> out;
  for (std::size_t k = 0; k < std::size(kAttackNames); ++k) out.push_back(static_cast<AttackKind>(k));
  return out;
}

bool is_feature_attack(AttackKind kind) {
  switch (kind) {
    case AttackKind::naive_gh:
    case AttackKind::hist_gh:
    case AttackKind::corr_gh:
    case AttackKind::logistic_gh:
    case AttackKind::query_based:
      return true;
    default:
      return false;
  }
}

void AuditConfig::validate() const {
  if (n_shadow < 2 || n_shadow % 2 != 0) throw ConfigError("n_shadow must be a positive even number");
  if (shadow_size < 1) throw ConfigError("shadow_size must be at least 1");
  if (n_queries < 1) throw ConfigError("n_queries must be at least 1");
  if (subset_size < 1) throw ConfigError("subset_size must be at least 1");
  if (hist_bins < 1) throw ConfigError("hist_bins must be at least 1");
  if (attacks.empty()) throw ConfigError("no attacks selected");
}

double median_accuracy(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) return 0.5;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  double correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += (scores[i] > median) == (labels[i] == 1);
  return correct / static_cast<double>(n);
}

AttackResult make_result(std::string name, std::vector<double> scores, std::vector<int> labels) {
  AttackResult r;
  r.attack = std::move(name);
  r.auc = auc(scores, labels);
  r.accuracy = median_accuracy(scores, labels);
  r.scores = std::move(scores);
  r.labels = std::move(labels);
  return r;
}

std::vector<double> achilles_score(const RawTable& table, int k) {
  const std::size_t n = table.row_count();
  if (k < 1 || static_cast<std::size_t>(k) >= n) throw ConfigError("achilles_score needs 1 <= k < row count");
  const auto enc = FeatureEncoder::fit(table);
  const Matrix X = enc.encode(table);
  std::vector<double> norms(n);
  for (std::size_t r = 0; r < n; ++r) norms[r] = squared_norm(X.row(r));
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(cosine_distance(X.row(i), norms[i], X.row(j), norms[j]));
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    std::sort(d.begin(), d.begin() + k);
    out[i] = std::accumulate(d.begin(), d.begin() + k, 0.0) / k;
  });
  return out;
}

std::vector<std::size_t> top_vulnerable(const RawTable& table, std::size_t n, int k) {
  const auto scores = achilles_score(table, k);
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(std::min(n, idx.size()));
  return idx;
}

std::vector<ShadowTrial> build_shadow_trials(const RawTable& pool, std::span<const Cell> target,
                                             const AuditConfig& cfg) {
  cfg.validate();
  if (target.size() != pool.column_count()) throw SchemaError("target row width does not match the pool");
  if (cfg.shadow_size > pool.row_count())
    throw ConfigError("auxiliary pool has " + std::to_string(pool.row_count()) + " rows, shadow_size needs " +
                      std::to_string(cfg.shadow_size));

  const auto n = static_cast<std::size_t>(cfg.n_shadow);
  std::vector<int> member(n, 0);
  std::fill(member.begin(), member.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  Rng label_rng(derive_seed(cfg.seed, 0x1abe1));
  label_rng.shuffle(member);

  std::vector<ShadowTrial> trials(n);
  for (std::size_t t = 0; t < n; ++t) {
    Rng rng(derive_seed(cfg.seed, 0x7a1, t));
    std::vector<std::size_t> idx(pool.row_count());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t take = member[t] ? cfg.shadow_size - 1 : cfg.shadow_size;
    for (std::size_t i = 0; i < take; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    ShadowTrial& trial = trials[t];
    trial.member = member[t] == 1;
    trial.train.schema = pool.schema;
    for (std::size_t i = 0; i < take; ++i) trial.train.rows.push_back(pool.rows[idx[i]]);
    if (trial.member) trial.train.rows.emplace_back(target.begin(), target.end());
    trial.train.schema.row_count = trial.train.rows.size();
  }
  return trials;
}

AttackContext AttackContext::build(const RawTable& pool, std::span<const Cell> target, const AuditConfig& cfg) {
  AttackContext ctx;
  ctx.schema = pool.schema;
  ctx.target.assign(target.begin(), target.end());
  ctx.hist_bins = cfg.hist_bins;
  const std::size_t C = pool.column_count();
  ctx.lo.assign(C, 0.0);
  ctx.hi.assign(C, 0.0);
  ctx.vocab.assign(C, {});
  for (std::size_t c = 0; c < C; ++c) {
    if (is_numeric_kind(pool.schema.columns[c].kind)) {
      bool any = false;
      for (const auto& v : numeric_column(pool, c)) {
        if (!v) continue;
        ctx.lo[c] = any ? std::min(ctx.lo[c], *v) : *v;
        ctx.hi[c] = any ? std::max(ctx.hi[c], *v) : *v;
        any = true;
      }
    } else {
      std::set<std::string> values;
      for (const auto& row : pool.rows)
        if (row[c]) values.insert(*row[c]);
      ctx.vocab[c].assign(values.begin(), values.end());
    }
  }
  Rng rng(derive_seed(cfg.seed, 0x9e7));
  const std::size_t s = std::min(cfg.subset_size, C);
  for (int q = 0; q < cfg.n_queries; ++q) {
    auto perm = random_permutation(C, rng);
    perm.resize(s);
    std::sort(perm.begin(), perm.end());
    ctx.queries.push_back(std::move(perm));
  }
  ctx.encoding = FeatureEncoder::fit(pool, {true, true});
  return ctx;
}

std::size_t AttackContext::bin(std::size_t c, const Cell& cell) const {
  const auto v = numeric_cell(schema.columns[c], cell);
  const auto bins = static_cast<std::size_t>(hist_bins);
  if (!v) return bins;
  const double range = hi[c] - lo[c];
  if (!(range > 0.0)) return 0;
  const double pos = std::floor((*v - lo[c]) / range * hist_bins);
  return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
}

std::vector<double> extract_features(const RawTable& syn_in, const AttackContext& ctx, AttackKind kind) {
  const RawTable syn = with_schema(syn_in, ctx.schema);
  const std::size_t C = syn.column_count();
  std::vector<double> f;

  auto category_counts = [&](std::size_t c) {
    const auto& vocab = ctx.vocab[c];
    std::vector<double> counts(vocab.size() + 2, 0.0);  // vocabulary, missing, unseen
    for (const auto& row : syn.rows) {
      if (!row[c]) {
        counts[vocab.size()] += 1;
        continue;
      }
      const auto it = std::lower_bound(vocab.begin(), vocab.end(), *row[c]);
      counts[it != vocab.end() && *it == *row[c] ? static_cast<std::size_t>(it - vocab.begin()) : vocab.size() + 1] +=
          1;
    }
    return counts;
  };
  auto naive = [&] {
    for (std::size_t c = 0; c < C; ++c) {
      if (is_numeric_kind(ctx.schema.columns[c].kind)) {
        std::vector<double> v;
        for (const auto& x : numeric_column(syn, c))
          if (x) v.push_back(*x);
        double mean = 0, median = 0, var = 0;
        if (!v.empty()) {
          mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
          for (double x : v) var += (x - mean) * (x - mean);
          var /= static_cast<double>(v.size());
          std::sort(v.begin(), v.end());
          const std::size_t m = v.size();
          median = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
        }
        f.insert(f.end(), {mean, median, var});
      } else {
        const double n = std::max<double>(1.0, static_cast<double>(syn.row_count()));
        for (double count : category_counts(c)) f.push_back(count / n);
      }
    }
  };
  auto hist = [&] {
    for (std::size_t c = 0; c < C; ++c) {
      if (is_numeric_kind(ctx.schema.columns[c].kind)) {
        std::vector<double> counts(static_cast<std::size_t>(ctx.hist_bins) + 1, 0.0);
        for (const auto& row : syn.rows) counts[ctx.bin(c, row[c])] += 1;
        f.insert(f.end(), counts.begin(), counts.end());
      } else {
        const auto counts = category_counts(c);
        f.insert(f.end(), counts.begin(), counts.end());
      }
    }
  };

  switch (kind) {
    case AttackKind::naive_gh:
      naive();
      break;
    case AttackKind::hist_gh:
      hist();
      break;
    case AttackKind::logistic_gh:
      naive();
      hist();
      break;
    case AttackKind::corr_gh: {
      const Matrix m = association_matrix(syn);
      for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = i + 1; j < C; ++j) f.push_back(m(i, j));
      break;
    }
    case AttackKind::query_based: {
      std::vector<std::size_t> target_bins(C);
      for (std::size_t c = 0; c < C; ++c)
        if (is_numeric_kind(ctx.schema.columns[c].kind)) target_bins[c] = ctx.bin(c, ctx.target[c]);
      for (const auto& q : ctx.queries) {
        double count = 0;
        for (const auto& row : syn.rows) {
          bool match = true;
          for (std::size_t c : q) {
            match = is_numeric_kind(ctx.schema.columns[c].kind) ? ctx.bin(c, row[c]) == target_bins[c]
                                                                 : row[c] == ctx.target[c];
            if (!match) break;
          }
          count += match;
        }
        f.push_back(count);
      }
      break;
    }
    default:
      throw ConfigError("extract_features: '" + std::string(to_string(kind)) + "' is a distance attack");
  }
  return f;
}

std::vector<RawTable> synthesize_shadow_sets(const std::vector<ShadowTrial>& trials, const ShadowGenerator& generator,
                                             std::uint64_t seed) {
  std::vector<RawTable> out(trials.size());
  parallel_for(trials.size(), [&](std::size_t t) {
    try {
      out[t] = generator(trials[t].train, derive_seed(seed, 0x5e7, t));
    } catch (const std::exception& e) {
      throw Error("shadow trial " + std::to_string(t) + ": " + e.what());
    }
  });
  return out;
}

AttackResult meta_classify(std::string name, const std::vector<std::vector<double>>& features,
                           std::span<const int> labels, std::uint64_t seed) {
  const std::size_t n = features.size();
  if (n != labels.size()) throw Error("meta_classify: features and labels differ in length");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < 2 || neg.size() < 2) throw ConfigError("meta_classify needs at least two trials per class");

  const std::vector<int> label_vec(labels.begin(), labels.end());
  const bool constant = std::all_of(features.begin(), features.end(), [&](const auto& v) { return v == features[0]; });
  if (constant) return make_result(std::move(name), std::vector<double>(n, 0.5), label_vec);

  // Stratified folds: each class is dealt round-robin after a seeded shuffle.
  const std::size_t folds = std::min<std::size_t>(4, std::min(pos.size(), neg.size()));
  Rng rng(derive_seed(seed, 0xf01d));
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<std::size_t> fold(n);
  for (std::size_t k = 0; k < pos.size(); ++k) fold[pos[k]] = k % folds;
  for (std::size_t k = 0; k < neg.size(); ++k) fold[neg[k]] = k % folds;

  const std::size_t p = features[0].size();
  std::vector<double> scores(n, 0.5);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? test_idx : train_idx).push_back(i);
    Matrix X(train_idx.size(), p), T(test_idx.size(), p);
    std::vector<int> y;
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
      std::copy(features[train_idx[r]].begin(), features[train_idx[r]].end(), X.row(r).begin());
      y.push_back(labels[train_idx[r]]);
    }
    for (std::size_t r = 0; r < test_idx.size(); ++r)
      std::copy(features[test_idx[r]].begin(), features[test_idx[r]].end(), T.row(r).begin());
    LogisticRegression clf(LogisticRegression::Options{.l2 = 1e-2, .iterations = 300, .learning_rate = 0.05});
    clf.fit(X, y, 2);
    const auto s = clf.score(T);
    for (std::size_t r = 0; r < test_idx.size(); ++r) scores[test_idx[r]] = s[r];
  }
  return make_result(std::move(name), std::move(scores), label_vec);
}

AttackResult run_shadow_attack(std::span<const RawTable> syn_sets, std::span<const int> labels,
                               const AttackContext& ctx, AttackKind kind, std::uint64_t seed) {
  std::vector<std::vector<double>> features(syn_sets.size());
  parallel_for(syn_sets.size(), [&](std::size_t t) { features[t] = extract_features(syn_sets[t], ctx, kind); });
  return meta_classify(std::string(to_string(kind)), features, labels, seed);
}

AttackResult run_shadow_attack(const std::vector<ShadowTrial>& trials, const ShadowGenerator& generator,
                               const AttackContext& ctx, AttackKind kind, std::uint64_t seed) {
  const auto sets = synthesize_shadow_sets(trials, generator, seed);
  std::vector<int> labels;
  for (const auto& t : trials) labels.push_back(t.member ? 1 : 0);
  return run_shadow_attack(sets, labels, ctx, kind, seed);
}

AttackResult run_distance_attack(std::span<const RawTable> syn_sets, std::span<const int> labels,
                                 const AttackContext& ctx, AttackKind kind) {
  if (syn_sets.size() < 2) throw ConfigError("distance attack needs at least two synthetic sets");
  if (syn_sets.size() != labels.size()) throw Error("distance attack: sets and labels differ in length");
  const std::size_t C = ctx.schema.columns.size();
  std::vector<double> target_vec(ctx.encoding.dim);
  ctx.encoding.encode(ctx.target, target_vec);

  std::vector<double> scores(syn_sets.size());
  parallel_for(syn_sets.size(), [&](std::size_t t) {
    const RawTable syn = with_schema(syn_sets[t], ctx.schema);
    switch (kind) {
      case AttackKind::closest_hamming:
      case AttackKind::direct_lookup: {
        std::size_t best = C + 1;
        for (const auto& row : syn.rows) {
          std::size_t mismatches = 0;
          for (std::size_t c = 0; c < C && mismatches < best; ++c)
            mismatches += !cells_equal(ctx.schema.columns[c], row[c], ctx.target[c]);
          best = std::min(best, mismatches);
        }
        scores[t] = kind == AttackKind::direct_lookup ? (best == 0 ? 1.0 : 0.0) : -static_cast<double>(best);
        break;
      }
      case AttackKind::closest_l2: {
        const Matrix X = ctx.encoding.encode(syn);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < X.rows; ++r) {
          double d = 0.0;
          const auto row = X.row(r);
          for (std::size_t k = 0; k < X.cols; ++k) d += (row[k] - target_vec[k]) * (row[k] - target_vec[k]);
          best = std::min(best, d);
        }
        scores[t] = -std::sqrt(best);
        break;
      }
      case AttackKind::kernel_density: {
        if (syn.row_count() < 2) throw ConfigError("kernel_density needs at least two synthetic rows");
        const Matrix X = ctx.encoding.encode(syn);
        const double n = static_cast<double>(X.rows);
        const std::size_t d = X.cols;
        // Diagonal Gaussian kernel, Scott's factor n^(-1/(d+4)) times each dimension's std.
        const double factor = std::pow(n, -1.0 / (static_cast<double>(d) + 4.0));
        std::vector<double> h(d);
        double log_norm = -std::log(n);
        for (std::size_t k = 0; k < d; ++k) {
          double mean = 0, var = 0;
          for (std::size_t r = 0; r < X.rows; ++r) mean += X(r, k);
          mean /= n;
          for (std::size_t r = 0; r < X.rows; ++r) var += (X(r, k) - mean) * (X(r, k) - mean);
          h[k] = std::max(std::sqrt(var / (n - 1)), 1e-2) * factor;
          log_norm -= std::log(h[k] * std::sqrt(2.0 * M_PI));
        }
        std::vector<double> e(X.rows);
        for (std::size_t r = 0; r < X.rows; ++r) {
          double q = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const double z = (X(r, k) - target_vec[k]) / h[k];
            q += z * z;
          }
          e[r] = -0.5 * q;
        }
        const double m = *std::max_element(e.begin(), e.end());
        double s = 0.0;
        for (double v : e) s += std::exp(v - m);
        scores[t] = m + std::log(s) + log_norm;
        break;
      }
      default:
        throw ConfigError("run_distance_attack: '" + std::string(to_string(kind)) + "' is a feature attack");
    }
  });
  return make_result(std::string(to_string(kind)), std::move(scores), std::vector<int>(labels.begin(), labels.end()));
}

AuditReport run_audit(const RawTable& data, const AuditConfig& cfg, const ShadowGenerator& generator) {
  cfg.validate();
  if (cfg.target_indices.empty()) throw ConfigError("audit needs at least one target");
  for (std::size_t t : cfg.target_indices)
    if (t >= data.row_count()) throw ConfigError("target index " + std::to_string(t) + " out of range");

  std::vector<bool> is_target(data.row_count(), false);
  for (std::size_t t : cfg.target_indices) is_target[t] = true;
  RawTable pool;
  pool.schema = data.schema;
  for (std::size_t r = 0; r < data.row_count(); ++r)
    if (!is_target[r]) pool.rows.push_back(data.rows[r]);
  pool.schema.row_count = pool.rows.size();

  const std::vector<double> achilles =
      data.row_count() > 5 ? achilles_score(data, 5) : std::vector<double>(data.row_count(), 0.0);

  AuditReport report;
  report.config = cfg;
  for (std::size_t ti = 0; ti < cfg.target_indices.size(); ++ti) {
    const std::size_t target = cfg.target_indices[ti];
    AuditConfig trial_cfg = cfg;
    trial_cfg.seed = derive_seed(cfg.seed, 0x7a9e7, ti);
    const auto trials = build_shadow_trials(pool, data.rows[target], trial_cfg);
    const auto sets = synthesize_shadow_sets(trials, generator, trial_cfg.seed);
    std::vector<int> labels;
    for (const auto& t : trials) labels.push_back(t.member ? 1 : 0);
    const auto ctx = AttackContext::build(pool, data.rows[target], trial_cfg);

    TargetAudit audit;
    audit.target_index = target;
    audit.achilles = achilles[target];
    for (AttackKind kind : cfg.attacks)
      audit.attacks.push_back(is_feature_attack(kind) ? run_shadow_attack(sets, labels, ctx, kind, trial_cfg.seed)
                                                      : run_distance_attack(sets, labels, ctx, kind));
    report.targets.push_back(std::move(audit));
  }
  return report;
}

}  // namespace argn
