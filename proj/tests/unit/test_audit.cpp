#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "argn/audit.hpp"
#include "argn/discretize.hpp"
#include "argn/error.hpp"
#include "argn/metrics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace argn;

namespace {

RawTable head(const RawTable& t, std::size_t begin, std::size_t end) {
  RawTable out = t;
  out.rows.assign(t.rows.begin() + static_cast<std::ptrdiff_t>(begin), t.rows.begin() + static_cast<std::ptrdiff_t>(end));
  out.schema.row_count = out.rows.size();
  return out;
}

// Independent Achilles: one-hot + min-max by hand, cosine distance, bias
// coordinate only when a zero vector is involved.
std::vector<double> achilles_oracle(const RawTable& t, int k) {
  const std::size_t n = t.row_count(), C = t.column_count();
  std::vector<std::vector<double>> X(n);
  for (std::size_t c = 0; c < C; ++c) {
    if (t.schema.columns[c].kind == ColumnKind::numeric) {
      double lo = 1e300, hi = -1e300;
      for (const auto& row : t.rows) {
        lo = std::min(lo, *numeric_value(row[c]));
        hi = std::max(hi, *numeric_value(row[c]));
      }
      for (std::size_t r = 0; r < n; ++r)
        X[r].push_back(hi > lo ? (*numeric_value(t.rows[r][c]) - lo) / (hi - lo) : 0.0);
    } else {
      std::set<std::string> values;
      for (const auto& row : t.rows) values.insert(*row[c]);
      for (const auto& v : values)
        for (std::size_t r = 0; r < n; ++r) X[r].push_back(*t.rows[r][c] == v ? 1.0 : 0.0);
    }
  }
  auto cosd = [](std::vector<double> a, std::vector<double> b) {
    auto nrm = [](const std::vector<double>& v) { return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)); };
    if (nrm(a) == 0 || nrm(b) == 0) {
      a.push_back(1);
      b.push_back(1);
    }
    return 1 - std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (nrm(a) * nrm(b));
  };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(cosd(X[i], X[j]));
    std::sort(d.begin(), d.end());
    out[i] = std::accumulate(d.begin(), d.begin() + k, 0.0) / k;
  }
  return out;
}

std::vector<int> labels_of(const std::vector<ShadowTrial>& trials) {
  std::vector<int> out;
  for (const auto& t : trials) out.push_back(t.member);
  return out;
}

std::vector<RawTable> sets_of(const std::vector<ShadowTrial>& trials) {
  std::vector<RawTable> out;
  for (const auto& t : trials) out.push_back(t.train);
  return out;
}

}  // namespace

TEST_CASE("achilles: duplicates, orthogonal rows, brute-force oracle, equivariance") {
  std::vector<std::vector<Cell>> rows(6, {Cell("1.5"), Cell("a")});
  rows.push_back({Cell("9"), Cell("b")});
  auto dup = make_table({"x", "c"}, rows);
  dup.schema = infer_schema(dup);
  for (std::size_t r = 0; r < 6; ++r) CHECK(achilles_score(dup, 5)[r] == doctest::Approx(0.0).epsilon(1e-12));

  auto ortho = test::column_table("c", {"a", "b", "c", "d", "e", "f", "g"});
  for (double s : achilles_score(ortho, 5)) CHECK(s == doctest::Approx(1.0));

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto t = test::mixed_table(20, seed);
    const auto got = achilles_score(t, 5);
    const auto want = achilles_oracle(t, 5);
    for (std::size_t i = 0; i < 20; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));

    // Reversing the rows reverses the scores.
    auto rev = t;
    std::reverse(rev.rows.begin(), rev.rows.end());
    const auto back = achilles_score(rev, 5);
    for (std::size_t i = 0; i < 20; ++i) CHECK(back[19 - i] == doctest::Approx(got[i]).epsilon(1e-12));
  }

  const auto t = test::mixed_table(30, 4);
  const auto scores = achilles_score(t, 5);
  const auto top = top_vulnerable(t, 3);
  CHECK(top.size() == 3);
  CHECK(scores[top[0]] == *std::max_element(scores.begin(), scores.end()));
  CHECK(scores[top[0]] >= scores[top[1]]);
  CHECK_THROWS_AS(achilles_score(t, 30), ConfigError);
}

TEST_CASE("shadow trials: exact balance, size, determinism, membership") {
  const auto all = test::mixed_table(301, 5);
  const auto pool = head(all, 1, 301);
  const auto& target = all.rows[0];
  AuditConfig cfg{.n_shadow = 10, .shadow_size = 50, .seed = 6};
  const auto trials = build_shadow_trials(pool, target, cfg);
  REQUIRE(trials.size() == 10);
  int members = 0;
  for (const auto& t : trials) {
    members += t.member;
    CHECK(t.train.row_count() == 50);
    const bool has_target = std::find(t.train.rows.begin(), t.train.rows.end(), target) != t.train.rows.end();
    CHECK(has_target == t.member);
    std::set<std::vector<Cell>> distinct(t.train.rows.begin(), t.train.rows.end());
    CHECK(distinct.size() == 50);  // without replacement
  }
  CHECK(members == 5);

  const auto again = build_shadow_trials(pool, target, cfg);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(again[i].member == trials[i].member);
    CHECK(again[i].train.rows == trials[i].train.rows);
  }
  cfg.shadow_size = 400;
  CHECK_THROWS_AS(build_shadow_trials(pool, target, cfg), ConfigError);
  cfg.shadow_size = 50;
  cfg.n_shadow = 7;
  CHECK_THROWS_AS(build_shadow_trials(pool, target, cfg), ConfigError);
}

TEST_CASE("features: partition, constant variance, exact query count") {
  const auto all = test::mixed_table(201, 7);
  const auto pool = head(all, 1, 201);
  AuditConfig cfg{.n_shadow = 4, .shadow_size = 50, .subset_size = 3, .seed = 8};
  const auto ctx = AttackContext::build(pool, all.rows[0], cfg);
  const auto syn = head(pool, 0, 80);

  // hist: every column block sums to the row count.
  const auto h = extract_features(syn, ctx, AttackKind::hist_gh);
  std::size_t off = 0;
  for (std::size_t c = 0; c < 3; ++c) {
    const std::size_t width = ctx.schema.columns[c].kind == ColumnKind::numeric ? 11 : ctx.vocab[c].size() + 2;
    CHECK(std::accumulate(h.begin() + static_cast<std::ptrdiff_t>(off), h.begin() + static_cast<std::ptrdiff_t>(off + width), 0.0) == 80.0);
    off += width;
  }
  CHECK(off == h.size());

  auto flat = syn;
  for (auto& row : flat.rows) row[0] = Cell("4.25");
  const auto nv = extract_features(flat, ctx, AttackKind::naive_gh);
  CHECK(nv[0] == 4.25);  // mean
  CHECK(nv[1] == 4.25);  // median
  CHECK(nv[2] == 0.0);   // variance
  CHECK(extract_features(syn, ctx, AttackKind::logistic_gh).size() == nv.size() + h.size());
  CHECK(extract_features(syn, ctx, AttackKind::corr_gh).size() == 3);

  // Every query covers all columns; only the planted copy matches.
  auto probe = syn;
  const std::string other = *all.rows[0][1] == "red" ? "green" : "red";
  for (auto& row : probe.rows) row[1] = Cell(other);
  probe.rows.push_back(all.rows[0]);
  for (double count : extract_features(probe, ctx, AttackKind::query_based)) CHECK(count == 1.0);
  CHECK_THROWS_AS(extract_features(syn, ctx, AttackKind::closest_l2), ConfigError);
}

TEST_CASE("attacks: planted leak, lookup, constant sets, null permutations") {
  const auto all = test::mixed_table(601, 9);
  const auto pool = head(all, 1, 601);
  const auto& target = all.rows[0];
  AuditConfig cfg{.n_shadow = 64, .shadow_size = 100, .seed = 10};
  const auto trials = build_shadow_trials(pool, target, cfg);
  const auto ctx = AttackContext::build(pool, target, cfg);
  const auto labels = labels_of(trials);

  // The identity generator leaks the target whenever it is a member.
  const ShadowGenerator leak = [](const RawTable& train, std::uint64_t) { return train; };
  const auto sets = synthesize_shadow_sets(trials, leak, 1);
  CHECK(run_distance_attack(sets, labels, ctx, AttackKind::direct_lookup).auc == 1.0);
  CHECK(run_distance_attack(sets, labels, ctx, AttackKind::closest_hamming).auc >= 0.9);
  CHECK(run_distance_attack(sets, labels, ctx, AttackKind::closest_l2).auc >= 0.9);

  // KDE: swapping the planted copy for another pool row lowers the density.
  int higher = 0, members = 0;
  for (std::size_t t = 0; t < sets.size(); ++t) {
    if (!labels[t]) continue;
    ++members;
    std::vector<RawTable> pair{sets[t], sets[t]};
    pair[1].rows.back() = pool.rows[t];
    const auto kde = run_distance_attack(pair, std::vector<int>{1, 0}, ctx, AttackKind::kernel_density);
    higher += kde.scores[0] > kde.scores[1];
  }
  CHECK(higher == members);

  // Hamming score on a set containing the target is -0, the maximum.
  const auto one = run_distance_attack(sets, labels, ctx, AttackKind::closest_hamming);
  for (std::size_t t = 0; t < sets.size(); ++t)
    if (labels[t]) CHECK(one.scores[t] == 0.0);

  const std::vector<RawTable> same(64, sets[0]);
  CHECK(run_distance_attack(same, labels, ctx, AttackKind::closest_l2).auc == 0.5);
  CHECK(run_shadow_attack(same, labels, ctx, AttackKind::naive_gh, 3).auc == 0.5);

  // Label permutations: mean AUC over 10 shuffles of the feature attacks.
  Rng rng(11);
  for (AttackKind kind : {AttackKind::hist_gh, AttackKind::query_based}) {
    double mean = 0;
    for (int rep = 0; rep < 10; ++rep) {
      auto shuffled = labels;
      rng.shuffle(shuffled);
      mean += run_shadow_attack(sets, shuffled, ctx, kind, static_cast<std::uint64_t>(rep)).auc / 10;
    }
    CHECK(std::abs(mean - 0.5) <= 0.1);
  }

  // Generator failures name the trial.
  const ShadowGenerator broken = [](const RawTable&, std::uint64_t) -> RawTable { throw NumericError("boom"); };
  CHECK_THROWS_WITH(synthesize_shadow_sets(trials, broken, 1), doctest::Contains("shadow trial"));
}

TEST_CASE("query attack separates a planted leak on exact-match columns") {
  // Three categorical columns with 20 levels each: the target's full
  // combination almost never occurs by chance.
  Rng rng(15);
  std::vector<std::vector<Cell>> rows;
  for (int i = 0; i < 601; ++i)
    rows.push_back({Cell("a" + std::to_string(rng.below(20))), Cell("b" + std::to_string(rng.below(20))),
                    Cell("c" + std::to_string(rng.below(20)))});
  auto all = make_table({"a", "b", "c"}, rows);
  all.schema = infer_schema(all);
  const auto pool = head(all, 1, 601);
  AuditConfig cfg{.n_shadow = 64, .shadow_size = 100, .subset_size = 3, .seed = 16};
  const auto trials = build_shadow_trials(pool, all.rows[0], cfg);
  const auto ctx = AttackContext::build(pool, all.rows[0], cfg);
  const ShadowGenerator leak = [](const RawTable& train, std::uint64_t) { return train; };
  CHECK(run_shadow_attack(trials, leak, ctx, AttackKind::query_based, 2).auc >= 0.9);
}

TEST_CASE("meta classifier and accuracy helpers") {
  const std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1};
  std::vector<std::vector<double>> separable;
  for (int l : labels) separable.push_back({l * 3.0 + 0.1 * static_cast<double>(separable.size())});
  CHECK(meta_classify("x", separable, labels, 1).auc == 1.0);
  const std::vector<std::vector<double>> constant(8, {1.0, 2.0});
  const auto flat = meta_classify("x", constant, labels, 1);
  CHECK(flat.auc == 0.5);
  for (double s : flat.scores) CHECK(s == 0.5);

  const std::vector<double> scores{0.1, 0.9, 0.2, 0.8};
  const std::vector<int> l4{0, 1, 0, 1};
  CHECK(median_accuracy(scores, l4) == 1.0);
  const std::vector<double> ties(4, 0.3);
  CHECK(median_accuracy(ties, l4) == 0.5);

  // auc(-s) = 1 - auc(s).
  Rng rng(12);
  std::vector<double> s(100), neg(100);
  std::vector<int> l(100);
  for (std::size_t i = 0; i < 100; ++i) {
    l[i] = static_cast<int>(i % 2);
    s[i] = rng.normal() + l[i];
    neg[i] = -s[i];
  }
  CHECK(auc(neg, l) == doctest::Approx(1 - auc(s, l)).epsilon(1e-12));
}

TEST_CASE("run_audit: deterministic report over targets") {
  const auto data = test::mixed_table(400, 13);
  AuditConfig cfg{.n_shadow = 16, .shadow_size = 60, .target_indices = {0, 5}, .seed = 14};
  const ShadowGenerator gen = [](const RawTable& train, std::uint64_t seed) {
    // Bootstrap resample: a weak leak, deterministic given the seed.
    Rng rng(seed);
    RawTable out = train;
    for (auto& row : out.rows) row = train.rows[rng.below(train.row_count())];
    return out;
  };
  const auto a = run_audit(data, cfg, gen);
  const auto b = run_audit(data, cfg, gen);
  REQUIRE(a.targets.size() == 2);
  CHECK(a.targets[1].target_index == 5);
  CHECK(a.targets[0].attacks.size() == all_attacks().size());
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t k = 0; k < a.targets[t].attacks.size(); ++k) {
      CHECK(a.targets[t].attacks[k].scores == b.targets[t].attacks[k].scores);
      CHECK(a.targets[t].attacks[k].auc >= 0.0);
      CHECK(a.targets[t].attacks[k].auc <= 1.0);
    }
  for (const auto kind : all_attacks()) CHECK(attack_from_string(to_string(kind)) == kind);
  CHECK_THROWS_AS(attack_from_string("nope"), ConfigError);
}
