#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "argn/error.hpp"
#include "argn/discretize.hpp"
#include "argn/linear.hpp"
#include "argn/metrics.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace argn;

namespace {

std::vector<Cell> cat_sample(const std::vector<std::pair<std::string, int>>& counts) {
  std::vector<Cell> out;
  for (const auto& [v, n] : counts)
    for (int i = 0; i < n; ++i) out.emplace_back(v);
  return out;
}

// sum p log2(p/m) with 0 log 0 = 0.
double jsd_oracle(const std::map<std::string, double>& P, const std::map<std::string, double>& Q) {
  std::map<std::string, double> M;
  for (const auto& [k, v] : P) M[k] += v / 2;
  for (const auto& [k, v] : Q) M[k] += v / 2;
  auto kl = [&](const std::map<std::string, double>& A) {
    double s = 0;
    for (const auto& [k, v] : A)
      if (v > 0) s += v * std::log2(v / M[k]);
    return s;
  };
  return (kl(P) + kl(Q)) / 2;
}

std::vector<std::optional<double>> opt(const std::vector<double>& v) { return {v.begin(), v.end()}; }

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

RawTable numeric_table(const std::vector<std::string>& names, const std::vector<std::vector<double>>& cols) {
  std::vector<std::vector<Cell>> rows(cols[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& c : cols) rows[r].emplace_back(format_number(c[r]));
  auto t = make_table(names, rows);
  t.schema = infer_schema(t);
  return t;
}

RawTable rows_of(const RawTable& t, std::size_t begin, std::size_t end) {
  RawTable out = t;
  out.rows.assign(t.rows.begin() + static_cast<std::ptrdiff_t>(begin), t.rows.begin() + static_cast<std::ptrdiff_t>(end));
  out.schema.row_count = out.rows.size();
  return out;
}

}  // namespace

TEST_CASE("jsd: identical, disjoint, hand evaluation, symmetry") {
  const auto a = cat_sample({{"x", 3}, {"y", 5}});
  CHECK(jsd(a, a) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(jsd(cat_sample({{"x", 4}}), cat_sample({{"y", 2}, {"z", 2}})) - 1.0) < 1e-12);
  // P = {a: .5, b: .5}, Q = {a: 1}: (0.5 log2(0.5/0.75) + 0.5 log2(0.5/0.25) + log2(1/0.75)) / 2.
  const double hand = (0.5 * std::log2(0.5 / 0.75) + 0.5 * std::log2(2.0) + std::log2(1 / 0.75)) / 2;
  CHECK(jsd(cat_sample({{"a", 1}, {"b", 1}}), cat_sample({{"a", 7}})) == doctest::Approx(hand).epsilon(1e-12));

  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Cell> p, q;
    std::map<std::string, double> P, Q;
    const std::size_t np = 1 + rng.below(40), nq = 1 + rng.below(40);
    for (std::size_t i = 0; i < np; ++i) {
      const auto v = rng.bernoulli(0.1) ? std::string() : "c" + std::to_string(rng.below(5));
      p.push_back(v.empty() ? Cell() : Cell(v));
      P[v.empty() ? "<missing>" : v] += 1.0 / static_cast<double>(np);
    }
    for (std::size_t i = 0; i < nq; ++i) {
      const auto v = "c" + std::to_string(rng.below(7));
      q.emplace_back(v);
      Q[v] += 1.0 / static_cast<double>(nq);
    }
    const double d = jsd(p, q);
    CHECK(d == doctest::Approx(jsd_oracle(P, Q)).epsilon(1e-12));
    CHECK(d == doctest::Approx(jsd(q, p)).epsilon(1e-12));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0 + 1e-12);
  }
  CHECK_THROWS(jsd(std::span<const Cell>{}, a));
}

TEST_CASE("wasserstein1: examples and brute-force transport") {
  const auto s = opt({0.3, 1.5, 2.0, 2.0});
  CHECK(wasserstein1(s, s) == 0.0);
  CHECK(wasserstein1(opt({0, 0, 0}), opt({1, 1})) == doctest::Approx(1.0));
  CHECK(wasserstein1(opt({4, 4}), opt({4})) == 0.0);

  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> x(1 + rng.below(12)), y(1 + rng.below(12));
    for (auto& v : x) v = std::round(rng.normal() * 4) / 2;
    for (auto& v : y) v = rng.normal() * 2 + 1;
    if (x.size() * y.size() > 400) continue;
    CHECK(std::abs(wasserstein1(opt(x), opt(y)) - test::w1_oracle(x, y)) < 1e-9);
  }
  // Equal sizes up to 20.
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(20), y(20);
    for (auto& v : x) v = rng.uniform(-3, 3);
    for (auto& v : y) v = rng.normal();
    CHECK(std::abs(wasserstein1(opt(x), opt(y)) - test::w1_oracle(x, y)) < 1e-9);
  }
}

TEST_CASE("wasserstein1: triangle inequality on a shared scale") {
  // W1 is a metric once all three samples share one min-max range, so pin
  // the range by adding the same two anchor points to each sample.
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto sample = [&] {
      std::vector<std::optional<double>> v{-10.0, 10.0};
      const std::size_t n = 1 + rng.below(48);
      for (std::size_t i = 0; i < n; ++i) v.emplace_back(rng.normal() * 3);
      return v;
    };
    const auto a = sample(), b = sample(), c = sample();
    CHECK(wasserstein1(a, c) <= wasserstein1(a, b) + wasserstein1(b, c) + 1e-9);
  }
}

TEST_CASE("association: identity, sign flip, constants, shuffle") {
  Rng rng(4);
  std::vector<double> x(300), y(300);
  for (std::size_t i = 0; i < 300; ++i) {
    x[i] = rng.normal();
    y[i] = 0.7 * x[i] + rng.normal() * 0.5;
  }
  const auto real = numeric_table({"x", "y"}, {x, y});
  CHECK(association_l2(real, real) == 0.0);

  std::vector<double> neg(y.size());
  std::transform(y.begin(), y.end(), neg.begin(), [](double v) { return -v; });
  const double rho = pearson(x, y);
  // Off-diagonal entries go from rho to -rho: two entries of size 2|rho|.
  CHECK(association_l2(real, numeric_table({"x", "y"}, {x, neg})) ==
        doctest::Approx(std::sqrt(2.0) * 2 * std::abs(rho)).epsilon(1e-9));

  auto shuffled = y;
  rng.shuffle(shuffled);
  CHECK(association_l2(real, numeric_table({"x", "y"}, {x, shuffled})) > 0.5);

  const auto constant = numeric_table({"x", "k"}, {x, std::vector<double>(300, 2.0)});
  const auto m = association_matrix(constant);
  CHECK(m(0, 0) == 1.0);
  CHECK(m(1, 1) == 0.0);
  CHECK(m(0, 1) == 0.0);
}

TEST_CASE("association: correlation ratio and Cramer's V against direct formulas") {
  const auto t = test::mixed_table(400, 5);  // x numeric, c categorical, y numeric
  const auto m = association_matrix(t);
  std::vector<double> x, y;
  std::vector<std::string> c;
  for (const auto& row : t.rows) {
    x.push_back(*numeric_value(row[0]));
    c.push_back(*row[1]);
    y.push_back(*numeric_value(row[2]));
  }
  CHECK(m(0, 2) == doctest::Approx(pearson(x, y)).epsilon(1e-9));
  // eta^2 = between-group SS / total SS.
  std::map<std::string, std::pair<double, int>> groups;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double total = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    groups[c[i]].first += y[i];
    groups[c[i]].second += 1;
    total += (y[i] - mean) * (y[i] - mean);
  }
  double between = 0;
  for (const auto& [k, g] : groups) between += g.second * std::pow(g.first / g.second - mean, 2);
  CHECK(m(1, 2) == doctest::Approx(std::sqrt(between / total)).epsilon(1e-9));
  CHECK(m(2, 1) == m(1, 2));

  // Cramer's V of two identical 3-level columns is 1; of independent ones near 0.
  std::vector<std::vector<Cell>> rows;
  Rng rng(6);
  for (int i = 0; i < 3000; ++i) {
    const auto a = std::to_string(rng.below(3));
    rows.push_back({Cell("a" + a), Cell("b" + a), Cell("c" + std::to_string(rng.below(4)))});
  }
  auto cats = make_table({"a", "b", "c"}, rows);
  cats.schema = infer_schema(cats);
  const auto v = association_matrix(cats);
  CHECK(v(0, 1) == doctest::Approx(1.0));
  CHECK(v(0, 2) < 0.05);
}

TEST_CASE("auc: pairwise counting oracle and tie handling") {
  Rng rng(7);
  std::vector<double> s(200);
  std::vector<int> l(200);
  for (std::size_t i = 0; i < 200; ++i) {
    l[i] = static_cast<int>(i % 2);
    s[i] = std::round(rng.normal() * 3 + l[i]);  // plenty of ties
  }
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < 200; ++i)
    for (std::size_t j = 0; j < 200; ++j)
      if (l[i] == 1 && l[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  CHECK(auc(s, l) == wins / pairs);

  // Invariant under strictly monotone transforms.
  std::vector<double> t(s.size());
  std::transform(s.begin(), s.end(), t.begin(), [](double v) { return std::exp(v / 3) * 5 - 2; });
  CHECK(auc(t, l) == auc(s, l));

  const std::vector<double> flat(10, 0.3);
  const std::vector<int> half{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  CHECK(auc(flat, half) == 0.5);
  const std::vector<int> ones(10, 1);
  CHECK_THROWS(auc(flat, ones));
}

TEST_CASE("detection: null and separable oracles") {
  const auto all = test::mixed_table(2000, 8);
  const double null_auc = detection_score(rows_of(all, 0, 1000), rows_of(all, 1000, 2000), 1);
  CHECK(null_auc == doctest::Approx(0.5).epsilon(0.1));  // 0.5 +- 0.05

  auto garbage = rows_of(all, 1000, 2000);
  for (auto& row : garbage.rows) row = {Cell("5"), Cell("red"), Cell("0")};
  CHECK(detection_score(rows_of(all, 0, 1000), garbage, 1) > 0.95);
  CHECK(detection_score(rows_of(all, 0, 1000), rows_of(all, 1000, 2000), 1) == null_auc);
}

TEST_CASE("ml efficiency: identical inputs, exact regression, perfect classifier") {
  const auto all = test::mixed_table(1200, 9);
  const auto train_part = rows_of(all, 0, 900), test_part = rows_of(all, 900, 1200);
  for (const std::string target : {"c", "y"}) {
    const auto ml = ml_efficiency(train_part, train_part, test_part, target);
    CHECK(ml.task == (target == "c" ? "classification" : "regression"));
    if (target == "c") {
      CHECK(*ml.synthetic.auc == doctest::Approx(*ml.baseline.auc).epsilon(1e-9));
      CHECK(*ml.synthetic.macro_f1 == doctest::Approx(*ml.baseline.macro_f1).epsilon(1e-9));
      CHECK(*ml.synthetic.auc > 0.8);
    } else {
      CHECK(*ml.synthetic.rmse == doctest::Approx(*ml.baseline.rmse).epsilon(1e-9));
      CHECK(*ml.synthetic.rmse < 1.5);  // residual noise sd is 1
    }
  }
  CHECK_THROWS_AS(ml_efficiency(train_part, train_part, test_part, "nope"), ConfigError);

  Matrix X(50, 1);
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    X(i, 0) = static_cast<double>(i) / 7.0;
    y[i] = 2 * X(i, 0);
  }
  RidgeRegression ridge(1e-6);
  ridge.fit(X, y);
  const auto pred = ridge.predict(X);
  double se = 0;
  for (std::size_t i = 0; i < 50; ++i) se += (pred[i] - y[i]) * (pred[i] - y[i]);
  CHECK(std::sqrt(se / 50) < 1e-6);

  const std::vector<int> truth{0, 1, 0, 1, 2, 2};
  CHECK(macro_f1(truth, truth, 3) == 1.0);
  const std::vector<int> pred2{0, 0, 0, 1, 2, 2};
  // class 0: P=2/3 R=1 F=0.8; class 1: P=1 R=0.5 F=2/3; class 2: F=1.
  CHECK(macro_f1(truth, pred2, 3) == doctest::Approx((0.8 + 2.0 / 3 + 1) / 3));
}

TEST_CASE("dcr: zeros on itself, mismatch examples, dual implementation") {
  const auto t = test::mixed_table(120, 10);
  for (auto agg : {MixedDistanceSpec::Aggregation::l1, MixedDistanceSpec::Aggregation::l2})
    for (double d : dcr(t, t, {agg})) CHECK(d == 0.0);

  auto one = test::column_table("c", {"a", "b", "a"});
  auto probe = test::column_table("c", {"z"});
  probe.schema = one.schema;
  CHECK(dcr(one, probe) == std::vector<double>{1.0});

  // Independent re-implementation on random 50x4 tables with missing cells.
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto make = [&](std::size_t n) {
      std::vector<std::vector<Cell>> rows;
      for (std::size_t r = 0; r < n; ++r)
        rows.push_back({rng.bernoulli(0.1) ? Cell() : Cell(format_number(std::round(rng.normal() * 100) / 10)),
                        Cell("k" + std::to_string(rng.below(3))), Cell(format_number(rng.uniform(0, 5))),
                        rng.bernoulli(0.1) ? Cell() : Cell("m" + std::to_string(rng.below(2)))});
      return make_table({"a", "b", "c", "d"}, rows);
    };
    auto train = make(50), other = make(50);
    train.schema = infer_schema(train);
    other.schema = train.schema;
    std::vector<double> lo(4, 1e300), hi(4, -1e300);
    for (const auto& row : train.rows)
      for (std::size_t c : {0u, 2u})
        if (row[c]) {
          lo[c] = std::min(lo[c], *numeric_value(row[c]));
          hi[c] = std::max(hi[c], *numeric_value(row[c]));
        }
    for (auto agg : {MixedDistanceSpec::Aggregation::l1, MixedDistanceSpec::Aggregation::l2}) {
      const auto got = dcr(train, other, {agg});
      for (std::size_t i = 0; i < other.rows.size(); ++i) {
        double best = 1e300;
        for (const auto& tr : train.rows) {
          double s = 0;
          for (std::size_t c = 0; c < 4; ++c) {
            const auto& a = other.rows[i][c];
            const auto& b = tr[c];
            double d;
            if (c == 1 || c == 3) {
              d = a == b ? 0.0 : 1.0;
            } else if (!a && !b) {
              d = 0;
            } else if (!a || !b) {
              d = 1;
            } else {
              d = std::abs(*numeric_value(a) - *numeric_value(b)) / (hi[c] - lo[c]);
            }
            s += agg == MixedDistanceSpec::Aggregation::l1 ? d : d * d;
          }
          best = std::min(best, agg == MixedDistanceSpec::Aggregation::l1 ? s : std::sqrt(s));
        }
        CHECK(got[i] == doctest::Approx(best).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("dcr integral: identical, copies, shifted uniform closed form") {
  Rng rng(12);
  std::vector<double> a(300);
  for (auto& v : a) v = std::abs(rng.normal());
  CHECK(dcr_cdf_integral(a, a) == 0.0);

  const std::vector<double> zeros(300, 0.0);
  CHECK(dcr_cdf_integral(zeros, a) > 0.0);

  // Test DCRs ~ U(0,1), synthetic ~ U(0.2,1.2). With F_test(x) = x, q98 = 0.98:
  // integral = -0.98^2/2 + (0.98-0.2)^2/2 = -0.176.
  const int n = 20000;
  std::vector<double> test(n), syn(n);
  for (int i = 0; i < n; ++i) {
    test[static_cast<std::size_t>(i)] = (i + 1.0) / n;
    syn[static_cast<std::size_t>(i)] = 0.2 + (i + 1.0) / n;
  }
  const auto curve = dcr_curve(syn, test);
  CHECK(curve.q98 == doctest::Approx(0.98));
  CHECK(curve.integral == doctest::Approx(-0.176).epsilon(1e-3));
  CHECK(curve.distance.front() == 0.0);
  CHECK(std::is_sorted(curve.distance.begin(), curve.distance.end()));
  CHECK(curve.cdf_test.back() == 1.0);
  CHECK(curve.integral == dcr_cdf_integral(syn, test));
}

TEST_CASE("evaluate: optional sections follow the inputs") {
  const auto all = test::mixed_table(900, 13);
  const auto real = rows_of(all, 0, 600), syn = rows_of(all, 600, 800), hold = rows_of(all, 800, 900);
  auto report = evaluate(real, syn, nullptr, {.target = "c", .seed = 1});
  CHECK_FALSE(report.dcr_integral.has_value());
  CHECK(report.ml_efficiency.has_value());
  CHECK(report.detection_auc.has_value());
  CHECK(report.jsd.count("c") == 1);
  CHECK(report.wd.size() == 2);
  CHECK(report.jsd_mean == report.jsd.at("c"));

  report = evaluate(real, syn, &hold, {.seed = 1});
  CHECK(report.dcr_integral.has_value());
  CHECK_FALSE(report.ml_efficiency.has_value());

  report = evaluate(real, rows_of(all, 600, 650), nullptr, {});
  CHECK_FALSE(report.detection_auc.has_value());  // fewer than 100 synthetic rows
}
