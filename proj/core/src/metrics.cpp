#include "argn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "argn/error.hpp"
#include "argn/linear.hpp"
#include "argn/parallel.hpp"
#include "argn/rng.hpp"

namespace argn {

namespace {

std::map<std::optional<std::string>, double> distribution(std::span<const Cell> values) {
  std::map<std::optional<std::string>, double> p;
  for (const auto& v : values) p[v] += 1.0;
  for (auto& [k, w] : p) w /= static_cast<double>(values.size());
  return p;
}

std::vector<double> present(std::span<const std::optional<double>> values) {
  std::vector<double> out;
  for (const auto& v : values)
    if (v) out.push_back(*v);
  return out;
}

// Integer codes per categorical cell; missing gets its own code.
std::vector<int> category_codes(std::span<const Cell> values, int* n_codes) {
  std::map<std::optional<std::string>, int> codes;
  std::vector<int> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    auto [it, inserted] = codes.emplace(v, static_cast<int>(codes.size()));
    out.push_back(it->second);
  }
  *n_codes = static_cast<int>(codes.size());
  return out;
}

double pearson(std::span<const std::optional<double>> a, std::span<const std::optional<double>> b) {
  double n = 0, sa = 0, sb = 0;
  for (std::size_t r = 0; r < a.size(); ++r)
    if (a[r] && b[r]) {
      n += 1;
      sa += *a[r];
      sb += *b[r];
    }
  if (n < 2) return 0.0;
  const double ma = sa / n, mb = sb / n;
  double cab = 0, caa = 0, cbb = 0;
  for (std::size_t r = 0; r < a.size(); ++r)
    if (a[r] && b[r]) {
      const double da = *a[r] - ma, db = *b[r] - mb;
      cab += da * db;
      caa += da * da;
      cbb += db * db;
    }
  if (caa <= 0.0 || cbb <= 0.0) return 0.0;
  return std::clamp(cab / std::sqrt(caa * cbb), -1.0, 1.0);
}

double correlation_ratio(std::span<const int> codes, int n_codes, std::span<const std::optional<double>> y) {
  std::vector<double> sum(static_cast<std::size_t>(n_codes), 0.0), cnt(static_cast<std::size_t>(n_codes), 0.0);
  double total = 0, n = 0;
  for (std::size_t r = 0; r < y.size(); ++r)
    if (y[r]) {
      sum[static_cast<std::size_t>(codes[r])] += *y[r];
      cnt[static_cast<std::size_t>(codes[r])] += 1;
      total += *y[r];
      n += 1;
    }
  if (n < 2) return 0.0;
  const double mean = total / n;
  double ss_total = 0;
  for (const auto& v : y)
    if (v) ss_total += (*v - mean) * (*v - mean);
  if (ss_total <= 0.0) return 0.0;
  double ss_between = 0;
  for (std::size_t g = 0; g < sum.size(); ++g)
    if (cnt[g] > 0) {
      const double m = sum[g] / cnt[g];
      ss_between += cnt[g] * (m - mean) * (m - mean);
    }
  return std::sqrt(std::clamp(ss_between / ss_total, 0.0, 1.0));
}

double cramers_v(std::span<const int> a, int na, std::span<const int> b, int nb) {
  if (na <= 1 || nb <= 1 || a.empty()) return 0.0;
  std::vector<double> table(static_cast<std::size_t>(na * nb), 0.0), ra(static_cast<std::size_t>(na), 0.0),
      rb(static_cast<std::size_t>(nb), 0.0);
  for (std::size_t r = 0; r < a.size(); ++r) {
    table[static_cast<std::size_t>(a[r] * nb + b[r])] += 1;
    ra[static_cast<std::size_t>(a[r])] += 1;
    rb[static_cast<std::size_t>(b[r])] += 1;
  }
  const double n = static_cast<double>(a.size());
  double chi2 = 0;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) {
      const double e = ra[static_cast<std::size_t>(i)] * rb[static_cast<std::size_t>(j)] / n;
      if (e > 0) {
        const double d = table[static_cast<std::size_t>(i * nb + j)] - e;
        chi2 += d * d / e;
      }
    }
  return std::sqrt(std::clamp(chi2 / (n * static_cast<double>(std::min(na, nb) - 1)), 0.0, 1.0));
}

bool numeric_constant(std::span<const std::optional<double>> v) {
  std::optional<double> first;
  for (const auto& x : v) {
    if (!x) continue;
    if (!first) first = x;
    else if (*x != *first) return false;
  }
  return true;
}

std::pair<RawTable, RawTable> split_rows(const RawTable& t, double fraction, Rng& rng) {
  auto perm = random_permutation(t.row_count(), rng);
  const auto n_first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(t.row_count())));
  RawTable a, b;
  a.schema = b.schema = t.schema;
  for (std::size_t k = 0; k < perm.size(); ++k) (k < n_first ? a : b).rows.push_back(t.rows[perm[k]]);
  a.schema.row_count = a.rows.size();
  b.schema.row_count = b.rows.size();
  return {std::move(a), std::move(b)};
}

}  // namespace

double jsd(std::span<const Cell> real, std::span<const Cell> syn) {
  if (real.empty() || syn.empty()) throw Error("jsd: empty column");
  const auto p = distribution(real);
  const auto q = distribution(syn);
  std::map<std::optional<std::string>, std::pair<double, double>> joint;
  for (const auto& [k, w] : p) joint[k].first = w;
  for (const auto& [k, w] : q) joint[k].second = w;
  double d = 0.0;
  for (const auto& [k, pq] : joint) {
    const double m = 0.5 * (pq.first + pq.second);
    if (pq.first > 0) d += 0.5 * pq.first * std::log2(pq.first / m);
    if (pq.second > 0) d += 0.5 * pq.second * std::log2(pq.second / m);
  }
  return std::clamp(d, 0.0, 1.0);
}

double wasserstein1(std::span<const std::optional<double>> real, std::span<const std::optional<double>> syn) {
  auto a = present(real);
  auto b = present(syn);
  if (a.empty() || b.empty()) throw Error("wasserstein1: empty column");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double lo = std::min(a.front(), b.front());
  const double hi = std::max(a.back(), b.back());
  const double range = hi - lo;
  if (!(range > 0.0)) return 0.0;
  // Integral of |F_a - F_b| over the merged support.
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(grid));
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double x = grid[k];
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    const double width = grid[k + 1] - x;
    if (width > 0) total += std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb) * width;
  }
  return total / range;
}

Matrix association_matrix(const RawTable& table) {
  const std::size_t C = table.column_count();
  std::vector<bool> numeric(C);
  std::vector<std::vector<std::optional<double>>> num(C);
  std::vector<std::vector<int>> codes(C);
  std::vector<int> n_codes(C, 0);
  std::vector<bool> constant(C);
  for (std::size_t c = 0; c < C; ++c) {
    numeric[c] = is_numeric_kind(table.schema.columns[c].kind);
    if (numeric[c]) {
      num[c] = numeric_column(table, c);
      constant[c] = numeric_constant(num[c]);
    } else {
      const auto cells = table.column(c);
      codes[c] = category_codes(cells, &n_codes[c]);
      constant[c] = n_codes[c] <= 1;
    }
  }
  Matrix m(C, C);
  for (std::size_t i = 0; i < C; ++i) {
    m(i, i) = constant[i] ? 0.0 : 1.0;
    for (std::size_t j = i + 1; j < C; ++j) {
      double v = 0.0;
      if (!constant[i] && !constant[j]) {
        if (numeric[i] && numeric[j]) v = pearson(num[i], num[j]);
        else if (!numeric[i] && !numeric[j]) v = cramers_v(codes[i], n_codes[i], codes[j], n_codes[j]);
        else if (numeric[i]) v = correlation_ratio(codes[j], n_codes[j], num[i]);
        else v = correlation_ratio(codes[i], n_codes[i], num[j]);
      }
      m(i, j) = m(j, i) = v;
    }
  }
  return m;
}

double association_l2(const RawTable& real, const RawTable& syn) {
  const Matrix a = association_matrix(real);
  const Matrix b = association_matrix(with_schema(syn, real.schema));
  double s = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) s += (a.data[k] - b.data[k]) * (a.data[k] - b.data[k]);
  return std::sqrt(s);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("auc: scores and labels differ in length");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos = 0, neg = 0, rank_sum = 0;
  for (std::size_t k = 0; k < idx.size();) {
    std::size_t end = k;
    while (end < idx.size() && scores[idx[end]] == scores[idx[k]]) ++end;
    const double midrank = 0.5 * static_cast<double>(k + 1 + end);  // ranks k+1..end
    for (std::size_t t = k; t < end; ++t) {
      if (labels[idx[t]] == 1) {
        rank_sum += midrank;
        pos += 1;
      } else {
        neg += 1;
      }
    }
    k = end;
  }
  if (pos == 0 || neg == 0) throw Error("auc: both classes must be present");
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

double detection_score(const RawTable& real, const RawTable& syn_in, std::uint64_t seed) {
  if (real.row_count() < 100 || syn_in.row_count() < 100)
    throw ConfigError("detection_score needs at least 100 real and 100 synthetic rows");
  const RawTable syn = with_schema(syn_in, real.schema);
  Rng rng(derive_seed(seed, 0xde7));
  auto [real_train, real_test] = split_rows(real, 0.8, rng);
  auto [syn_train, syn_test] = split_rows(syn, 0.8, rng);
  if (real_test.row_count() == 0 || syn_test.row_count() == 0) throw ConfigError("detection_score: empty test split");

  const RawTable* fit_tables[] = {&real, &syn};
  const auto enc = FeatureEncoder::fit(std::span<const RawTable* const>(fit_tables), {false, true});
  auto stack = [&](const RawTable& a, const RawTable& b, std::vector<int>& labels) {
    Matrix X(a.row_count() + b.row_count(), enc.dim);
    for (std::size_t r = 0; r < a.row_count(); ++r) enc.encode(a.rows[r], X.row(r));
    for (std::size_t r = 0; r < b.row_count(); ++r) enc.encode(b.rows[r], X.row(a.row_count() + r));
    labels.assign(a.row_count(), 0);
    labels.insert(labels.end(), b.row_count(), 1);
    return X;
  };
  std::vector<int> y_train, y_test;
  const Matrix X_train = stack(real_train, syn_train, y_train);
  const Matrix X_test = stack(real_test, syn_test, y_test);
  LogisticRegression clf;
  clf.fit(X_train, y_train, 2);
  return auc(clf.score(X_test), y_test);
}

double macro_f1(std::span<const int> truth, std::span<const int> predicted, int n_classes) {
  double total = 0.0;
  int used = 0;
  for (int k = 0; k < n_classes; ++k) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < truth.size(); ++r) {
      if (predicted[r] == k && truth[r] == k) tp += 1;
      else if (predicted[r] == k) fp += 1;
      else if (truth[r] == k) fn += 1;
    }
    if (tp + fp + fn == 0) continue;
    total += 2 * tp / (2 * tp + fp + fn);
    ++used;
  }
  return used ? total / used : 0.0;
}

MlEfficiency ml_efficiency(const RawTable& real_train, const RawTable& syn_in, const RawTable& test_in,
                           const std::string& target) {
  const auto t = real_train.schema.index_of(target);
  if (!t) throw ConfigError("target column '" + target + "' not in schema");
  const RawTable syn_train = with_schema(syn_in, real_train.schema);
  const RawTable real_test = with_schema(test_in, real_train.schema);
  const RawTable* fit_tables[] = {&real_train, &syn_train};
  const auto enc = FeatureEncoder::fit(std::span<const RawTable* const>(fit_tables), {true, true}).without(*t);

  MlEfficiency out;
  out.target = target;
  const ColumnSpec& spec = real_train.schema.columns[*t];

  if (!is_numeric_kind(spec.kind)) {
    out.task = "classification";
    std::map<std::optional<std::string>, int> classes;
    for (const RawTable* tab : {&real_train, &syn_train, &real_test})
      for (const auto& row : tab->rows) classes.emplace(row[*t], 0);
    int k = 0;
    for (auto& [v, id] : classes) id = k++;
    const int K = static_cast<int>(classes.size());
    if (K < 2) throw ConfigError("target '" + target + "' has a single class");
    auto labels = [&](const RawTable& tab) {
      std::vector<int> y;
      for (const auto& row : tab.rows) y.push_back(classes.at(row[*t]));
      return y;
    };
    const Matrix X_test = enc.encode(real_test);
    const auto y_test = labels(real_test);
    auto score = [&](const RawTable& train_tab) {
      MlScores s;
      LogisticRegression clf;
      clf.fit(enc.encode(train_tab), labels(train_tab), K);
      const Matrix p = clf.predict_proba(X_test);
      std::vector<int> pred(X_test.rows);
      for (std::size_t r = 0; r < X_test.rows; ++r) {
        const auto row = p.row(r);
        pred[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      }
      s.macro_f1 = macro_f1(y_test, pred, K);
      double auc_total = 0;
      int auc_used = 0;
      for (int c = 0; c < K; ++c) {
        std::vector<int> bin(y_test.size());
        std::vector<double> sc(y_test.size());
        int positives = 0;
        for (std::size_t r = 0; r < y_test.size(); ++r) {
          bin[r] = y_test[r] == c;
          positives += bin[r];
          sc[r] = p(r, static_cast<std::size_t>(c));
        }
        if (positives == 0 || positives == static_cast<int>(y_test.size())) continue;
        auc_total += auc(sc, bin);
        ++auc_used;
        if (K == 2) break;  // binary: AUC of class 0 vs 1 equals either one-vs-rest curve
      }
      if (auc_used) s.auc = auc_total / auc_used;
      return s;
    };
    out.synthetic = score(syn_train);
    out.baseline = score(real_train);
  } else {
    out.task = "regression";
    auto xy = [&](const RawTable& tab, Matrix& X) {
      std::vector<double> y;
      RawTable kept;
      kept.schema = tab.schema;
      for (const auto& row : tab.rows) {
        const auto v = numeric_cell(spec, row[*t]);
        if (!v) continue;
        y.push_back(*v);
        kept.rows.push_back(row);
      }
      X = enc.encode(kept);
      return y;
    };
    Matrix X_test;
    const auto y_test = xy(real_test, X_test);
    if (y_test.empty()) throw ConfigError("target '" + target + "' has no values in the test table");
    auto score = [&](const RawTable& train_tab) {
      Matrix X;
      const auto y = xy(train_tab, X);
      RidgeRegression model(1e-3);
      model.fit(X, y);
      const auto pred = model.predict(X_test);
      double se = 0;
      for (std::size_t r = 0; r < pred.size(); ++r) se += (pred[r] - y_test[r]) * (pred[r] - y_test[r]);
      MlScores s;
      s.rmse = std::sqrt(se / static_cast<double>(pred.size()));
      return s;
    };
    out.synthetic = score(syn_train);
    out.baseline = score(real_train);
  }
  return out;
}

std::vector<double> dcr(const RawTable& train, const RawTable& other_in, const MixedDistanceSpec& spec) {
  const RawTable other = with_schema(other_in, train.schema);
  const std::size_t C = train.column_count();
  const double kMissing = std::numeric_limits<double>::quiet_NaN();

  // Column-major numeric views; categorical cells become shared integer codes.
  std::vector<bool> numeric(C);
  std::vector<std::vector<double>> tv(C), ov(C);
  for (std::size_t c = 0; c < C; ++c) {
    numeric[c] = is_numeric_kind(train.schema.columns[c].kind);
    if (numeric[c]) {
      const auto a = numeric_column(train, c);
      const auto b = numeric_column(other, c);
      double lo = 0, hi = 0;
      bool any = false;
      for (const auto& v : a)
        if (v) {
          lo = any ? std::min(lo, *v) : *v;
          hi = any ? std::max(hi, *v) : *v;
          any = true;
        }
      const double scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
      for (const auto& v : a) tv[c].push_back(v ? (*v - lo) * scale : kMissing);
      for (const auto& v : b) ov[c].push_back(v ? (*v - lo) * scale : kMissing);
    } else {
      std::map<std::optional<std::string>, double> codes;
      auto code = [&](const Cell& cell) {
        auto [it, _] = codes.emplace(cell, static_cast<double>(codes.size()));
        return it->second;
      };
      for (const auto& row : train.rows) tv[c].push_back(code(row[c]));
      for (const auto& row : other.rows) ov[c].push_back(code(row[c]));
    }
  }

  const bool l2 = spec.aggregation == MixedDistanceSpec::Aggregation::l2;
  std::vector<double> out(other.row_count(), 0.0);
  parallel_for(other.row_count(), [&](std::size_t o) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < train.row_count(); ++t) {
      double d = 0.0;
      for (std::size_t c = 0; c < C && d < best; ++c) {
        const double a = tv[c][t], b = ov[c][o];
        double term;
        if (numeric[c]) {
          const bool ma = std::isnan(a), mb = std::isnan(b);
          term = (ma || mb) ? (ma == mb ? 0.0 : 1.0) : std::fabs(a - b);
        } else {
          term = a == b ? 0.0 : 1.0;
        }
        d += l2 ? term * term : term;
      }
      best = std::min(best, d);
    }
    out[o] = l2 ? std::sqrt(best) : best;
  });
  return out;
}

DcrCurve dcr_curve(std::span<const double> syn_in, std::span<const double> test_in) {
  if (syn_in.empty() || test_in.empty()) throw Error("dcr_cdf_integral: empty DCR sample");
  std::vector<double> syn(syn_in.begin(), syn_in.end()), test(test_in.begin(), test_in.end());
  std::sort(syn.begin(), syn.end());
  std::sort(test.begin(), test.end());
  auto cdf = [](const std::vector<double>& sorted, double d) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), d) - sorted.begin()) /
           static_cast<double>(sorted.size());
  };

  DcrCurve curve;
  const std::size_t m = test.size();
  const std::size_t k = (98 * m + 99) / 100 - 1;  // first index with (k+1)/m >= 0.98
  curve.q98 = test[k];

  std::vector<double> grid{0.0};
  std::merge(syn.begin(), syn.end(), test.begin(), test.end(), std::back_inserter(grid));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (double g : grid) {
    curve.distance.push_back(g);
    curve.cdf_syn.push_back(cdf(syn, g));
    curve.cdf_test.push_back(cdf(test, g));
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size() && grid[i + 1] <= curve.q98; ++i) {
    const double f0 = curve.cdf_syn[i] - curve.cdf_test[i];
    const double f1 = curve.cdf_syn[i + 1] - curve.cdf_test[i + 1];
    integral += 0.5 * (f0 + f1) * (grid[i + 1] - grid[i]);
  }
  curve.integral = integral;
  return curve;
}

double dcr_cdf_integral(std::span<const double> dcr_train_syn, std::span<const double> dcr_train_test) {
  return dcr_curve(dcr_train_syn, dcr_train_test).integral;
}

EvalReport evaluate(const RawTable& real, const RawTable& syn_in, const RawTable* holdout, const EvalOptions& options) {
  const RawTable syn = with_schema(syn_in, real.schema);
  EvalReport report;
  double jsd_sum = 0, wd_sum = 0;
  for (std::size_t c = 0; c < real.column_count(); ++c) {
    const auto& spec = real.schema.columns[c];
    if (is_numeric_kind(spec.kind)) {
      const auto a = numeric_column(real, c);
      const auto b = numeric_column(syn, c);
      if (std::none_of(a.begin(), a.end(), [](auto& v) { return v.has_value(); }) ||
          std::none_of(b.begin(), b.end(), [](auto& v) { return v.has_value(); }))
        continue;
      const double w = wasserstein1(a, b);
      report.wd[spec.name] = w;
      wd_sum += w;
    } else {
      const double j = jsd(real.column(c), syn.column(c));
      report.jsd[spec.name] = j;
      jsd_sum += j;
    }
  }
  if (!report.jsd.empty()) report.jsd_mean = jsd_sum / static_cast<double>(report.jsd.size());
  if (!report.wd.empty()) report.wd_mean = wd_sum / static_cast<double>(report.wd.size());
  report.association_l2 = association_l2(real, syn);
  if (real.row_count() >= 100 && syn.row_count() >= 100) report.detection_auc = detection_score(real, syn, options.seed);

  if (options.target) {
    if (holdout) {
      report.ml_efficiency = ml_efficiency(real, syn, *holdout, *options.target);
    } else {
      Rng rng(derive_seed(options.seed, 0x5717));
      auto [train_part, test_part] = split_rows(real, 0.8, rng);
      report.ml_efficiency = ml_efficiency(train_part, syn, test_part, *options.target);
    }
  }
  if (holdout) {
    const RawTable test = with_schema(*holdout, real.schema);
    report.dcr_integral = dcr_cdf_integral(dcr(real, syn), dcr(real, test));
  }
  return report;
}

}  // namespace argn
