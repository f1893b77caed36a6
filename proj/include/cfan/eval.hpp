#pragma once
// Metrics (ROC-AUC, EER accuracy, argmax accuracy), fold aggregation, and the
// one-tailed two-sample Student t-test used for the significance tables.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "cfan/util.hpp"

namespace cfan::eval {

namespace detail {

inline void check_binary(std::span<const double> scores, std::span<const int> labels,
                         const char* who, size_t& pos, size_t& neg) {
  require(scores.size() == labels.size(),
          std::string(who) + ": scores and labels differ in length");
  require(!scores.empty(), std::string(who) + ": empty input");
  pos = neg = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, std::string(who) + ": labels must be 0 or 1");
    (l == 1 ? pos : neg)++;
  }
  require(pos > 0 && neg > 0, std::string(who) + ": both classes must be present");
}

}  // namespace detail

// ---- ROC-AUC -----------------------------------------------------------------------

// Mann-Whitney AUC, P(score+ > score-) + P(score+ = score-)/2, via rank sums
// with average ranks on ties.
inline double roc_auc_binary(std::span<const double> scores, std::span<const int> labels) {
  size_t pos = 0, neg = 0;
  detail::check_binary(scores, labels, "roc_auc_binary", pos, neg);

  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = double(i + j + 1) / 2.0;  // 1-based average over the tie group
    for (size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) positive_rank_sum += avg_rank;
    i = j;
  }
  const double u = positive_rank_sum - double(pos) * double(pos + 1) / 2.0;
  return u / (double(pos) * double(neg));
}

// One-vs-rest macro AUC: the unweighted mean of per-class binary AUC over the
// classes present in `labels`. Absent classes are skipped with a warning.
inline double macro_ovr_auc(const std::vector<std::vector<double>>& probabilities,
                            std::span<const int> labels,
                            std::vector<std::string>* warnings = nullptr) {
  require(!probabilities.empty(), "macro_ovr_auc: empty input");
  require(probabilities.size() == labels.size(),
          "macro_ovr_auc: probabilities and labels differ in length");
  const size_t n_classes = probabilities.front().size();
  require(n_classes >= 2, "macro_ovr_auc: need at least two probability columns");
  for (const auto& row : probabilities)
    require(row.size() == n_classes, "macro_ovr_auc: ragged probability matrix");

  std::vector<size_t> count(n_classes, 0);
  for (int l : labels) {
    require(l >= 0 && size_t(l) < n_classes, "macro_ovr_auc: label out of range");
    count[size_t(l)]++;
  }
  size_t distinct = 0;
  for (size_t c : count) distinct += (c > 0) ? 1 : 0;
  require(distinct >= 2, "macro_ovr_auc: need at least two distinct classes in labels");

  std::vector<double> scores(labels.size());
  std::vector<int> indicator(labels.size());
  double sum = 0.0;
  size_t used = 0;
  for (size_t c = 0; c < n_classes; ++c) {
    if (count[c] == 0) {
      if (warnings)
        warnings->push_back("class " + std::to_string(c) +
                            " absent from the test fold; skipped in macro AUC");
      continue;
    }
    for (size_t i = 0; i < labels.size(); ++i) {
      scores[i] = probabilities[i][c];
      indicator[i] = (size_t(labels[i]) == c) ? 1 : 0;
    }
    sum += roc_auc_binary(scores, indicator);
    ++used;
  }
  return sum / double(used);
}

// ---- accuracy ----------------------------------------------------------------------

// Fraction of rows whose argmax (lowest index wins ties) equals the label.
inline double accuracy_argmax(const std::vector<std::vector<double>>& probabilities,
                              std::span<const int> labels) {
  require(!probabilities.empty(), "accuracy_argmax: empty input");
  require(probabilities.size() == labels.size(),
          "accuracy_argmax: probabilities and labels differ in length");
  size_t correct = 0;
  for (size_t i = 0; i < probabilities.size(); ++i) {
    const auto& row = probabilities[i];
    require(!row.empty(), "accuracy_argmax: empty probability row");
    size_t argmax = 0;
    for (size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[argmax]) argmax = c;
    correct += (labels[i] >= 0 && size_t(labels[i]) == argmax) ? 1 : 0;
  }
  return double(correct) / double(probabilities.size());
}

// ---- equal error rate --------------------------------------------------------------

// Sweeps thresholds over the sorted unique scores (predict positive when
// score >= threshold), locates the FPR = FNR crossing with linear
// interpolation between adjacent operating points, and returns 1 - EER.
inline double eer_accuracy(std::span<const double> scores, std::span<const int> labels) {
  size_t pos = 0, neg = 0;
  detail::check_binary(scores, labels, "eer_accuracy", pos, neg);

  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  // strictest threshold first: nothing predicted positive
  double prev_fpr = 0.0, prev_fnr = 1.0;
  size_t tp = 0, fp = 0;
  size_t i = 0;
  double eer = (prev_fpr + prev_fnr) / 2.0;  // defensive; the loop always crosses
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) (labels[order[k]] == 1 ? tp : fp)++;
    const double fpr = double(fp) / double(neg);
    const double fnr = double(pos - tp) / double(pos);
    if (fpr >= fnr) {
      if (fpr == fnr) {
        eer = fpr;
      } else {
        const double d_prev = prev_fnr - prev_fpr;  // > 0
        const double d_cur = fpr - fnr;             // > 0
        const double w = d_prev / (d_prev + d_cur);
        eer = prev_fpr + w * (fpr - prev_fpr);
      }
      return 1.0 - eer;
    }
    prev_fpr = fpr;
    prev_fnr = fnr;
    i = j;
  }
  return 1.0 - eer;
}

// ---- ROC curve (for plots) ---------------------------------------------------------

// Staircase operating points from (0,0) to (1,1), one per unique score
// (predict positive when score >= threshold), threshold descending.
inline std::vector<std::pair<double, double>> roc_curve(std::span<const double> scores,
                                                        std::span<const int> labels) {
  size_t pos = 0, neg = 0;
  detail::check_binary(scores, labels, "roc_curve", pos, neg);

  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, 0.0);
  size_t tp = 0, fp = 0, i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (size_t k = i; k < j; ++k) (labels[order[k]] == 1 ? tp : fp)++;
    points.emplace_back(double(fp) / double(neg), double(tp) / double(pos));
    i = j;
  }
  return points;
}

// ---- aggregation -------------------------------------------------------------------

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n-1 divisor)
};

inline MeanStd aggregate(std::span<const double> values) {
  require(values.size() >= 2, "aggregate: need at least two folds");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / double(values.size() - 1))};
}

// ---- significance ------------------------------------------------------------------

// One-tailed two-sample pooled-variance Student t-test of mean(a) > mean(b),
// 2k-2 degrees of freedom; returns the upper-tail p-value.
inline double t_test_one_tailed(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "t_test_one_tailed: fold counts differ");
  require(a.size() >= 2, "t_test_one_tailed: need at least two folds per side");
  const double k = double(a.size());

  auto mean_ss = [](std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair<double, double>{m, ss};
  };
  auto [ma, ssa] = mean_ss(a);
  auto [mb, ssb] = mean_ss(b);

  const double dof = 2.0 * k - 2.0;
  const double pooled_variance = (ssa + ssb) / dof;
  if (pooled_variance == 0.0) {
    if (ma == mb) return 0.5;
    return ma > mb ? 0.0 : 1.0;  // infinite-t limit, saturated
  }
  const double t = (ma - mb) / std::sqrt(pooled_variance * (2.0 / k));
  boost::math::students_t distribution(dof);
  return boost::math::cdf(boost::math::complement(distribution, t));
}

// ---- CSV schemas -------------------------------------------------------------------

struct FoldReport {
  std::string task;
  std::string arch;
  int fold = 0;
  double auc = 0.0;
  double acc = 0.0;
  size_t n_test = 0;
};

struct SummaryRow {
  std::string task;
  std::string arch;
  double auc_mean = 0.0;
  double auc_std = 0.0;
  double acc_mean = 0.0;
  double acc_std = 0.0;
};

inline std::string fold_reports_csv(std::span<const FoldReport> reports) {
  std::string out = "task,arch,fold,auc,acc,n_test\n";
  char buf[192];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.17g,%.17g,%zu\n", r.task.c_str(),
                  r.arch.c_str(), r.fold, r.auc, r.acc, r.n_test);
    out += buf;
  }
  return out;
}

inline std::string summary_csv(std::span<const SummaryRow> rows) {
  std::string out = "task,arch,auc_mean,auc_std,acc_mean,acc_std\n";
  char buf[224];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g\n", r.task.c_str(),
                  r.arch.c_str(), r.auc_mean, r.auc_std, r.acc_mean, r.acc_std);
    out += buf;
  }
  return out;
}

// Square matrix of p-values for mean(row) > mean(column); the diagonal is the
// identical-vector case and evaluates to 0.5.
inline std::string p_value_matrix_csv(const std::vector<std::string>& arch_names,
                                      const std::vector<std::vector<double>>& p) {
  require(p.size() == arch_names.size(), "p_value_matrix_csv: shape mismatch");
  std::string out = "arch";
  for (const auto& name : arch_names) out += "," + name;
  out += "\n";
  char buf[64];
  for (size_t i = 0; i < p.size(); ++i) {
    require(p[i].size() == arch_names.size(), "p_value_matrix_csv: shape mismatch");
    out += arch_names[i];
    for (double v : p[i]) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace cfan::eval
