#include "hcp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hcp {

namespace {

constexpr double kRecallSlack = 1e-9;

}  // namespace

ClassEval evaluate_class(const std::vector<double>& scores,
                         const std::vector<int>& labels, bool eleven_point) {
  if (scores.size() != labels.size())
    throw ShapeError("ap: scores/labels length mismatch");
  if (scores.empty()) throw ShapeError("ap: empty input");

  long long npos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw DataError("ap: labels must be 0/1");
    npos += l;
  }
  ClassEval ev;
  if (npos == 0) return ev;  // evaluable stays false
  ev.evaluable = true;

  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[size_t(a)] > scores[size_t(b)];
  });

  // Flag ties that span the positive/negative boundary.
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    bool has_pos = false, has_neg = false;
    while (j < order.size() &&
           scores[size_t(order[j])] == scores[size_t(order[i])]) {
      (labels[size_t(order[j])] ? has_pos : has_neg) = true;
      ++j;
    }
    if (has_pos && has_neg) ev.ties_cross_boundary = true;
    i = j;
  }

  long long tp = 0;
  ev.curve.reserve(order.size());
  for (size_t rank = 0; rank < order.size(); ++rank) {
    tp += labels[size_t(order[rank])];
    PRPoint pt;
    pt.recall = double(tp) / double(npos);
    pt.precision = double(tp) / double(rank + 1);
    ev.curve.push_back(pt);
  }

  if (eleven_point) {
    double acc = 0.0;
    for (int level = 0; level <= 10; ++level) {
      double r = level / 10.0;
      double best = 0.0;
      for (const PRPoint& pt : ev.curve)
        if (pt.recall >= r - kRecallSlack) best = std::max(best, pt.precision);
      acc += best;
    }
    ev.ap = acc / 11.0;
  } else {
    // Area under the interpolated curve: precision made nonincreasing from
    // the right, summed over recall increments.
    std::vector<double> prec(ev.curve.size());
    for (size_t i = 0; i < ev.curve.size(); ++i) prec[i] = ev.curve[i].precision;
    for (size_t i = prec.size() - 1; i-- > 0;)
      prec[i] = std::max(prec[i], prec[i + 1]);
    double acc = 0.0, prev_recall = 0.0;
    for (size_t i = 0; i < ev.curve.size(); ++i) {
      double r = ev.curve[i].recall;
      if (r > prev_recall) {
        acc += (r - prev_recall) * prec[i];
        prev_recall = r;
      }
    }
    ev.ap = acc;
  }
  return ev;
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels, bool eleven_point) {
  ClassEval ev = evaluate_class(scores, labels, eleven_point);
  if (!ev.evaluable) throw DataError("ap: no positive labels");
  return ev.ap;
}

EvalReport mean_ap(const std::vector<std::vector<double>>& scores,
                   const std::vector<std::vector<int>>& labels,
                   bool eleven_point) {
  if (scores.size() != labels.size())
    throw ShapeError("map: class count mismatch");
  if (scores.empty()) throw DataError("map: no classes");

  EvalReport report;
  double sum = 0.0;
  int counted = 0;
  for (size_t c = 0; c < scores.size(); ++c) {
    ClassEval ev = evaluate_class(scores[c], labels[c], eleven_point);
    if (ev.evaluable) {
      sum += ev.ap;
      ++counted;
    } else {
      report.skipped_classes.push_back(int(c));
    }
    report.per_class.push_back(std::move(ev));
  }
  if (counted == 0) throw DataError("map: no evaluable classes");
  report.map = sum / counted;
  return report;
}

}  // namespace hcp
