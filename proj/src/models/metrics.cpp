#include <algorithm>
#include <cmath>

#include "train_internal.hpp"

namespace streamlab {

Metrics evaluate(const TrainedModel& model, const Dataset& test) {
  if (model.spec.task != TaskType::Classification)
    throw InvalidModel("evaluate expects a classifier");
  if (test.rows.empty()) throw DegenerateData("empty test set");
  Metrics m;
  m.classes = model.classes;
  size_t C = m.classes.size();
  m.confusion.assign(C + 1, std::vector<uint64_t>(C, 0));

  size_t correct = 0;
  for (const auto& r : test.rows) {
    if (!r.label) throw MissingLabel("unlabeled test row");
    size_t pred = model.predict_class(r.values);
    auto it = std::find(m.classes.begin(), m.classes.end(), *r.label);
    size_t truth = it == m.classes.end() ? C : size_t(it - m.classes.begin());
    if (truth == C) m.has_unknown_row = true;
    m.confusion[truth][pred]++;
    if (truth == pred) ++correct;
  }
  m.accuracy = double(correct) / double(test.rows.size());
  if (!m.has_unknown_row) m.confusion.resize(C);

  double psum = 0, rsum = 0, fsum = 0;
  for (size_t c = 0; c < C; ++c) {
    uint64_t tp = m.confusion[c][c];
    uint64_t fp = 0, fn = 0;
    for (size_t t = 0; t < m.confusion.size(); ++t)
      if (t != c) fp += m.confusion[t][c];
    for (size_t pcol = 0; pcol < C; ++pcol)
      if (pcol != c) fn += m.confusion[c][pcol];
    double prec = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
    double rec = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
    double f1 = prec + rec == 0 ? 0.0 : 2 * prec * rec / (prec + rec);
    psum += prec;
    rsum += rec;
    fsum += f1;
  }
  m.macro_precision = psum / double(C);
  m.macro_recall = rsum / double(C);
  m.macro_f1 = fsum / double(C);
  return m;
}

RegressionMetrics evaluate_regression(const TrainedModel& model,
                                      const Dataset& test,
                                      const std::string& target) {
  if (model.spec.task != TaskType::Regression)
    throw InvalidModel("evaluate_regression expects a regressor");
  std::vector<double> y = detail::targets_for(test, target);
  if (y.empty()) throw DegenerateData("empty test set");

  RegressionMetrics rm;
  double mean = 0;
  for (double v : y) mean += v;
  mean /= double(y.size());

  double lo = *std::min_element(y.begin(), y.end());
  double hi = *std::max_element(y.begin(), y.end());
  double range = hi - lo;
  rm.degenerate_target = range == 0;

  double sse = 0, sst = 0, sse_norm = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    double pred = model.predict_value(test.rows[i].values);
    double e = pred - y[i];
    sse += e * e;
    sst += (y[i] - mean) * (y[i] - mean);
    if (!rm.degenerate_target) {
      double en = e / range;
      sse_norm += en * en;
    }
  }
  rm.mse = sse / double(y.size());
  rm.mse_norm_1e5 = rm.degenerate_target
                        ? 0.0
                        : sse_norm / double(y.size()) * 1e5;
  rm.r2 = sst == 0 ? 0.0 : 1.0 - sse / sst;
  return rm;
}

}  // namespace streamlab
