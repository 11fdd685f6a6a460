#include <algorithm>
#include <cmath>

#include "train_internal.hpp"

namespace streamlab {

const char* family_name(ModelFamily f) {
  return f == ModelFamily::RandomForest ? "random_forest"
                                        : "gradient_boosted_trees";
}

ModelFamily family_from_name(const std::string& name) {
  if (name == "random_forest") return ModelFamily::RandomForest;
  if (name == "gradient_boosted_trees") return ModelFamily::GradientBoostedTrees;
  throw InvalidModel("unknown model family: " + name);
}

std::string ModelSpec::describe() const {
  std::string s = family_name(family);
  if (family == ModelFamily::RandomForest) {
    s += " n=" + std::to_string(rf.n_estimators);
    s += " depth=" + (rf.max_depth == 0 ? std::string("none")
                                        : std::to_string(rf.max_depth));
    s += rf.max_features == RfParams::MaxFeatures::Sqrt ? " feat=sqrt"
                                                        : " feat=log2";
    s += rf.bootstrap ? " bootstrap" : " no-bootstrap";
  } else {
    s += " n=" + std::to_string(gbt.n_estimators);
    s += " depth=" + std::to_string(gbt.max_depth);
    char buf[32];
    snprintf(buf, sizeof buf, " gamma=%g", gbt.gamma);
    s += buf;
  }
  return s;
}

void TrainedModel::check_input(const std::vector<double>& x) const {
  if (x.size() != feature_dim)
    throw DimensionMismatch("expected " + std::to_string(feature_dim) +
                            " features, got " + std::to_string(x.size()));
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidModel("non-finite feature value");
}

namespace detail {

std::vector<double> gbt_scores(const TrainedModel& m,
                               const std::vector<double>& x) {
  std::vector<double> scores(m.tree_groups.size());
  for (size_t k = 0; k < m.tree_groups.size(); ++k) {
    double s = k < m.base_scores.size() ? m.base_scores[k] : 0.0;
    for (const Tree& t : m.tree_groups[k])
      s += m.spec.gbt.learning_rate * t.predict(x);
    scores[k] = s;
  }
  return scores;
}

void softmax(std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0;
  for (double& s : v) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (double& s : v) s /= sum;
}

}  // namespace detail

using detail::gbt_scores;
using detail::softmax;

size_t TrainedModel::predict_class(const std::vector<double>& x) const {
  check_input(x);
  if (spec.task != TaskType::Classification)
    throw InvalidModel("not a classifier");
  if (spec.family == ModelFamily::RandomForest) {
    std::vector<uint32_t> votes(classes.size(), 0);
    for (const Tree& t : tree_groups[0]) {
      size_t c = size_t(t.predict(x) + 0.5);
      if (c < votes.size()) votes[c]++;
    }
    size_t best = 0;
    for (size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[best]) best = c;
    return best;
  }
  std::vector<double> scores = gbt_scores(*this, x);
  size_t best = 0;
  for (size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return best;
}

OperatorKind TrainedModel::predict_label(const std::vector<double>& x) const {
  return classes.at(predict_class(x));
}

double TrainedModel::confidence(const std::vector<double>& x) const {
  check_input(x);
  if (spec.family == ModelFamily::RandomForest) {
    std::vector<uint32_t> votes(classes.size(), 0);
    for (const Tree& t : tree_groups[0]) {
      size_t c = size_t(t.predict(x) + 0.5);
      if (c < votes.size()) votes[c]++;
    }
    size_t best = 0;
    for (size_t c = 1; c < votes.size(); ++c)
      if (votes[c] > votes[best]) best = c;
    return double(votes[best]) / double(tree_groups[0].size());
  }
  std::vector<double> scores = gbt_scores(*this, x);
  softmax(scores);
  return *std::max_element(scores.begin(), scores.end());
}

double TrainedModel::predict_value(const std::vector<double>& x) const {
  check_input(x);
  if (spec.task != TaskType::Regression)
    throw InvalidModel("not a regressor");
  if (spec.family == ModelFamily::RandomForest) {
    double sum = 0;
    for (const Tree& t : tree_groups[0]) sum += t.predict(x);
    return sum / double(tree_groups[0].size());
  }
  return gbt_scores(*this, x)[0];
}

namespace detail {

namespace {

void check_rf_params(const RfParams& p) {
  if (p.n_estimators < 1) throw InvalidModel("n_estimators must be >= 1");
  if (p.max_depth < 0) throw InvalidModel("max_depth must be >= 0");
}

}  // namespace

TrainedModel fit_rf(const Dataset& train, const ModelSpec& spec,
                    const std::string& target) {
  check_features(train);
  check_rf_params(spec.rf);
  TrainedModel m;
  m.spec = spec;
  m.feature_dim = train.k;

  std::vector<const std::vector<double>*> rows;
  rows.reserve(train.rows.size());
  for (const auto& r : train.rows) rows.push_back(&r.values);
  BinnedData binned = bin_rows(rows, train.k);

  TreeParams tp;
  tp.max_depth = spec.rf.max_depth == 0 ? 64 : spec.rf.max_depth;
  tp.max_features = resolve_max_features(spec.rf.max_features, train.k);

  size_t n = train.rows.size();
  std::vector<uint16_t> y;
  std::vector<double> yr;
  if (spec.task == TaskType::Classification) {
    m.classes = train.classes();
    if (m.classes.size() < 2)
      throw DegenerateData("need at least 2 classes to classify");
    y = labels_for(train, m.classes);
  } else {
    yr = targets_for(train, target);
    m.target_name = target;
  }

  m.tree_groups.resize(1);
  m.tree_groups[0].reserve(spec.rf.n_estimators);
  std::vector<double> ones(n, 1.0);
  for (int t = 0; t < spec.rf.n_estimators; ++t) {
    SplitMix64 rng(SplitMix64::mix(spec.seed, uint64_t(t) * 7919 + 1));
    std::vector<uint32_t> idx(n);
    if (spec.rf.bootstrap)
      for (size_t i = 0; i < n; ++i)
        idx[i] = uint32_t(rng.uniform_int(0, n - 1));
    else
      for (size_t i = 0; i < n; ++i) idx[i] = uint32_t(i);
    if (spec.task == TaskType::Classification) {
      m.tree_groups[0].push_back(
          build_class_tree(binned, idx, y, int(m.classes.size()), tp, rng));
    } else {
      m.tree_groups[0].push_back(build_grad_tree(binned, idx, yr, ones, tp, rng));
    }
  }
  return m;
}

}  // namespace detail

TrainedModel fit(const Dataset& train, const ModelSpec& spec) {
  ModelSpec sp = spec;
  sp.task = TaskType::Classification;
  return sp.family == ModelFamily::RandomForest ? detail::fit_rf(train, sp, "")
                                                : detail::fit_gbt(train, sp, "");
}

TrainedModel fit_param_regressor(const Dataset& train, const ModelSpec& spec,
                                 const std::string& target) {
  ModelSpec sp = spec;
  sp.task = TaskType::Regression;
  return sp.family == ModelFamily::RandomForest
             ? detail::fit_rf(train, sp, target)
             : detail::fit_gbt(train, sp, target);
}

}  // namespace streamlab
