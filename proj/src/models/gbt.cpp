#include <algorithm>
#include <cmath>

#include "train_internal.hpp"

namespace streamlab {
namespace detail {

std::vector<double> gbt_scores(const TrainedModel& m,
                               const std::vector<double>& x);
void softmax(std::vector<double>& v);

TrainedModel fit_gbt(const Dataset& train, const ModelSpec& spec,
                     const std::string& target) {
  check_features(train);
  const GbtParams& gp = spec.gbt;
  if (gp.n_estimators < 1) throw InvalidModel("n_estimators must be >= 1");
  if (gp.max_depth < 1) throw InvalidModel("max_depth must be >= 1");
  if (!(gp.learning_rate > 0)) throw InvalidModel("learning_rate must be > 0");
  if (gp.gamma < 0) throw InvalidModel("gamma must be >= 0");

  TrainedModel m;
  m.spec = spec;
  m.feature_dim = train.k;

  std::vector<const std::vector<double>*> rows;
  rows.reserve(train.rows.size());
  for (const auto& r : train.rows) rows.push_back(&r.values);
  BinnedData binned = bin_rows(rows, train.k);

  TreeParams tp;
  tp.max_depth = gp.max_depth;
  tp.max_features = 0;  // boosted trees scan every feature
  tp.min_gain = gp.gamma;
  tp.lambda = 1.0;

  size_t n = train.rows.size();
  if (spec.task == TaskType::Classification) {
    m.classes = train.classes();
    size_t K = m.classes.size();
    if (K < 2) throw DegenerateData("need at least 2 classes to classify");
    std::vector<uint16_t> y = labels_for(train, m.classes);
    m.base_scores.assign(K, 0.0);
    m.tree_groups.resize(K);
    std::vector<std::vector<double>> F(n, std::vector<double>(K, 0.0));
    std::vector<double> g(n), h(n), p;
    for (int round = 0; round < gp.n_estimators; ++round) {
      for (size_t k = 0; k < K; ++k) {
        for (size_t i = 0; i < n; ++i) {
          p = F[i];
          softmax(p);
          double pik = p[k];
          g[i] = (y[i] == k ? 1.0 : 0.0) - pik;
          h[i] = std::max(pik * (1.0 - pik), 1e-6);
        }
        SplitMix64 rng(SplitMix64::mix(
            spec.seed, uint64_t(round) * 131071 + uint64_t(k) * 31 + 3));
        std::vector<uint32_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = uint32_t(i);
        Tree t = build_grad_tree(binned, idx, g, h, tp, rng);
        for (size_t i = 0; i < n; ++i)
          F[i][k] += gp.learning_rate * t.predict(train.rows[i].values);
        m.tree_groups[k].push_back(std::move(t));
      }
    }
  } else {
    std::vector<double> yr = targets_for(train, target);
    m.target_name = target;
    double mean = 0;
    for (double v : yr) mean += v;
    mean /= double(n);
    m.base_scores = {mean};
    m.tree_groups.resize(1);
    std::vector<double> F(n, mean), g(n), ones(n, 1.0);
    for (int round = 0; round < gp.n_estimators; ++round) {
      for (size_t i = 0; i < n; ++i) g[i] = yr[i] - F[i];
      SplitMix64 rng(SplitMix64::mix(spec.seed, uint64_t(round) * 524287 + 5));
      std::vector<uint32_t> idx(n);
      for (size_t i = 0; i < n; ++i) idx[i] = uint32_t(i);
      Tree t = build_grad_tree(binned, idx, g, ones, tp, rng);
      for (size_t i = 0; i < n; ++i)
        F[i] += gp.learning_rate * t.predict(train.rows[i].values);
      m.tree_groups[0].push_back(std::move(t));
    }
  }
  return m;
}

}  // namespace detail
}  // namespace streamlab
