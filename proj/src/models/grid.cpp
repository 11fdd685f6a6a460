#include <algorithm>
#include <map>

#include "train_internal.hpp"

namespace streamlab {

ParamGrid default_rf_grid() {
  ParamGrid g;
  g.n_estimators = {100, 150, 200, 250, 300};
  g.max_depth = {0, 10, 20};
  g.max_features = {RfParams::MaxFeatures::Sqrt, RfParams::MaxFeatures::Log2};
  g.bootstrap = {true, false};
  return g;
}

ParamGrid default_gbt_grid() {
  ParamGrid g;
  g.n_estimators = {100, 150, 200, 250, 300};
  g.max_depth = {3, 6, 10};
  g.gamma = {0, 1, 5};
  return g;
}

std::vector<ModelSpec> enumerate_grid(ModelFamily family, TaskType task,
                                      const ParamGrid& grid, uint64_t seed) {
  if (grid.n_estimators.empty() || grid.max_depth.empty())
    throw InvalidSpec("grid needs n_estimators and max_depth values");
  std::vector<ModelSpec> out;
  if (family == ModelFamily::RandomForest) {
    auto feats = grid.max_features.empty()
                     ? std::vector<RfParams::MaxFeatures>{
                           RfParams::MaxFeatures::Sqrt}
                     : grid.max_features;
    auto boots = grid.bootstrap.empty() ? std::vector<bool>{true}
                                        : grid.bootstrap;
    for (int n : grid.n_estimators)
      for (int d : grid.max_depth)
        for (auto mf : feats)
          for (bool b : boots) {
            ModelSpec s;
            s.family = family;
            s.task = task;
            s.seed = seed;
            s.rf = {n, d, mf, b};
            out.push_back(s);
          }
  } else {
    auto gammas = grid.gamma.empty() ? std::vector<double>{0.0} : grid.gamma;
    for (int n : grid.n_estimators)
      for (int d : grid.max_depth)
        for (double gm : gammas) {
          ModelSpec s;
          s.family = family;
          s.task = task;
          s.seed = seed;
          s.gbt.n_estimators = n;
          s.gbt.max_depth = d;
          s.gbt.gamma = gm;
          out.push_back(s);
        }
  }
  return out;
}

namespace {

// Stratified fold ids: per class, shuffle then deal round robin.
std::vector<int> fold_assignment(const Dataset& ds, int folds, uint64_t seed,
                                 TaskType task) {
  std::vector<int> fold(ds.rows.size(), 0);
  if (task == TaskType::Classification) {
    std::map<OperatorKind, std::vector<size_t>> by_class;
    for (size_t i = 0; i < ds.rows.size(); ++i) {
      if (!ds.rows[i].label) throw MissingLabel("unlabeled row");
      by_class[*ds.rows[i].label].push_back(i);
    }
    SplitMix64 rng(SplitMix64::mix(seed, 13));
    for (auto& [label, idx] : by_class) {
      if (idx.size() < size_t(folds))
        throw ClassTooSmall(std::string(kind_name(label)) + " has " +
                            std::to_string(idx.size()) + " rows for " +
                            std::to_string(folds) + " folds");
      shuffle(idx, rng);
      for (size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = int(i % folds);
    }
  } else {
    std::vector<size_t> idx(ds.rows.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    SplitMix64 rng(SplitMix64::mix(seed, 13));
    shuffle(idx, rng);
    for (size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = int(i % folds);
  }
  return fold;
}

Dataset subset(const Dataset& ds, const std::vector<int>& fold, int f,
               bool take) {
  Dataset out;
  out.k = ds.k;
  out.trim_frac = ds.trim_frac;
  for (size_t i = 0; i < ds.rows.size(); ++i)
    if ((fold[i] == f) == take) out.rows.push_back(ds.rows[i]);
  return out;
}

}  // namespace

GridSearchResult grid_search(const Dataset& ds, ModelFamily family,
                             const ParamGrid& grid, int folds, uint64_t seed,
                             TaskType task, const std::string& target) {
  if (folds < 2) throw InvalidSpec("need at least 2 folds");
  detail::check_features(ds);
  std::vector<ModelSpec> specs = enumerate_grid(family, task, grid, seed);
  std::vector<int> fold = fold_assignment(ds, folds, seed, task);

  GridSearchResult res;
  res.table.resize(specs.size());
  for (size_t c = 0; c < specs.size(); ++c) res.table[c].spec = specs[c];

  for (int f = 0; f < folds; ++f) {
    Dataset train = subset(ds, fold, f, false);
    Dataset test = subset(ds, fold, f, true);
    for (size_t c = 0; c < specs.size(); ++c) {
      CvCell& cell = res.table[c];
      if (!cell.error.empty()) continue;
      try {
        double score;
        if (task == TaskType::Classification) {
          TrainedModel m = fit(train, specs[c]);
          score = evaluate(m, test).accuracy;
        } else {
          TrainedModel m = fit_param_regressor(train, specs[c], target);
          score = evaluate_regression(m, test, target).r2;
        }
        cell.fold_scores.push_back(score);
      } catch (const Error& e) {
        cell.error = e.what();
        cell.fold_scores.clear();
      }
    }
  }

  bool found = false;
  for (auto& cell : res.table) {
    if (!cell.error.empty()) continue;
    double sum = 0;
    for (double s : cell.fold_scores) sum += s;
    cell.mean_score = sum / double(cell.fold_scores.size());
    if (!found || cell.mean_score > res.best_score) {
      res.best = cell.spec;
      res.best_score = cell.mean_score;
      found = true;
    }
  }
  if (!found) throw Error("every grid cell failed to train");
  return res;
}

}  // namespace streamlab
