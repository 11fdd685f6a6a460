#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamlab/features.hpp"

namespace streamlab {

enum class ModelFamily { RandomForest, GradientBoostedTrees };
enum class TaskType { Classification, Regression };

const char* family_name(ModelFamily f);
ModelFamily family_from_name(const std::string& name);

struct RfParams {
  int n_estimators = 100;
  int max_depth = 0;  // 0 means no limit
  enum class MaxFeatures { Sqrt, Log2 } max_features = MaxFeatures::Sqrt;
  bool bootstrap = true;
};

struct GbtParams {
  int n_estimators = 100;
  int max_depth = 6;
  double gamma = 0.0;  // minimum split gain
  double learning_rate = 0.3;
};

struct ModelSpec {
  ModelFamily family = ModelFamily::RandomForest;
  TaskType task = TaskType::Classification;
  RfParams rf;
  GbtParams gbt;
  uint64_t seed = 7;

  std::string describe() const;
};

struct TreeNode {
  int32_t feature_idx = -1;  // -1 marks a leaf
  double threshold = 0;
  int32_t left = -1;
  int32_t right = -1;
  double leaf_value = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const std::vector<double>& x) const;
};

// A fitted forest or boosted ensemble. Classification predicts a class index
// into classes; random forests vote (ties resolve to the lowest class
// index), boosted ensembles pick the top softmax score. Regression averages
// (forest) or sums scaled trees onto a base score (boosted).
struct TrainedModel {
  ModelSpec spec;
  size_t feature_dim = 0;
  std::vector<OperatorKind> classes;
  std::string target_name;  // regression target: "w" or "s"
  // Random forest: one group of trees. Boosted classification: one group
  // per class per round, laid out round-major. Boosted regression and every
  // forest: groups.size() == 1.
  std::vector<std::vector<Tree>> tree_groups;
  std::vector<double> base_scores;

  size_t predict_class(const std::vector<double>& x) const;
  OperatorKind predict_label(const std::vector<double>& x) const;
  // Vote share (forest) or softmax probability (boosted) of the predicted
  // class.
  double confidence(const std::vector<double>& x) const;
  double predict_value(const std::vector<double>& x) const;

  void check_input(const std::vector<double>& x) const;
};

// Fits a classifier on row labels. Throws DegenerateData with fewer than two
// classes and InvalidModel for non-finite features or bad hyperparameters.
TrainedModel fit(const Dataset& train, const ModelSpec& spec);

// Fits a window-parameter regressor on rows that carry params. target is
// "w" or "s". Rows without params throw MissingLabel.
TrainedModel fit_param_regressor(const Dataset& train, const ModelSpec& spec,
                                 const std::string& target);

struct Metrics {
  double accuracy = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  std::vector<OperatorKind> classes;
  // confusion[t][p]: rows with true class t predicted as p. Indices follow
  // classes; test labels outside the model's classes get an extra last row.
  std::vector<std::vector<uint64_t>> confusion;
  bool has_unknown_row = false;
};

Metrics evaluate(const TrainedModel& model, const Dataset& test);

struct RegressionMetrics {
  double mse = 0;
  // MSE after min-max normalizing targets over the test set, scaled by 1e5.
  double mse_norm_1e5 = 0;
  double r2 = 0;
  bool degenerate_target = false;  // all test targets equal
};

RegressionMetrics evaluate_regression(const TrainedModel& model,
                                      const Dataset& test,
                                      const std::string& target);

struct ParamGrid {
  std::vector<int> n_estimators;
  std::vector<int> max_depth;
  std::vector<RfParams::MaxFeatures> max_features;  // forest only
  std::vector<bool> bootstrap;                      // forest only
  std::vector<double> gamma;                        // boosted only
};

// Full sweep grids: forest 5x3x2x2, boosted 5x3x3.
ParamGrid default_rf_grid();
ParamGrid default_gbt_grid();

std::vector<ModelSpec> enumerate_grid(ModelFamily family, TaskType task,
                                      const ParamGrid& grid, uint64_t seed);

struct CvCell {
  ModelSpec spec;
  std::vector<double> fold_scores;
  double mean_score = 0;
  std::string error;  // non-empty when this cell failed to train
};

struct GridSearchResult {
  ModelSpec best;
  double best_score = 0;
  std::vector<CvCell> table;
};

// Stratified k-fold cross validation over every grid point. Classification
// scores accuracy; regression scores r2 on the named target. Ties keep the
// earliest grid point, so results are deterministic.
GridSearchResult grid_search(const Dataset& ds, ModelFamily family,
                             const ParamGrid& grid, int folds = 5,
                             uint64_t seed = 7,
                             TaskType task = TaskType::Classification,
                             const std::string& target = "");

// Versioned JSON round trip; a reloaded model predicts identically.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

}  // namespace streamlab
