#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamlab/attack.hpp"
#include "streamlab/generators.hpp"
#include "streamlab/models.hpp"
#include "streamlab/observer.hpp"

namespace streamlab {

// One fully reproducible batch experiment. In simulated mode the config
// determines every output byte; every command embeds the serialized config
// in its manifest so results carry their provenance.
struct ExperimentConfig {
  int version = 1;
  uint64_t seed = 42;
  TraceMode mode = TraceMode::Simulated;
  GeneratorConfig generator;
  CostModel cost_model = CostModel::defaults();
  // Featurizer.
  size_t feature_k = 1024;
  double trim_frac = 0.05;
  // Classifier family and hyperparameter grid (full | reduced | single).
  ModelFamily family = ModelFamily::RandomForest;
  std::string grid = "reduced";
  int folds = 5;
  double train_frac = 0.5;
  std::string setting = "even_split";  // or leave_one_query_out
  // Attack victim.
  std::string query = "q2";
  uint32_t window_size = 16;
  uint32_t slide = 4;
  // Profiling.
  size_t n_events = 2000;
  double plan_scale = 1.0;
  bool flight_plan = false;
  // Mitigation.
  std::string mitigation = "pad";
  uint64_t pad_target = 4000;
  uint32_t batch = 8;
  std::string out_dir = "out";

  void validate() const;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

// The hyperparameter grid a config names, specialized to the model family.
ParamGrid resolve_grid(const ExperimentConfig& cfg);

// The profiling plan a config implies: the auction-market plan, plus the
// flight plan when enabled, both at plan_scale.
std::vector<ProfilePlanEntry> resolve_plan(const ExperimentConfig& cfg);

// Subcommand bodies. Each writes its outputs plus a manifest embedding the
// config under cfg.out_dir and returns the paths written. Commands that
// consume earlier outputs throw MissingInput when those files are absent.
std::vector<std::string> cmd_generate(const ExperimentConfig& cfg);
std::vector<std::string> cmd_profile(const ExperimentConfig& cfg);
std::vector<std::string> cmd_featurize(const ExperimentConfig& cfg);
std::vector<std::string> cmd_train(const ExperimentConfig& cfg);
std::vector<std::string> cmd_attack(const ExperimentConfig& cfg);
std::vector<std::string> cmd_mitigate(const ExperimentConfig& cfg);
std::vector<std::string> cmd_report(const ExperimentConfig& cfg);

// Small file helpers shared by the commands and the command-line tool.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace streamlab
