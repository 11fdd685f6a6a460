#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamlab/features.hpp"
#include "streamlab/generators.hpp"
#include "streamlab/models.hpp"
#include "streamlab/observer.hpp"
#include "streamlab/pipeline.hpp"

namespace streamlab {

// One profiling assignment: collect reps traces of op, tagged with the query
// and stage they stand in for. Windowed ops cycle their parameters over the
// profiling grids.
struct ProfilePlanEntry {
  OperatorSpec op;
  std::string query;
  std::string stage;
  size_t reps = 0;
};

// Auction-market profiling plan covering six operator classes across the
// catalog queries, 6716 traces total at scale 1: Map 1262, Filter 1297, Join
// 1009, Max 1059, Average 1018, AveragePartition 1071. Scaling multiplies
// every rep count (minimum 1 each).
std::vector<ProfilePlanEntry> default_market_plan(double scale = 1.0);

// Flight-record plan: 350 traces each for the map, filter and reduce stages.
std::vector<ProfilePlanEntry> default_flight_plan(double scale = 1.0);

struct OfflineOptions {
  ProfileOptions profile;
  size_t k = 1024;
  double trim_frac = 0.05;
  ModelFamily family = ModelFamily::RandomForest;
  // Classifier hyperparameter grid; cross-validated with folds folds.
  ParamGrid grid;
  int folds = 5;
  uint64_t train_seed = 7;
  // Window-parameter regressor configuration, fitted per windowed kind.
  ModelSpec regressor;

  OfflineOptions();
};

// Everything the offline phase hands to the online phase: the labeled
// training table, the cross-validation record, the operator classifier and
// one window-size plus one slide regressor per windowed kind.
struct OfflineArtifacts {
  Dataset dataset;
  GridSearchResult search;
  TrainedModel classifier;
  std::map<OperatorKind, TrainedModel> w_regressors;
  std::map<OperatorKind, TrainedModel> s_regressors;
};

// Profiles every plan entry, featurizes the traces, grid-searches the
// classifier over the full dataset and fits per-kind parameter regressors.
// Throws DegenerateData when the plan covers fewer than two operator kinds.
OfflineArtifacts offline_phase(const std::vector<ProfilePlanEntry>& plan,
                               const OfflineOptions& opts);

struct RegressorBundle {
  std::map<OperatorKind, TrainedModel> w;
  std::map<OperatorKind, TrainedModel> s;
};

// One window-size and one slide regressor per windowed kind in the dataset,
// each fitted on that kind's rows with a seed derived from base.seed.
RegressorBundle fit_kind_regressors(const Dataset& ds, const ModelSpec& base);

// Model files plus a manifest under dir; a reload predicts identically. The
// reloaded artifacts carry an empty dataset and cross-validation table.
void save_artifacts(const OfflineArtifacts& artifacts, const std::string& dir);
OfflineArtifacts load_artifacts(const std::string& dir);

struct StagePrediction {
  std::string stage_id;
  OperatorKind predicted = OperatorKind::Map;
  // Classifier vote share for the predicted kind.
  double confidence = 0;
  // Present when the predicted kind is windowed and a regressor exists.
  std::optional<WindowParams> window;
  // Poll-loop misses while observing this stage (measured mode only).
  uint64_t missed = 0;
  size_t trace_len = 0;
};

// The attacker's reconstruction: the victim's DAG shape (known to the
// observer) with each stage's operator kind and window parameters replaced
// by predictions. Stage order and count always match the victim.
struct RecoveredQuery {
  std::vector<StagePrediction> stages;
  PipelineSpec dag;
};

struct OnlineOptions {
  TraceMode mode = TraceMode::Simulated;
  // Per-stage trace length in simulated mode.
  size_t n_events = 2000;
  uint64_t seed = 42;
  CostModel model = CostModel::defaults();
  size_t k = 1024;
  double trim_frac = 0.05;
  // Pick the parameter regressor from the true stage kind instead of the
  // predicted one (the idealized known-operator regression setting).
  bool known_kind_regression = false;
  // Measured mode: cycle scale and per-stage buffer capacity. A tiny
  // capacity forces one observable consumer step per record.
  double cycles_per_ns = 1.0;
  size_t buffer_capacity = 2;
};

// Observes each victim stage boundary, classifies the stage's timing trace
// and regresses window parameters for windowed predictions. Simulated mode
// draws each stage's trace from the cost model; measured mode runs the
// pipeline on real threads and polls consumer counters.
RecoveredQuery online_phase(const PipelineSpec& victim,
                            const InputStreams& inputs,
                            const OfflineArtifacts& artifacts,
                            const OnlineOptions& opts);

// Query recovery success rate: the product of per-operator accuracies. An
// empty list yields 1.0, the neutral element. Accuracies outside [0, 1] are
// rejected.
double qrsr(const std::vector<double>& accuracies);

// One scored stage of one query: how often its test traces were classified
// correctly.
struct OperatorScore {
  std::string query;
  std::string stage;
  OperatorKind label = OperatorKind::Map;
  uint64_t n_test = 0;
  uint64_t n_correct = 0;
  double accuracy = 0;
};

struct QrsrReport {
  std::string setting;   // even_split | leave_one_query_out
  std::string model_id;  // classifier description
  std::string query;
  std::vector<OperatorScore> operators;
  double qrsr = 1.0;
  // Stages that could not be scored, with reasons (labels absent from the
  // training split).
  std::vector<std::string> exclusions;
};

std::string qrsr_report_to_json(const QrsrReport& r);
// Per-operator rows mirroring the evaluation tables: query, operator label,
// stage, sample count, correctly predicted, percentage, query QRSR.
std::string qrsr_table_csv(const std::vector<QrsrReport>& reports);

struct Setting1Result {
  GridSearchResult search;
  TrainedModel classifier;
  // Overall test metrics across every query.
  Metrics overall;
  std::vector<QrsrReport> reports;
};

// Even stratified split: grid-search on the training half, refit, then score
// every (query, stage) group of the test half. Requires at least two
// distinct queries.
Setting1Result evaluate_setting1(const Dataset& ds, ModelFamily family,
                                 const ParamGrid& grid, uint64_t seed,
                                 double train_frac = 0.5, int folds = 5);

struct Setting2Result {
  std::vector<QrsrReport> reports;
  // Queries skipped entirely, with reasons (every stage label untrained).
  std::vector<std::string> excluded_queries;
};

// Leave-one-query-out: hold out each query in turn, train on the rest and
// score the held-out stages. Labels unique to the held-out query cannot be
// predicted by construction; those stages are excluded with a reason record,
// and a query loses its report only when every stage is excluded.
Setting2Result evaluate_setting2(const Dataset& ds, ModelFamily family,
                                 const ParamGrid& grid, uint64_t seed,
                                 int folds = 5);

enum class MitigationKind { Pad, Fuse, Batch };

const char* mitigation_name(MitigationKind m);
MitigationKind mitigation_from_name(const std::string& name);

struct MitigationParams {
  // Pad: per-record cycle budget applied to every stage.
  uint64_t pad_target = 0;
  // Fuse: the stage chain to collapse; empty fuses the victim's full chain
  // when it is linear.
  std::vector<std::string> fuse_chain;
  // Batch: group size applied to every batchable stage.
  uint32_t batch = 1;
};

struct MitigationReport {
  MitigationKind kind = MitigationKind::Pad;
  std::string params_desc;
  size_t stages_before = 0;
  size_t stages_after = 0;
  // Fraction of per-stage kind predictions that match the true kind, across
  // reps online runs. Fused stages count as unrecoverable.
  double accuracy_before = 0;
  double accuracy_after = 0;
  double qrsr_before = 1;
  double qrsr_after = 1;
  // Largest per-stage coefficient of variation of trace deltas.
  double max_cv_before = 0;
  double max_cv_after = 0;
  // Sink outputs compared between the plain and mitigated pipelines on the
  // given inputs (skipped when inputs are empty).
  bool outputs_checked = false;
  bool outputs_match = false;
  std::vector<std::string> notes;
};

std::string mitigation_report_to_json(const MitigationReport& r);

// Applies one mitigation to the victim, reruns the online phase on both
// variants and reports the recovery-rate and dispersion changes. The
// artifacts must come from an unmitigated offline phase.
MitigationReport evaluate_mitigation(const PipelineSpec& victim,
                                     MitigationKind kind,
                                     const MitigationParams& params,
                                     const OfflineArtifacts& artifacts,
                                     const InputStreams& inputs,
                                     const OnlineOptions& opts,
                                     size_t reps = 8);

// Applies a mitigation to every applicable stage of a pipeline.
PipelineSpec apply_mitigation(const PipelineSpec& victim, MitigationKind kind,
                              const MitigationParams& params);

}  // namespace streamlab
