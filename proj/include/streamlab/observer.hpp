#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "streamlab/operator_spec.hpp"
#include "streamlab/pipeline.hpp"
#include "streamlab/timing.hpp"

namespace streamlab {

struct WindowParams {
  uint32_t w = 0;
  uint32_t s = 0;
};

enum class TraceMode { Simulated, Measured };

const char* mode_name(TraceMode m);
TraceMode mode_from_name(const std::string& name);

// One stage's inter-record processing deltas plus labeling for training.
struct TimingTrace {
  std::optional<OperatorKind> label;
  std::optional<WindowParams> params;
  TraceMode mode = TraceMode::Simulated;
  std::string query;
  std::string stage;
  uint64_t seed = 0;
  std::vector<uint64_t> deltas;
};

// Poll samples of a consumer counter: (time, records consumed so far).
using TailSample = std::pair<uint64_t, uint64_t>;

struct ObserveResult {
  TimingTrace trace;
  // Counter steps the poll loop skipped over (tail advanced by more than one
  // between two looks). Reported, not fatal.
  uint64_t missed = 0;
};

// Reduces poll samples to a trace. samples[0] is the baseline observation;
// every later sample whose counter moved contributes one consumption
// timestamp, and the deltas are first differences of those timestamps. A
// counter jump of k > 1 contributes one delta and k - 1 missed steps.
ObserveResult reduce_tail_samples(const std::vector<TailSample>& samples);

// Polls the consumer counters of one stage's input buffers while a live run
// executes. start() spawns the polling thread; stop_and_collect() joins it
// once the run finishes and returns the reduced trace.
class StageObserver {
 public:
  StageObserver(const PipelineRun& run, const std::string& stage_id,
                const CycleCounter& counter);
  ~StageObserver();

  void start();
  ObserveResult stop_and_collect();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Per-kind synthetic cost parameters, in cycles. Stateless kinds draw from a
// base distribution; filter mixes a cheap drop mode and a dearer pass mode;
// windowed kinds pay a light per-record cost except every slide-th record
// once the first window fills, where the emission adds heavy_base +
// heavy_per_row * window_size. Per-trace expression variation scales
// locations by a factor drawn once per trace.
struct KindCost {
  double loc = 0;
  double scale = 0;
};

struct FilterCost {
  double drop_loc = 0;
  double pass_loc = 0;
  double scale = 0;
  double selectivity_lo = 0.2;
  double selectivity_hi = 0.8;
};

struct WindowCost {
  double light_loc = 0;
  double light_scale = 0;
  double heavy_base = 0;
  double heavy_per_row = 0;
};

struct CostModel {
  KindCost map;
  FilterCost filter;
  std::map<OperatorKind, WindowCost> window;
  double jitter = 0;
  double expr_spread = 0;

  static CostModel defaults();
  void validate() const;
};

std::string cost_model_to_json(const CostModel& m);
CostModel cost_model_from_json(const std::string& text);

// Draws the per-record cost sequence one stage would exhibit on n records.
// Deterministic in (spec, model, n, seed). All costs come out >= 1.
TimingTrace synth_trace(const OperatorSpec& spec, const CostModel& model,
                        size_t n, uint64_t seed);

// Stage-level variant: applies the stage's mitigation knobs on top of the
// operator costs. Padding clamps each delta up to the target; batching sums
// costs in groups of batch, one delta per group.
TimingTrace synth_stage_trace(const StageSpec& stage, const CostModel& model,
                              size_t n, uint64_t seed);

struct ProfileOptions {
  TraceMode mode = TraceMode::Simulated;
  size_t n_events = 2000;
  std::vector<uint32_t> w_grid = {8, 16, 32, 64};
  std::vector<uint32_t> s_grid = {2, 4, 8};
  uint64_t seed = 42;
  CostModel model = CostModel::defaults();
  std::string query;
  std::string stage;
  // Measured mode drives a single-stage pipeline over synthetic records.
  double cycles_per_ns = 1.0;
};

// Collects reps labeled traces for one operator kind, cycling window
// parameters over the configured grids for windowed kinds. The callback
// variant hands traces out one at a time so callers can stream them to disk.
std::vector<TimingTrace> profile_operator(const OperatorSpec& spec,
                                          const ProfileOptions& opts,
                                          size_t reps);
void profile_operator(const OperatorSpec& spec, const ProfileOptions& opts,
                      size_t reps,
                      const std::function<void(TimingTrace&&)>& emit);

std::string trace_to_jsonl(const TimingTrace& t);
TimingTrace trace_from_jsonl(const std::string& line);

}  // namespace streamlab
