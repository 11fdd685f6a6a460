#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "streamlab/observer.hpp"

namespace streamlab {

// Drops floor(frac * n) deltas from each end of a trace, cutting warmup and
// teardown artifacts. Throws EmptyAfterTrim when nothing survives.
std::vector<uint64_t> trim_trace(const std::vector<uint64_t>& deltas,
                                 double frac = 0.05);

// k-point sample of the empirical distribution: sorts the deltas and reads
// index floor(j * (n - 1) / (k - 1)) for j in [0, k). Captures the shape of
// the processing-time distribution independent of trace length.
std::vector<double> cdf_features(const std::vector<uint64_t>& deltas,
                                 size_t k = 1024);

struct FeatureRow {
  std::vector<double> values;
  std::optional<OperatorKind> label;
  std::optional<WindowParams> params;
  std::string query;
  std::string stage;
  TraceMode mode = TraceMode::Simulated;
  uint64_t seed = 0;
};

struct Dataset {
  size_t k = 0;
  double trim_frac = 0.05;
  std::vector<FeatureRow> rows;
  // Sorted distinct labels present.
  std::vector<OperatorKind> classes() const;
};

// Featurizes labeled traces into a training table. Throws MissingLabel when
// a trace lacks its label.
Dataset build_dataset(const std::vector<TimingTrace>& traces, size_t k = 1024,
                      double trim_frac = 0.05);
FeatureRow featurize_trace(const TimingTrace& trace, size_t k = 1024,
                           double trim_frac = 0.05);

struct SplitResult {
  Dataset train;
  Dataset test;
};

// Stratified split: every class lands train_frac into train within one row.
// Throws ClassTooSmall when a class has fewer than two rows.
SplitResult split_even(const Dataset& ds, double train_frac, uint64_t seed);

struct HoldoutResult {
  Dataset train;
  Dataset test;
  // Labels in the held-out query absent from every other query. Stages with
  // these labels cannot be scored in the held-out setting.
  std::vector<OperatorKind> untrained_labels;
};

// Query-transfer split: every row of the named query becomes test, the rest
// train. Throws UnknownQuery when no row carries the query.
HoldoutResult leave_one_query_out(const Dataset& ds, const std::string& query);

// Feature table CSV: header label,query_id,w,s,f0..f{k-1}, one row per
// trace. A sidecar JSON (path + ".meta.json") records featurizer parameters
// and per-row provenance (stage, mode, seed).
void write_dataset_csv(const Dataset& ds, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

}  // namespace streamlab
