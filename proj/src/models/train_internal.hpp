#pragma once

#include "streamlab/models.hpp"

namespace streamlab {
namespace detail {

// Histogram-binned feature matrix. Trees split on bin boundaries, which
// keeps node scans linear in samples regardless of value spread.
struct BinnedData {
  size_t n = 0, d = 0;
  std::vector<uint8_t> codes;              // row major, codes[i * d + f]
  std::vector<std::vector<double>> edges;  // ascending per feature

  uint8_t code_of(size_t f, double v) const;
  int bins(size_t f) const { return int(edges[f].size()) + 1; }
};

BinnedData bin_rows(const std::vector<const std::vector<double>*>& rows,
                    size_t d, int max_bins = 64);

struct TreeParams {
  int max_depth = 64;
  int max_features = 0;  // features sampled per node, 0 = all
  double min_gain = 1e-12;
  double lambda = 0.0;
  int min_samples_split = 2;
};

// Gini-impurity classification tree over idx[lo, hi). Leaf value is the
// majority class index; ties go to the lowest index.
Tree build_class_tree(const BinnedData& data, std::vector<uint32_t>& idx,
                      const std::vector<uint16_t>& y, int n_classes,
                      const TreeParams& p, SplitMix64& rng);

// Gradient tree: leaf = sum(g) / (sum(h) + lambda). Plain regression passes
// g = target, h = 1, lambda = 0 so leaves are means and splits maximize
// variance reduction.
Tree build_grad_tree(const BinnedData& data, std::vector<uint32_t>& idx,
                     const std::vector<double>& g, const std::vector<double>& h,
                     const TreeParams& p, SplitMix64& rng);

int resolve_max_features(RfParams::MaxFeatures mf, size_t d);

TrainedModel fit_rf(const Dataset& train, const ModelSpec& spec,
                    const std::string& target);
TrainedModel fit_gbt(const Dataset& train, const ModelSpec& spec,
                     const std::string& target);

void check_features(const Dataset& ds);
std::vector<uint16_t> labels_for(const Dataset& ds,
                                 const std::vector<OperatorKind>& classes);
std::vector<double> targets_for(const Dataset& ds, const std::string& target);

}  // namespace detail
}  // namespace streamlab
