#include <algorithm>
#include <cmath>

#include "train_internal.hpp"

namespace streamlab {

double Tree::predict(const std::vector<double>& x) const {
  int cur = 0;
  while (nodes[cur].feature_idx >= 0) {
    const TreeNode& nd = nodes[cur];
    cur = x[nd.feature_idx] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[cur].leaf_value;
}

namespace detail {

namespace {

// Node-local feature subset, drawn without replacement.
void sample_features(std::vector<uint32_t>& feats, int k, SplitMix64& rng) {
  int d = int(feats.size());
  if (k >= d) return;
  for (int i = 0; i < k; ++i) {
    size_t j = size_t(rng.uniform_int(uint64_t(i), uint64_t(d - 1)));
    std::swap(feats[i], feats[j]);
  }
}

struct ClassBuilder {
  const BinnedData& data;
  std::vector<uint32_t>& idx;
  const std::vector<uint16_t>& y;
  int n_classes;
  const TreeParams& p;
  SplitMix64& rng;
  Tree tree;
  std::vector<uint32_t> feats;
  std::vector<uint32_t> hist;  // bins * classes scratch

  int build(size_t lo, size_t hi, int depth) {
    size_t n = hi - lo;
    std::vector<uint32_t> counts(n_classes, 0);
    for (size_t i = lo; i < hi; ++i) counts[y[idx[i]]]++;
    int majority = 0;
    for (int c = 1; c < n_classes; ++c)
      if (counts[c] > counts[majority]) majority = c;
    bool pure = counts[majority] == n;

    if (depth >= p.max_depth || n < size_t(p.min_samples_split) || pure)
      return leaf(majority);

    double sq = 0;
    for (int c = 0; c < n_classes; ++c) sq += double(counts[c]) * counts[c];
    double imp_parent = double(n) - sq / double(n);

    int use = p.max_features > 0 ? std::min(p.max_features, int(data.d))
                                 : int(data.d);
    sample_features(feats, use, rng);

    int best_f = -1, best_bin = -1;
    double best_gain = p.min_gain;
    for (int fi = 0; fi < use; ++fi) {
      uint32_t f = feats[fi];
      int bins = data.bins(f);
      if (bins < 2) continue;
      hist.assign(size_t(bins) * n_classes, 0);
      for (size_t i = lo; i < hi; ++i) {
        uint32_t row = idx[i];
        hist[size_t(data.codes[row * data.d + f]) * n_classes + y[row]]++;
      }
      std::vector<uint32_t> left(n_classes, 0);
      size_t nl = 0;
      for (int b = 0; b < bins - 1; ++b) {
        for (int c = 0; c < n_classes; ++c) {
          left[c] += hist[size_t(b) * n_classes + c];
        }
        nl = 0;
        for (int c = 0; c < n_classes; ++c) nl += left[c];
        size_t nr = n - nl;
        if (nl == 0 || nr == 0) continue;
        double sql = 0, sqr = 0;
        for (int c = 0; c < n_classes; ++c) {
          double l = double(left[c]);
          double r = double(counts[c]) - l;
          sql += l * l;
          sqr += r * r;
        }
        double imp = (double(nl) - sql / double(nl)) +
                     (double(nr) - sqr / double(nr));
        double gain = imp_parent - imp;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = int(f);
          best_bin = b;
        }
      }
    }
    if (best_f < 0) return leaf(majority);

    double thr = data.edges[best_f][best_bin];
    auto mid_it = std::stable_partition(
        idx.begin() + lo, idx.begin() + hi, [&](uint32_t row) {
          return data.codes[row * data.d + best_f] <= best_bin;
        });
    size_t mid = size_t(mid_it - idx.begin());
    if (mid == lo || mid == hi) return leaf(majority);

    int me = int(tree.nodes.size());
    tree.nodes.push_back({int32_t(best_f), thr, -1, -1, 0});
    int l = build(lo, mid, depth + 1);
    int r = build(mid, hi, depth + 1);
    tree.nodes[me].left = l;
    tree.nodes[me].right = r;
    return me;
  }

  int leaf(int cls) {
    tree.nodes.push_back({-1, 0, -1, -1, double(cls)});
    return int(tree.nodes.size()) - 1;
  }
};

struct GradBuilder {
  const BinnedData& data;
  std::vector<uint32_t>& idx;
  const std::vector<double>& g;
  const std::vector<double>& h;
  const TreeParams& p;
  SplitMix64& rng;
  Tree tree;
  std::vector<uint32_t> feats;
  std::vector<double> hg, hh;  // per-bin scratch

  double leaf_value(double G, double H) const { return G / (H + p.lambda); }

  int build(size_t lo, size_t hi, int depth) {
    size_t n = hi - lo;
    double G = 0, H = 0;
    for (size_t i = lo; i < hi; ++i) {
      G += g[idx[i]];
      H += h[idx[i]];
    }
    if (depth >= p.max_depth || n < size_t(p.min_samples_split))
      return leaf(G, H);

    double parent_score = G * G / (H + p.lambda);
    int use = p.max_features > 0 ? std::min(p.max_features, int(data.d))
                                 : int(data.d);
    sample_features(feats, use, rng);

    int best_f = -1, best_bin = -1;
    double best_gain = p.min_gain;
    for (int fi = 0; fi < use; ++fi) {
      uint32_t f = feats[fi];
      int bins = data.bins(f);
      if (bins < 2) continue;
      hg.assign(bins, 0);
      hh.assign(bins, 0);
      for (size_t i = lo; i < hi; ++i) {
        uint32_t row = idx[i];
        uint8_t b = data.codes[row * data.d + f];
        hg[b] += g[row];
        hh[b] += h[row];
      }
      double GL = 0, HL = 0;
      for (int b = 0; b < bins - 1; ++b) {
        GL += hg[b];
        HL += hh[b];
        double GR = G - GL, HR = H - HL;
        if (HL <= 0 || HR <= 0) continue;
        double gain = 0.5 * (GL * GL / (HL + p.lambda) +
                             GR * GR / (HR + p.lambda) - parent_score);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = int(f);
          best_bin = b;
        }
      }
    }
    if (best_f < 0) return leaf(G, H);

    double thr = data.edges[best_f][best_bin];
    auto mid_it = std::stable_partition(
        idx.begin() + lo, idx.begin() + hi, [&](uint32_t row) {
          return data.codes[row * data.d + best_f] <= best_bin;
        });
    size_t mid = size_t(mid_it - idx.begin());
    if (mid == lo || mid == hi) return leaf(G, H);

    int me = int(tree.nodes.size());
    tree.nodes.push_back({int32_t(best_f), thr, -1, -1, 0});
    int l = build(lo, mid, depth + 1);
    int r = build(mid, hi, depth + 1);
    tree.nodes[me].left = l;
    tree.nodes[me].right = r;
    return me;
  }

  int leaf(double G, double H) {
    tree.nodes.push_back({-1, 0, -1, -1, leaf_value(G, H)});
    return int(tree.nodes.size()) - 1;
  }
};

}  // namespace

Tree build_class_tree(const BinnedData& data, std::vector<uint32_t>& idx,
                      const std::vector<uint16_t>& y, int n_classes,
                      const TreeParams& p, SplitMix64& rng) {
  ClassBuilder b{data, idx, y, n_classes, p, rng, {}, {}, {}};
  b.feats.resize(data.d);
  for (size_t f = 0; f < data.d; ++f) b.feats[f] = uint32_t(f);
  b.build(0, idx.size(), 0);
  return std::move(b.tree);
}

Tree build_grad_tree(const BinnedData& data, std::vector<uint32_t>& idx,
                     const std::vector<double>& g, const std::vector<double>& h,
                     const TreeParams& p, SplitMix64& rng) {
  GradBuilder b{data, idx, g, h, p, rng, {}, {}, {}, {}};
  b.feats.resize(data.d);
  for (size_t f = 0; f < data.d; ++f) b.feats[f] = uint32_t(f);
  b.build(0, idx.size(), 0);
  return std::move(b.tree);
}

}  // namespace detail
}  // namespace streamlab
