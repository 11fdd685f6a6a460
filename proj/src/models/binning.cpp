#include <algorithm>
#include <cmath>

#include "train_internal.hpp"

namespace streamlab {
namespace detail {

uint8_t BinnedData::code_of(size_t f, double v) const {
  const auto& e = edges[f];
  return uint8_t(std::lower_bound(e.begin(), e.end(), v) - e.begin());
}

BinnedData bin_rows(const std::vector<const std::vector<double>*>& rows,
                    size_t d, int max_bins) {
  if (max_bins < 2 || max_bins > 256)
    throw InvalidModel("max_bins must be in [2, 256]");
  BinnedData out;
  out.n = rows.size();
  out.d = d;
  out.edges.resize(d);
  out.codes.resize(out.n * d);

  std::vector<double> col(out.n);
  for (size_t f = 0; f < d; ++f) {
    for (size_t i = 0; i < out.n; ++i) col[i] = (*rows[i])[f];
    std::sort(col.begin(), col.end());
    auto& e = out.edges[f];
    // Quantile cut points, deduplicated. Values equal to an edge go left of
    // it, matching the x <= threshold split rule.
    for (int b = 1; b < max_bins; ++b) {
      double cand = col[size_t(b) * (out.n - 1) / size_t(max_bins)];
      if (e.empty() || cand > e.back()) e.push_back(cand);
    }
    if (!e.empty() && e.back() >= col.back()) e.pop_back();
    for (size_t i = 0; i < out.n; ++i)
      out.codes[i * d + f] = out.code_of(f, (*rows[i])[f]);
  }
  return out;
}

int resolve_max_features(RfParams::MaxFeatures mf, size_t d) {
  int k = mf == RfParams::MaxFeatures::Sqrt
              ? int(std::sqrt(double(d)))
              : int(std::log2(double(d)));
  if (k < 1) k = 1;
  if (size_t(k) > d) k = int(d);
  return k;
}

void check_features(const Dataset& ds) {
  if (ds.rows.empty()) throw DegenerateData("empty dataset");
  for (const auto& r : ds.rows) {
    if (r.values.size() != ds.k)
      throw DimensionMismatch("row width does not match dataset k");
    for (double v : r.values)
      if (!std::isfinite(v)) throw InvalidModel("non-finite feature value");
  }
}

std::vector<uint16_t> labels_for(const Dataset& ds,
                                 const std::vector<OperatorKind>& classes) {
  std::vector<uint16_t> y;
  y.reserve(ds.rows.size());
  for (const auto& r : ds.rows) {
    if (!r.label) throw MissingLabel("unlabeled row");
    auto it = std::find(classes.begin(), classes.end(), *r.label);
    if (it == classes.end()) throw MissingLabel("label outside class list");
    y.push_back(uint16_t(it - classes.begin()));
  }
  return y;
}

std::vector<double> targets_for(const Dataset& ds, const std::string& target) {
  if (target != "w" && target != "s")
    throw InvalidSpec("regression target must be w or s");
  std::vector<double> y;
  y.reserve(ds.rows.size());
  for (const auto& r : ds.rows) {
    if (!r.params)
      throw MissingLabel("row has no window parameters for regression");
    y.push_back(double(target == "w" ? r.params->w : r.params->s));
  }
  return y;
}

}  // namespace detail
}  // namespace streamlab
