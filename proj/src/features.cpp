#include "streamlab/features.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

namespace streamlab {

using nlohmann::json;

std::vector<uint64_t> trim_trace(const std::vector<uint64_t>& deltas,
                                 double frac) {
  if (frac < 0 || frac >= 0.5) throw InvalidSpec("trim fraction must be in [0, 0.5)");
  size_t cut = size_t(frac * double(deltas.size()));
  if (deltas.size() <= 2 * cut) throw EmptyAfterTrim();
  return std::vector<uint64_t>(deltas.begin() + cut, deltas.end() - cut);
}

std::vector<double> cdf_features(const std::vector<uint64_t>& deltas,
                                 size_t k) {
  if (k < 2) throw InvalidSpec("cdf feature count must be >= 2");
  if (deltas.empty()) throw EmptyAfterTrim();
  std::vector<uint64_t> sorted = deltas;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(k);
  size_t n = sorted.size();
  for (size_t j = 0; j < k; ++j)
    out.push_back(double(sorted[j * (n - 1) / (k - 1)]));
  return out;
}

std::vector<OperatorKind> Dataset::classes() const {
  std::set<OperatorKind> seen;
  for (const auto& r : rows)
    if (r.label) seen.insert(*r.label);
  return std::vector<OperatorKind>(seen.begin(), seen.end());
}

FeatureRow featurize_trace(const TimingTrace& trace, size_t k,
                           double trim_frac) {
  FeatureRow row;
  row.values = cdf_features(trim_trace(trace.deltas, trim_frac), k);
  row.label = trace.label;
  row.params = trace.params;
  row.query = trace.query;
  row.stage = trace.stage;
  row.mode = trace.mode;
  row.seed = trace.seed;
  return row;
}

Dataset build_dataset(const std::vector<TimingTrace>& traces, size_t k,
                      double trim_frac) {
  Dataset ds;
  ds.k = k;
  ds.trim_frac = trim_frac;
  ds.rows.reserve(traces.size());
  for (size_t i = 0; i < traces.size(); ++i) {
    if (!traces[i].label)
      throw MissingLabel("trace " + std::to_string(i) + " has no label");
    ds.rows.push_back(featurize_trace(traces[i], k, trim_frac));
  }
  return ds;
}

SplitResult split_even(const Dataset& ds, double train_frac, uint64_t seed) {
  if (!(train_frac > 0 && train_frac < 1))
    throw InvalidSpec("train fraction must sit inside (0, 1)");
  std::map<OperatorKind, std::vector<size_t>> by_class;
  for (size_t i = 0; i < ds.rows.size(); ++i) {
    if (!ds.rows[i].label) throw MissingLabel("unlabeled row in split");
    by_class[*ds.rows[i].label].push_back(i);
  }
  SplitResult out;
  out.train.k = out.test.k = ds.k;
  out.train.trim_frac = out.test.trim_frac = ds.trim_frac;
  SplitMix64 rng(SplitMix64::mix(seed, 11));
  for (auto& [label, idx] : by_class) {
    if (idx.size() < 2)
      throw ClassTooSmall(std::string(kind_name(label)) +
                          " has fewer than 2 rows");
    shuffle(idx, rng);
    size_t n_train = size_t(train_frac * double(idx.size()) + 0.5);
    if (n_train == 0) n_train = 1;
    if (n_train == idx.size()) n_train = idx.size() - 1;
    for (size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? out.train : out.test).rows.push_back(ds.rows[idx[i]]);
  }
  return out;
}

HoldoutResult leave_one_query_out(const Dataset& ds, const std::string& query) {
  HoldoutResult out;
  out.train.k = out.test.k = ds.k;
  out.train.trim_frac = out.test.trim_frac = ds.trim_frac;
  for (const auto& r : ds.rows)
    (r.query == query ? out.test : out.train).rows.push_back(r);
  if (out.test.rows.empty()) throw UnknownQuery(query);
  std::set<OperatorKind> trained;
  for (const auto& r : out.train.rows)
    if (r.label) trained.insert(*r.label);
  std::set<OperatorKind> missing;
  for (const auto& r : out.test.rows)
    if (r.label && !trained.count(*r.label)) missing.insert(*r.label);
  out.untrained_labels.assign(missing.begin(), missing.end());
  return out;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << "label,query_id,w,s";
  for (size_t j = 0; j < ds.k; ++j) f << ",f" << j;
  f << "\n";
  char buf[32];
  for (const auto& r : ds.rows) {
    if (r.values.size() != ds.k)
      throw DimensionMismatch("row width does not match dataset k");
    f << (r.label ? kind_name(*r.label) : "") << "," << r.query << ","
      << (r.params ? r.params->w : 0) << "," << (r.params ? r.params->s : 0);
    for (double v : r.values) {
      snprintf(buf, sizeof buf, "%.17g", v);
      f << "," << buf;
    }
    f << "\n";
  }
  f.close();

  json meta;
  meta["featurizer"] = "cdf";
  meta["k"] = ds.k;
  meta["trim_frac"] = ds.trim_frac;
  meta["prng"] = kPrngName;
  json rows = json::array();
  for (const auto& r : ds.rows)
    rows.push_back({{"stage", r.stage},
                    {"mode", mode_name(r.mode)},
                    {"seed", r.seed}});
  meta["rows"] = rows;
  std::ofstream mf(path + ".meta.json");
  if (!mf) throw Error("cannot write " + path + ".meta.json");
  mf << meta.dump(2) << "\n";
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw MalformedPayload("empty csv");
  auto split_cells = [](const std::string& text) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      size_t pos = text.find(',', start);
      if (pos == std::string::npos) {
        cells.push_back(text.substr(start));
        break;
      }
      cells.push_back(text.substr(start, pos - start));
      start = pos + 1;
    }
    return cells;
  };
  std::vector<std::string> header = split_cells(line);
  if (header.size() < 5 || header[0] != "label" || header[1] != "query_id" ||
      header[2] != "w" || header[3] != "s")
    throw MalformedPayload("unexpected csv header");
  Dataset ds;
  ds.k = header.size() - 4;

  json meta;
  {
    std::ifstream mf(path + ".meta.json");
    if (mf) {
      try {
        mf >> meta;
        ds.trim_frac = meta.value("trim_frac", 0.05);
      } catch (const json::exception&) {
        meta = json();
      }
    }
  }

  size_t row_idx = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = split_cells(line);
    if (cells.size() != header.size())
      throw MalformedPayload("csv row width mismatch at row " +
                             std::to_string(row_idx));
    FeatureRow row;
    if (!cells[0].empty()) row.label = kind_from_name(cells[0]);
    row.query = cells[1];
    uint32_t w = uint32_t(strtoul(cells[2].c_str(), nullptr, 10));
    uint32_t s = uint32_t(strtoul(cells[3].c_str(), nullptr, 10));
    if (w > 0) row.params = WindowParams{w, s};
    row.values.reserve(ds.k);
    for (size_t i = 4; i < cells.size(); ++i)
      row.values.push_back(strtod(cells[i].c_str(), nullptr));
    if (meta.contains("rows") && row_idx < meta["rows"].size()) {
      const auto& rm = meta["rows"][row_idx];
      row.stage = rm.value("stage", "");
      row.mode = mode_from_name(rm.value("mode", "simulated"));
      row.seed = rm.value("seed", uint64_t(0));
    }
    ds.rows.push_back(std::move(row));
    ++row_idx;
  }
  return ds;
}

}  // namespace streamlab
