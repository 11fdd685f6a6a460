#include "oracles.hpp"

#include <algorithm>
#include <map>

namespace oracle {

using streamlab::EventRecord;
using streamlab::OperatorKind;
using streamlab::SchemaId;
using streamlab::Value;
using streamlab::value_equal;
using streamlab::value_to_string;

size_t n_windows(size_t n, uint32_t w, uint32_t s) {
  if (n < w) return 0;
  return (n - w) / s + 1;
}

namespace {

Value aggregate_span(OperatorKind kind, const std::string& field,
                     const std::vector<const EventRecord*>& window) {
  switch (kind) {
    case OperatorKind::Count:
      return int64_t(window.size());
    case OperatorKind::Max: {
      double best = window.front()->numeric(field);
      for (const EventRecord* r : window)
        best = std::max(best, r->numeric(field));
      return best;
    }
    case OperatorKind::Average:
    case OperatorKind::AveragePartition:
    case OperatorKind::Reduce: {
      double sum = 0;
      for (const EventRecord* r : window) sum += r->numeric(field);
      return sum / double(window.size());
    }
    default:
      throw streamlab::InvalidSpec("oracle: not an aggregate kind");
  }
}

EventRecord emission_from(const EventRecord& closer, uint64_t seq, Value v) {
  EventRecord out = closer;
  out.schema = SchemaId::Derived;
  out.seq = seq;
  out.set("value", std::move(v));
  return out;
}

}  // namespace

std::vector<EventRecord> agg_emissions(OperatorKind kind,
                                       const std::string& field,
                                       const std::vector<EventRecord>& input,
                                       uint32_t w, uint32_t s) {
  std::vector<EventRecord> out;
  for (size_t i = 0; i < n_windows(input.size(), w, s); ++i) {
    std::vector<const EventRecord*> window;
    for (size_t j = i * s; j < i * s + w; ++j) window.push_back(&input[j]);
    out.push_back(emission_from(input[i * s + w - 1], out.size(),
                                aggregate_span(kind, field, window)));
  }
  return out;
}

std::vector<EventRecord> keyed_agg_emissions(
    OperatorKind kind, const std::string& field, const std::string& key_field,
    const std::vector<EventRecord>& input, uint32_t w, uint32_t s) {
  // Positions of each key's records in stream order.
  std::map<std::string, std::vector<size_t>> by_key;
  for (size_t i = 0; i < input.size(); ++i)
    by_key[value_to_string(input[i].get(key_field))].push_back(i);

  // One pending emission per complete per-key window, sorted by the stream
  // position of the record that closed it. Positions are distinct across
  // keys, so the order is total.
  struct Pending {
    size_t closer_pos;
    Value value;
  };
  std::vector<Pending> pending;
  for (const auto& [key, positions] : by_key) {
    for (size_t i = 0; i < n_windows(positions.size(), w, s); ++i) {
      std::vector<const EventRecord*> window;
      for (size_t j = i * s; j < i * s + w; ++j)
        window.push_back(&input[positions[j]]);
      pending.push_back({positions[i * s + w - 1],
                         aggregate_span(kind, field, window)});
    }
  }
  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) {
              return a.closer_pos < b.closer_pos;
            });

  std::vector<EventRecord> out;
  for (auto& p : pending)
    out.push_back(emission_from(input[p.closer_pos], out.size(),
                                std::move(p.value)));
  return out;
}

std::vector<EventRecord> join_emissions(const std::string& left_key,
                                        const std::string& right_key,
                                        const std::vector<EventRecord>& left,
                                        const std::vector<EventRecord>& right,
                                        uint32_t w, uint32_t s) {
  size_t batches =
      std::min(n_windows(left.size(), w, s), n_windows(right.size(), w, s));
  std::vector<EventRecord> out;
  for (size_t i = 0; i < batches; ++i) {
    for (size_t li = i * s; li < i * s + w; ++li) {
      const Value& lk = left[li].get(left_key);
      for (size_t ri = i * s; ri < i * s + w; ++ri) {
        if (!value_equal(lk, right[ri].get(right_key))) continue;
        EventRecord merged;
        merged.schema = SchemaId::Derived;
        merged.seq = out.size();
        merged.ts = std::max(left[li].ts, right[ri].ts);
        merged.fields = left[li].fields;
        for (const auto& f : right[ri].fields) {
          std::string name = f.name;
          if (merged.find(name)) name += "_r";
          merged.fields.push_back({name, f.value});
        }
        out.push_back(std::move(merged));
      }
    }
  }
  return out;
}

std::vector<uint64_t> trim_reference(const std::vector<uint64_t>& xs,
                                     double frac) {
  size_t cut = size_t(frac * double(xs.size()));
  std::vector<uint64_t> out;
  for (size_t i = cut; i + cut < xs.size(); ++i) out.push_back(xs[i]);
  return out;
}

std::vector<double> cdf_reference(std::vector<uint64_t> xs, size_t k) {
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  for (size_t j = 0; j < k; ++j)
    out.push_back(double(xs[j * (xs.size() - 1) / (k - 1)]));
  return out;
}

bool records_equal(const EventRecord& a, const EventRecord& b) {
  if (a.seq != b.seq || a.schema != b.schema || a.ts != b.ts) return false;
  if (a.fields.size() != b.fields.size()) return false;
  for (size_t i = 0; i < a.fields.size(); ++i) {
    if (a.fields[i].name != b.fields[i].name) return false;
    if (!value_equal(a.fields[i].value, b.fields[i].value)) return false;
  }
  return true;
}

bool outputs_equal(const std::vector<EventRecord>& a,
                   const std::vector<EventRecord>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!records_equal(a[i], b[i])) return false;
  return true;
}

}  // namespace oracle
