#include "streamlab/operators.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "streamlab/expr.hpp"

namespace streamlab {

namespace {

class MapState : public OperatorState {
 public:
  explicit MapState(const OperatorSpec& spec) : expr_(parse_map_expr(spec.expr_id)) {}

  std::vector<EventRecord> on_record(const EventRecord& rec, int) override {
    return {expr_.apply(rec)};
  }

 private:
  MapExpr expr_;
};

class FilterState : public OperatorState {
 public:
  explicit FilterState(const OperatorSpec& spec)
      : expr_(parse_filter_expr(spec.expr_id)) {}

  std::vector<EventRecord> on_record(const EventRecord& rec, int) override {
    if (expr_.test(rec)) return {rec};
    return {};
  }

 private:
  FilterExpr expr_;
};

enum class AggFn { Max, Average, Count };

AggFn agg_fn_for(OperatorKind k) {
  switch (k) {
    case OperatorKind::Max: return AggFn::Max;
    case OperatorKind::Average:
    case OperatorKind::AveragePartition:
    case OperatorKind::Reduce: return AggFn::Average;
    case OperatorKind::Count: return AggFn::Count;
    default: throw InvalidSpec("not an aggregate kind");
  }
}

Value aggregate(AggFn fn, const std::deque<double>& window) {
  switch (fn) {
    case AggFn::Max:
      return *std::max_element(window.begin(), window.end());
    case AggFn::Average: {
      double sum = 0;
      for (double v : window) sum += v;
      return sum / double(window.size());
    }
    case AggFn::Count:
      return int64_t(window.size());
  }
  throw Error("unreachable");
}

EventRecord make_emission(const EventRecord& trigger, uint64_t seq, Value value) {
  EventRecord out = trigger;
  out.schema = SchemaId::Derived;
  out.seq = seq;
  out.set("value", std::move(value));
  return out;
}

// Count-based sliding window over a single unkeyed stream. Emits when the
// window holds exactly window_size records, then drops the oldest slide.
class WindowAggState : public OperatorState {
 public:
  explicit WindowAggState(const OperatorSpec& spec)
      : fn_(agg_fn_for(spec.kind)),
        field_(parse_agg_field(spec.expr_id)),
        w_(spec.window_size),
        s_(spec.slide) {
    if (fn_ != AggFn::Count && field_.empty())
      throw InvalidSpec(std::string(kind_name(spec.kind)) +
                        " needs expr_id field:<name>");
  }

  std::vector<EventRecord> on_record(const EventRecord& rec, int) override {
    window_.push_back(fn_ == AggFn::Count ? 0.0 : rec.numeric(field_));
    if (window_.size() < w_) return {};
    EventRecord out = make_emission(rec, emitted_++, aggregate(fn_, window_));
    window_.erase(window_.begin(), window_.begin() + s_);
    return {out};
  }

 private:
  AggFn fn_;
  std::string field_;
  uint32_t w_, s_;
  std::deque<double> window_;
  uint64_t emitted_ = 0;
};

// Keyed variant: one window per key value, sharing the emission counter.
class KeyedWindowAggState : public OperatorState {
 public:
  explicit KeyedWindowAggState(const OperatorSpec& spec)
      : fn_(agg_fn_for(spec.kind)),
        field_(parse_agg_field(spec.expr_id)),
        key_(spec.key_field),
        w_(spec.window_size),
        s_(spec.slide) {
    if (fn_ != AggFn::Count && field_.empty())
      throw InvalidSpec(std::string(kind_name(spec.kind)) +
                        " needs expr_id field:<name>");
  }

  std::vector<EventRecord> on_record(const EventRecord& rec, int) override {
    std::string k = value_to_string(rec.get(key_));
    auto& window = windows_[k];
    window.push_back(fn_ == AggFn::Count ? 0.0 : rec.numeric(field_));
    if (window.size() < w_) return {};
    EventRecord out = make_emission(rec, emitted_++, aggregate(fn_, window));
    window.erase(window.begin(), window.begin() + s_);
    return {out};
  }

 private:
  AggFn fn_;
  std::string field_, key_;
  uint32_t w_, s_;
  std::map<std::string, std::deque<double>> windows_;
  uint64_t emitted_ = 0;
};

// Two-sided windowed equi-join. Each side buffers up to window_size records;
// when both sides hold exactly window_size, every key-equal left/right pair
// is emitted (left-major order) and the oldest slide records are dropped
// from each side. wants_input keeps the fill balanced so the result depends
// only on the two input streams.
class JoinState : public OperatorState {
 public:
  explicit JoinState(const OperatorSpec& spec)
      : key_(parse_join_key(spec.key_field)),
        w_(spec.window_size),
        s_(spec.slide) {}

  int wants_input() const override {
    bool can_emit = (side_[0].size() == w_ || !closed_[0]) &&
                    (side_[1].size() == w_ || !closed_[1]);
    if (!can_emit) {
      // No window can complete any more; drain whichever side remains open.
      return closed_[0] ? 1 : 0;
    }
    if (side_[0].size() >= w_) return 1;
    if (side_[1].size() >= w_) return 0;
    return side_[0].size() <= side_[1].size() ? 0 : 1;
  }

  void input_closed(int input) override { closed_[input & 1] = true; }

  std::vector<EventRecord> on_record(const EventRecord& rec, int input) override {
    side_[input & 1].push_back(rec);
    std::vector<EventRecord> out;
    if (side_[0].size() == w_ && side_[1].size() == w_) {
      for (const auto& l : side_[0]) {
        const Value& lk = l.get(key_.left);
        for (const auto& r : side_[1]) {
          if (value_equal(lk, r.get(key_.right)))
            out.push_back(merge(l, r));
        }
      }
      side_[0].erase(side_[0].begin(), side_[0].begin() + s_);
      side_[1].erase(side_[1].begin(), side_[1].begin() + s_);
    }
    return out;
  }

 private:
  EventRecord merge(const EventRecord& l, const EventRecord& r) {
    EventRecord out;
    out.schema = SchemaId::Derived;
    out.seq = emitted_++;
    out.ts = std::max(l.ts, r.ts);
    out.fields = l.fields;
    for (const auto& f : r.fields) {
      std::string name = f.name;
      if (out.find(name)) name += "_r";
      out.fields.push_back({name, f.value});
    }
    return out;
  }

  JoinKey key_;
  uint32_t w_, s_;
  std::deque<EventRecord> side_[2];
  bool closed_[2] = {false, false};
  uint64_t emitted_ = 0;
};

// Chain of operators run back to back inside one stage. Input routing goes
// to the first child; downstream children see each emission in order.
class FusedState : public OperatorState {
 public:
  explicit FusedState(const OperatorSpec& spec) {
    for (const auto& child : spec.fused_ops)
      children_.push_back(OperatorState::make(child));
  }

  int wants_input() const override { return children_.front()->wants_input(); }

  void input_closed(int input) override {
    children_.front()->input_closed(input);
  }

  std::vector<EventRecord> on_record(const EventRecord& rec, int input) override {
    std::vector<EventRecord> batch = children_.front()->on_record(rec, input);
    for (size_t i = 1; i < children_.size() && !batch.empty(); ++i) {
      std::vector<EventRecord> next;
      for (const auto& r : batch) {
        auto outs = children_[i]->on_record(r, 0);
        next.insert(next.end(), outs.begin(), outs.end());
      }
      batch = std::move(next);
    }
    return batch;
  }

 private:
  std::vector<std::unique_ptr<OperatorState>> children_;
};

}  // namespace

std::unique_ptr<OperatorState> OperatorState::make(const OperatorSpec& spec) {
  switch (spec.kind) {
    case OperatorKind::Map: return std::make_unique<MapState>(spec);
    case OperatorKind::Filter: return std::make_unique<FilterState>(spec);
    case OperatorKind::Join: return std::make_unique<JoinState>(spec);
    case OperatorKind::Max:
    case OperatorKind::Average:
    case OperatorKind::Reduce:
      return std::make_unique<WindowAggState>(spec);
    case OperatorKind::Count:
      if (spec.key_field.empty()) return std::make_unique<WindowAggState>(spec);
      return std::make_unique<KeyedWindowAggState>(spec);
    case OperatorKind::AveragePartition:
      return std::make_unique<KeyedWindowAggState>(spec);
    case OperatorKind::Fused: return std::make_unique<FusedState>(spec);
  }
  throw InvalidSpec("unknown operator kind");
}

std::vector<EventRecord> apply_operator(OperatorState& state,
                                        const EventRecord& rec, int input) {
  return state.on_record(rec, input);
}

std::vector<EventRecord> run_operator(
    const OperatorSpec& spec,
    const std::vector<std::vector<EventRecord>>& inputs) {
  bool leads_join = spec.kind == OperatorKind::Join ||
                    (spec.kind == OperatorKind::Fused &&
                     spec.fused_ops.front().kind == OperatorKind::Join);
  size_t want_inputs = leads_join ? 2 : 1;
  if (inputs.size() != want_inputs)
    throw InvalidSpec("operator expects " + std::to_string(want_inputs) +
                      " input streams");
  auto state = OperatorState::make(spec);
  std::vector<EventRecord> out;
  std::vector<size_t> pos(inputs.size(), 0);
  while (true) {
    int side = state->wants_input();
    if (pos[side] >= inputs[side].size()) {
      state->input_closed(side);
      int other = 1 - side;
      if (want_inputs == 1 || pos[other] >= size_t(inputs[other].size())) break;
      continue;
    }
    auto outs = state->on_record(inputs[side][pos[side]++], side);
    out.insert(out.end(), outs.begin(), outs.end());
  }
  return out;
}

}  // namespace streamlab
