#include "streamlab/observer.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include "json.hpp"

#include "streamlab/expr.hpp"

namespace streamlab {

using nlohmann::json;

const char* mode_name(TraceMode m) {
  return m == TraceMode::Simulated ? "simulated" : "measured";
}

TraceMode mode_from_name(const std::string& name) {
  if (name == "simulated") return TraceMode::Simulated;
  if (name == "measured") return TraceMode::Measured;
  throw InvalidSpec("unknown trace mode: " + name);
}

ObserveResult reduce_tail_samples(const std::vector<TailSample>& samples) {
  ObserveResult out;
  if (samples.empty()) return out;
  uint64_t prev_tail = samples[0].second;
  std::vector<uint64_t> times;
  for (size_t i = 1; i < samples.size(); ++i) {
    uint64_t tail = samples[i].second;
    if (tail == prev_tail) continue;
    if (tail < prev_tail) throw Error("consumer counter went backwards");
    times.push_back(samples[i].first);
    out.missed += tail - prev_tail - 1;
    prev_tail = tail;
  }
  for (size_t i = 1; i < times.size(); ++i)
    out.trace.deltas.push_back(times[i] - times[i - 1]);
  return out;
}

struct StageObserver::Impl {
  const PipelineRun* run;
  std::string stage;
  const CycleCounter* counter;
  std::thread th;
  std::atomic<bool> stop{false};
  std::vector<TailSample> samples;

  uint64_t tail_sum(size_t nin) const {
    uint64_t sum = 0;
    for (size_t i = 0; i < nin; ++i)
      sum += run->input_buffer(stage, i).popped();
    return sum;
  }

  void loop() {
    size_t nin = run->input_count(stage);
    uint64_t last = tail_sum(nin);
    samples.push_back({counter->now(), last});
    unsigned spin = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      uint64_t cur = tail_sum(nin);
      if (cur != last) {
        samples.push_back({counter->now(), cur});
        last = cur;
      }
      if (run->finished() && cur == tail_sum(nin)) {
        // One more settled look after the run ends, then leave.
        if (tail_sum(nin) == last) break;
      }
      if ((++spin & 63u) == 0) std::this_thread::yield();
    }
    uint64_t cur = tail_sum(nin);
    if (cur != last) samples.push_back({counter->now(), cur});
  }
};

StageObserver::StageObserver(const PipelineRun& run, const std::string& stage_id,
                             const CycleCounter& counter)
    : impl_(new Impl) {
  impl_->run = &run;
  impl_->stage = stage_id;
  impl_->counter = &counter;
  run.input_count(stage_id);  // validates the stage id up front
}

StageObserver::~StageObserver() {
  impl_->stop.store(true, std::memory_order_relaxed);
  if (impl_->th.joinable()) impl_->th.join();
}

void StageObserver::start() {
  impl_->th = std::thread([this] { impl_->loop(); });
}

ObserveResult StageObserver::stop_and_collect() {
  impl_->stop.store(true, std::memory_order_relaxed);
  if (impl_->th.joinable()) impl_->th.join();
  ObserveResult res = reduce_tail_samples(impl_->samples);
  res.trace.mode = TraceMode::Measured;
  res.trace.stage = impl_->stage;
  return res;
}

CostModel CostModel::defaults() {
  CostModel m;
  m.map = {520, 12};
  m.filter = {480, 560, 12, 0.2, 0.8};
  m.window[OperatorKind::Join] = {650, 14, 900, 28};
  m.window[OperatorKind::Max] = {600, 13, 500, 18};
  m.window[OperatorKind::Average] = {610, 13, 520, 22};
  m.window[OperatorKind::AveragePartition] = {640, 14, 560, 24};
  m.window[OperatorKind::Count] = {560, 12, 430, 14};
  m.window[OperatorKind::Reduce] = {615, 13, 530, 21};
  m.jitter = 10;
  m.expr_spread = 0.08;
  return m;
}

void CostModel::validate() const {
  auto pos = [](double v, const char* what) {
    if (!(v > 0)) throw InvalidModel(std::string(what) + " must be positive");
  };
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0)) throw InvalidModel(std::string(what) + " must be >= 0");
  };
  pos(map.loc, "map.loc");
  nonneg(map.scale, "map.scale");
  pos(filter.drop_loc, "filter.drop_loc");
  pos(filter.pass_loc, "filter.pass_loc");
  nonneg(filter.scale, "filter.scale");
  if (!(filter.selectivity_lo > 0 && filter.selectivity_hi < 1 &&
        filter.selectivity_lo <= filter.selectivity_hi))
    throw InvalidModel("filter selectivity range must sit inside (0, 1)");
  for (const auto& [kind, wc] : window) {
    pos(wc.light_loc, "window light_loc");
    nonneg(wc.light_scale, "window light_scale");
    nonneg(wc.heavy_base, "window heavy_base");
    nonneg(wc.heavy_per_row, "window heavy_per_row");
    (void)kind;
  }
  nonneg(jitter, "jitter");
  if (!(expr_spread >= 0 && expr_spread <= 0.5))
    throw InvalidModel("expr_spread must be in [0, 0.5]");
}

static json kind_cost_json(const KindCost& c) {
  return {{"loc", c.loc}, {"scale", c.scale}};
}

std::string cost_model_to_json(const CostModel& m) {
  json j;
  j["map"] = kind_cost_json(m.map);
  j["filter"] = {{"drop_loc", m.filter.drop_loc},
                 {"pass_loc", m.filter.pass_loc},
                 {"scale", m.filter.scale},
                 {"selectivity_lo", m.filter.selectivity_lo},
                 {"selectivity_hi", m.filter.selectivity_hi}};
  json w;
  for (const auto& [kind, wc] : m.window)
    w[kind_name(kind)] = {{"light_loc", wc.light_loc},
                          {"light_scale", wc.light_scale},
                          {"heavy_base", wc.heavy_base},
                          {"heavy_per_row", wc.heavy_per_row}};
  j["window"] = w;
  j["jitter"] = m.jitter;
  j["expr_spread"] = m.expr_spread;
  return j.dump(2);
}

CostModel cost_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("bad cost model json: ") + e.what());
  }
  CostModel m;
  try {
    m.map = {j.at("map").at("loc"), j.at("map").at("scale")};
    const auto& f = j.at("filter");
    m.filter = {f.at("drop_loc"), f.at("pass_loc"), f.at("scale"),
                f.at("selectivity_lo"), f.at("selectivity_hi")};
    for (const auto& [name, wj] : j.at("window").items())
      m.window[kind_from_name(name)] = {wj.at("light_loc"), wj.at("light_scale"),
                                        wj.at("heavy_base"),
                                        wj.at("heavy_per_row")};
    m.jitter = j.at("jitter");
    m.expr_spread = j.at("expr_spread");
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("bad cost model json: ") + e.what());
  }
  m.validate();
  return m;
}

namespace {

// Per-record cost simulation state for one operator.
class CostSim {
 public:
  CostSim(const OperatorSpec& spec, const CostModel& model, SplitMix64& rng)
      : spec_(spec), model_(model) {
    factor_ = model.expr_spread > 0
                  ? rng.uniform(1.0 - model.expr_spread, 1.0 + model.expr_spread)
                  : 1.0;
    if (spec.kind == OperatorKind::Filter)
      selectivity_ = rng.uniform(model.filter.selectivity_lo,
                                 model.filter.selectivity_hi);
    if (spec.kind == OperatorKind::Fused) {
      // A leading join is driven by one synthetic stream, same as a
      // standalone join stage: light cost per record, one emission per
      // closed window feeding the rest of the chain.
      for (const auto& child : spec.fused_ops)
        children_.emplace_back(child, model, rng);
    }
    if (is_windowed(spec.kind)) {
      auto it = model.window.find(spec.kind);
      if (it == model.window.end())
        throw InvalidModel(std::string("no window cost for ") +
                           kind_name(spec.kind));
    }
  }

  // Cost of processing one record, plus how many records leave the stage.
  double on_record(SplitMix64& rng, size_t& emitted) {
    emitted = 1;
    switch (spec_.kind) {
      case OperatorKind::Map:
        return rng.normal(model_.map.loc * factor_, model_.map.scale);
      case OperatorKind::Filter: {
        bool pass = rng.bernoulli(selectivity_);
        emitted = pass ? 1 : 0;
        double loc = (pass ? model_.filter.pass_loc : model_.filter.drop_loc);
        return rng.normal(loc * factor_, model_.filter.scale);
      }
      case OperatorKind::Fused: {
        double cost = 0;
        size_t batch = 1;
        for (auto& child : children_) {
          size_t next = 0;
          for (size_t i = 0; i < batch; ++i) {
            size_t child_emitted = 0;
            cost += child.on_record(rng, child_emitted);
            next += child_emitted;
          }
          batch = next;
          if (batch == 0) break;
        }
        emitted = batch;
        return cost;
      }
      default: {
        const WindowCost& wc = model_.window.at(spec_.kind);
        double cost = rng.normal(wc.light_loc * factor_, wc.light_scale);
        ++index_;
        bool heavy = index_ >= spec_.window_size &&
                     (index_ - spec_.window_size) % spec_.slide == 0;
        emitted = heavy ? 1 : 0;
        if (heavy)
          cost += wc.heavy_base + wc.heavy_per_row * double(spec_.window_size);
        return cost;
      }
    }
  }

 private:
  OperatorSpec spec_;
  const CostModel& model_;
  double factor_ = 1.0;
  double selectivity_ = 0.5;
  uint64_t index_ = 0;
  std::vector<CostSim> children_;
};

uint64_t trace_seed(const OperatorSpec& spec, uint64_t seed) {
  uint64_t salt = uint64_t(spec.kind) * 131 + spec.window_size * 7 + spec.slide;
  return SplitMix64::mix(seed, salt);
}

}  // namespace

TimingTrace synth_trace(const OperatorSpec& spec, const CostModel& model,
                        size_t n, uint64_t seed) {
  model.validate();
  SplitMix64 rng(trace_seed(spec, seed));
  CostSim sim(spec, model, rng);
  TimingTrace t;
  t.label = spec.kind;
  if (is_windowed(spec.kind))
    t.params = WindowParams{spec.window_size, spec.slide};
  t.mode = TraceMode::Simulated;
  t.seed = seed;
  t.deltas.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    size_t emitted = 0;
    double cost = sim.on_record(rng, emitted);
    if (model.jitter > 0) cost += rng.normal(0.0, model.jitter);
    if (cost < 1) cost = 1;
    t.deltas.push_back(uint64_t(cost + 0.5));
  }
  return t;
}

TimingTrace synth_stage_trace(const StageSpec& stage, const CostModel& model,
                              size_t n, uint64_t seed) {
  TimingTrace t = synth_trace(stage.op, model, n, seed);
  if (stage.pad_target > 0)
    for (auto& d : t.deltas)
      if (d < stage.pad_target) d = stage.pad_target;
  if (stage.batch > 1) {
    std::vector<uint64_t> grouped;
    grouped.reserve(t.deltas.size() / stage.batch + 1);
    for (size_t i = 0; i < t.deltas.size(); i += stage.batch) {
      uint64_t sum = 0;
      for (size_t j = i; j < t.deltas.size() && j < i + stage.batch; ++j)
        sum += t.deltas[j];
      grouped.push_back(sum);
    }
    t.deltas = std::move(grouped);
  }
  t.stage = stage.id;
  return t;
}

namespace {

std::vector<std::string> name_parts(const std::string& s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Fields a spec's expressions read, split into numeric operands and grouping
// keys, so probe records can carry whatever schema the operator expects.
// Fused specs contribute their whole chain.
void referenced_fields(const OperatorSpec& spec, std::set<std::string>& numeric,
                       std::set<std::string>& keys) {
  switch (spec.kind) {
    case OperatorKind::Map:
    case OperatorKind::Filter: {
      auto parts = name_parts(spec.expr_id, ':');
      if (parts.size() >= 2) {
        if (parts[0] == "project")
          for (const auto& f : name_parts(parts[1], ',')) numeric.insert(f);
        else
          numeric.insert(parts[1]);
      }
      break;
    }
    case OperatorKind::Join: {
      JoinKey k = parse_join_key(spec.key_field);
      keys.insert(k.left);
      keys.insert(k.right);
      break;
    }
    case OperatorKind::Fused:
      for (const auto& child : spec.fused_ops)
        referenced_fields(child, numeric, keys);
      break;
    default: {
      std::string f = parse_agg_field(spec.expr_id);
      if (!f.empty()) numeric.insert(f);
      if (spec.kind == OperatorKind::AveragePartition && !spec.key_field.empty())
        keys.insert(spec.key_field);
      break;
    }
  }
}

std::vector<EventRecord> profile_records(size_t n, uint64_t seed,
                                         const std::set<std::string>& numeric,
                                         const std::set<std::string>& keys) {
  std::vector<EventRecord> recs;
  recs.reserve(n);
  SplitMix64 rng(SplitMix64::mix(seed, 9));
  for (size_t i = 0; i < n; ++i) {
    EventRecord r;
    r.seq = i;
    r.schema = SchemaId::Derived;
    r.ts = int64_t(i);
    r.fields = {{"value", rng.uniform(0.0, 1.0)},
                {"key", int64_t(rng.uniform_int(1, 8))}};
    for (const auto& f : numeric)
      if (f != "value" && f != "key")
        r.fields.push_back({f, rng.uniform(0.0, 1.0)});
    for (const auto& f : keys)
      if (f != "value" && f != "key" && !numeric.count(f))
        r.fields.push_back({f, int64_t(rng.uniform_int(1, 8))});
    recs.push_back(std::move(r));
  }
  return recs;
}

TimingTrace measure_one(const OperatorSpec& spec, const ProfileOptions& opts,
                        uint64_t seed) {
  PipelineSpec p;
  StageSpec st;
  st.id = "probe";
  st.op = spec;
  p.stages.push_back(st);
  bool join = spec.kind == OperatorKind::Join;
  if (join)
    p.sources = {{"left", "probe"}, {"right", "probe"}};
  else
    p.sources = {{"in", "probe"}};
  p.sinks = {"probe"};

  std::set<std::string> numeric;
  std::set<std::string> keys;
  referenced_fields(spec, numeric, keys);

  InputStreams inputs;
  if (join) {
    inputs["left"] = profile_records(opts.n_events, seed, numeric, keys);
    inputs["right"] = profile_records(opts.n_events, seed + 1, numeric, keys);
  } else {
    inputs["in"] = profile_records(opts.n_events, seed, numeric, keys);
  }

  RunOptions ro;
  ro.mode = RunOptions::Mode::Threaded;
  // A tiny buffer forces one observable consumer step per record instead of
  // scheduler-sized bursts.
  ro.buffer_capacity = 2;
  auto counter = make_hardware_counter();
  auto run = run_pipeline(p, inputs, ro);
  StageObserver obs(*run, "probe", *counter);
  obs.start();
  run->wait();
  ObserveResult res = obs.stop_and_collect();
  res.trace.label = spec.kind;
  if (is_windowed(spec.kind))
    res.trace.params = WindowParams{spec.window_size, spec.slide};
  res.trace.seed = seed;
  return std::move(res.trace);
}

}  // namespace

void profile_operator(const OperatorSpec& spec, const ProfileOptions& opts,
                      size_t reps,
                      const std::function<void(TimingTrace&&)>& emit) {
  if (opts.w_grid.empty() || opts.s_grid.empty())
    throw InvalidSpec("profile parameter grids must not be empty");
  for (size_t rep = 0; rep < reps; ++rep) {
    OperatorSpec sp = spec;
    if (is_windowed(sp.kind)) {
      uint32_t w = opts.w_grid[rep % opts.w_grid.size()];
      uint32_t s = opts.s_grid[(rep / opts.w_grid.size()) % opts.s_grid.size()];
      sp.window_size = w;
      sp.slide = std::min(s, w);
    }
    uint64_t seed = SplitMix64::mix(opts.seed, rep * 2654435761ULL + 17);
    TimingTrace t = opts.mode == TraceMode::Simulated
                        ? synth_trace(sp, opts.model, opts.n_events, seed)
                        : measure_one(sp, opts, seed);
    t.mode = opts.mode;
    t.query = opts.query;
    t.stage = opts.stage;
    emit(std::move(t));
  }
}

std::vector<TimingTrace> profile_operator(const OperatorSpec& spec,
                                          const ProfileOptions& opts,
                                          size_t reps) {
  std::vector<TimingTrace> out;
  out.reserve(reps);
  profile_operator(spec, opts, reps,
                   [&](TimingTrace&& t) { out.push_back(std::move(t)); });
  return out;
}

std::string trace_to_jsonl(const TimingTrace& t) {
  json j;
  if (t.label)
    j["label"] = kind_name(*t.label);
  else
    j["label"] = nullptr;
  if (t.params)
    j["params"] = {{"w", t.params->w}, {"s", t.params->s}};
  else
    j["params"] = nullptr;
  j["mode"] = mode_name(t.mode);
  j["seed"] = t.seed;
  if (!t.query.empty()) j["query"] = t.query;
  if (!t.stage.empty()) j["stage"] = t.stage;
  j["deltas"] = t.deltas;
  return j.dump();
}

TimingTrace trace_from_jsonl(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw MalformedPayload(std::string("bad trace line: ") + e.what());
  }
  TimingTrace t;
  try {
    if (j.contains("label") && !j.at("label").is_null())
      t.label = kind_from_name(j.at("label").get<std::string>());
    if (j.contains("params") && !j.at("params").is_null())
      t.params = WindowParams{j.at("params").at("w").get<uint32_t>(),
                              j.at("params").at("s").get<uint32_t>()};
    t.mode = mode_from_name(j.value("mode", "simulated"));
    t.seed = j.value("seed", uint64_t(0));
    t.query = j.value("query", "");
    t.stage = j.value("stage", "");
    t.deltas = j.at("deltas").get<std::vector<uint64_t>>();
  } catch (const json::exception& e) {
    throw MalformedPayload(std::string("bad trace line: ") + e.what());
  }
  return t;
}

}  // namespace streamlab
