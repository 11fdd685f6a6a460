#include "streamlab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"

namespace streamlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ProfilePlanEntry plan_entry(QueryId q, const std::string& stage, size_t reps,
                            double scale) {
  PipelineSpec spec = catalog_query(q);
  const StageSpec* st = spec.find_stage(stage);
  if (!st) throw InvalidSpec("no stage " + stage + " in " + query_name(q));
  ProfilePlanEntry e;
  e.op = st->op;
  e.query = query_name(q);
  e.stage = stage;
  e.reps = std::max<size_t>(1, size_t(std::llround(double(reps) * scale)));
  return e;
}

void check_scale(double scale) {
  if (!(scale > 0)) throw InvalidSpec("plan scale must be positive");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace

std::vector<ProfilePlanEntry> default_market_plan(double scale) {
  check_scale(scale);
  std::vector<ProfilePlanEntry> plan;
  plan.push_back(plan_entry(QueryId::Q1, "map", 421, scale));
  plan.push_back(plan_entry(QueryId::Q2, "filter", 325, scale));
  plan.push_back(plan_entry(QueryId::Q2, "map", 421, scale));
  plan.push_back(plan_entry(QueryId::Q3, "filter_person", 324, scale));
  plan.push_back(plan_entry(QueryId::Q3, "filter_auction", 324, scale));
  plan.push_back(plan_entry(QueryId::Q3, "join", 337, scale));
  plan.push_back(plan_entry(QueryId::Q3, "map", 420, scale));
  plan.push_back(plan_entry(QueryId::Q4, "join", 336, scale));
  plan.push_back(plan_entry(QueryId::Q4, "max", 530, scale));
  plan.push_back(plan_entry(QueryId::Q4, "average", 1018, scale));
  plan.push_back(plan_entry(QueryId::Q6, "join", 336, scale));
  plan.push_back(plan_entry(QueryId::Q6, "filter", 324, scale));
  plan.push_back(plan_entry(QueryId::Q6, "max", 529, scale));
  plan.push_back(plan_entry(QueryId::Q6, "avg_partition", 1071, scale));
  return plan;
}

std::vector<ProfilePlanEntry> default_flight_plan(double scale) {
  check_scale(scale);
  std::vector<ProfilePlanEntry> plan;
  plan.push_back(plan_entry(QueryId::FlightStats, "map", 350, scale));
  plan.push_back(plan_entry(QueryId::FlightStats, "filter", 350, scale));
  plan.push_back(plan_entry(QueryId::FlightStats, "reduce", 350, scale));
  return plan;
}

OfflineOptions::OfflineOptions() {
  grid.n_estimators = {100};
  grid.max_depth = {0, 10};
  grid.max_features = {RfParams::MaxFeatures::Sqrt};
  grid.bootstrap = {true};
  grid.gamma = {0.0};
  regressor.family = ModelFamily::RandomForest;
  regressor.task = TaskType::Regression;
  regressor.rf.n_estimators = 100;
  regressor.seed = 7;
}

OfflineArtifacts offline_phase(const std::vector<ProfilePlanEntry>& plan,
                               const OfflineOptions& opts) {
  if (plan.empty()) throw DegenerateData("profiling plan is empty");
  std::set<OperatorKind> kinds;
  for (const auto& e : plan) kinds.insert(e.op.kind);
  if (kinds.size() < 2)
    throw DegenerateData("offline phase needs at least two operator kinds");

  OfflineArtifacts art;
  art.dataset.k = opts.k;
  art.dataset.trim_frac = opts.trim_frac;
  for (size_t i = 0; i < plan.size(); ++i) {
    const ProfilePlanEntry& e = plan[i];
    ProfileOptions po = opts.profile;
    po.query = e.query;
    po.stage = e.stage;
    po.seed = SplitMix64::mix(opts.profile.seed, 1000003ULL * (i + 1));
    profile_operator(e.op, po, e.reps, [&](TimingTrace&& t) {
      art.dataset.rows.push_back(featurize_trace(t, opts.k, opts.trim_frac));
    });
  }

  art.search = grid_search(art.dataset, opts.family, opts.grid, opts.folds,
                           opts.train_seed);
  art.classifier = fit(art.dataset, art.search.best);
  RegressorBundle regs = fit_kind_regressors(art.dataset, opts.regressor);
  art.w_regressors = std::move(regs.w);
  art.s_regressors = std::move(regs.s);
  return art;
}

RegressorBundle fit_kind_regressors(const Dataset& ds, const ModelSpec& base) {
  RegressorBundle out;
  for (OperatorKind kind : ds.classes()) {
    if (!is_windowed(kind)) continue;
    Dataset sub;
    sub.k = ds.k;
    sub.trim_frac = ds.trim_frac;
    for (const auto& row : ds.rows)
      if (row.label && *row.label == kind) sub.rows.push_back(row);
    ModelSpec rs = base;
    rs.task = TaskType::Regression;
    rs.seed = SplitMix64::mix(base.seed, uint64_t(kind) + 64);
    out.w.emplace(kind, fit_param_regressor(sub, rs, "w"));
    rs.seed = SplitMix64::mix(base.seed, uint64_t(kind) + 128);
    out.s.emplace(kind, fit_param_regressor(sub, rs, "s"));
  }
  return out;
}

void save_artifacts(const OfflineArtifacts& artifacts, const std::string& dir) {
  fs::create_directories(dir);
  write_text(dir + "/classifier.json", model_to_json(artifacts.classifier));
  json regs = json::array();
  auto dump_side = [&](const std::map<OperatorKind, TrainedModel>& side,
                       const char* target) {
    for (const auto& [kind, model] : side) {
      std::string fname = std::string("regressor_") + kind_name(kind) + "_" +
                          target + ".json";
      write_text(dir + "/" + fname, model_to_json(model));
      regs.push_back({{"kind", kind_name(kind)},
                      {"target", target},
                      {"file", fname}});
    }
  };
  dump_side(artifacts.w_regressors, "w");
  dump_side(artifacts.s_regressors, "s");
  json manifest;
  manifest["version"] = 1;
  manifest["classifier"] = "classifier.json";
  manifest["regressors"] = regs;
  write_text(dir + "/manifest.json", manifest.dump(2));
}

OfflineArtifacts load_artifacts(const std::string& dir) {
  json manifest;
  try {
    manifest = json::parse(read_text(dir + "/manifest.json"));
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("bad artifact manifest: ") + e.what());
  }
  OfflineArtifacts art;
  try {
    art.classifier =
        model_from_json(read_text(dir + "/" + manifest.at("classifier").get<std::string>()));
    for (const auto& r : manifest.at("regressors")) {
      OperatorKind kind = kind_from_name(r.at("kind").get<std::string>());
      std::string target = r.at("target").get<std::string>();
      TrainedModel m = model_from_json(read_text(dir + "/" + r.at("file").get<std::string>()));
      if (target == "w")
        art.w_regressors.emplace(kind, std::move(m));
      else if (target == "s")
        art.s_regressors.emplace(kind, std::move(m));
      else
        throw InvalidModel("unknown regressor target: " + target);
    }
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("bad artifact manifest: ") + e.what());
  }
  return art;
}

namespace {

struct StageTraceResult {
  std::string stage_id;
  TimingTrace trace;
  uint64_t missed = 0;
};

std::vector<StageTraceResult> collect_stage_traces(const PipelineSpec& victim,
                                                   const InputStreams& inputs,
                                                   const OnlineOptions& opts) {
  victim.validate();
  std::vector<std::string> order = victim.topo_order();
  std::vector<StageTraceResult> out;
  out.reserve(order.size());

  if (opts.mode == TraceMode::Simulated) {
    for (size_t i = 0; i < order.size(); ++i) {
      const StageSpec* st = victim.find_stage(order[i]);
      uint64_t seed = SplitMix64::mix(opts.seed, 1000003ULL * (i + 1) + 7);
      TimingTrace t = synth_stage_trace(*st, opts.model, opts.n_events, seed);
      out.push_back({order[i], std::move(t), 0});
    }
    return out;
  }

  RunOptions ro;
  ro.mode = RunOptions::Mode::Threaded;
  ro.buffer_capacity = opts.buffer_capacity;
  auto counter = make_hardware_counter();
  auto run = run_pipeline(victim, inputs, ro);
  std::vector<std::unique_ptr<StageObserver>> observers;
  observers.reserve(order.size());
  for (const auto& id : order)
    observers.push_back(std::make_unique<StageObserver>(*run, id, *counter));
  for (auto& o : observers) o->start();
  run->wait();
  for (size_t i = 0; i < order.size(); ++i) {
    ObserveResult r = observers[i]->stop_and_collect();
    out.push_back({order[i], std::move(r.trace), r.missed});
  }
  return out;
}

StagePrediction predict_stage(const OfflineArtifacts& art,
                              const TimingTrace& trace,
                              const OnlineOptions& opts,
                              const OperatorSpec& true_op) {
  FeatureRow row = featurize_trace(trace, opts.k, opts.trim_frac);
  StagePrediction p;
  p.stage_id = trace.stage;
  p.trace_len = trace.deltas.size();
  p.predicted = art.classifier.predict_label(row.values);
  p.confidence = art.classifier.confidence(row.values);
  OperatorKind reg_kind =
      opts.known_kind_regression ? true_op.kind : p.predicted;
  if (is_windowed(reg_kind)) {
    auto wi = art.w_regressors.find(reg_kind);
    auto si = art.s_regressors.find(reg_kind);
    if (wi != art.w_regressors.end() && si != art.s_regressors.end()) {
      long w = std::lround(wi->second.predict_value(row.values));
      long s = std::lround(si->second.predict_value(row.values));
      if (w < 1) w = 1;
      if (s < 1) s = 1;
      if (s > w) s = w;
      p.window = WindowParams{uint32_t(w), uint32_t(s)};
    }
  }
  return p;
}

double delta_cv(const std::vector<uint64_t>& deltas) {
  if (deltas.empty()) return 0;
  double mean = 0;
  for (uint64_t d : deltas) mean += double(d);
  mean /= double(deltas.size());
  if (mean <= 0) return 0;
  double var = 0;
  for (uint64_t d : deltas) {
    double diff = double(d) - mean;
    var += diff * diff;
  }
  var /= double(deltas.size());
  return std::sqrt(var) / mean;
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

std::string pct(double frac) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", frac * 100.0);
  return buf;
}

}  // namespace

RecoveredQuery online_phase(const PipelineSpec& victim,
                            const InputStreams& inputs,
                            const OfflineArtifacts& artifacts,
                            const OnlineOptions& opts) {
  if (artifacts.classifier.tree_groups.empty())
    throw InvalidModel("online phase needs a trained classifier");
  auto traces = collect_stage_traces(victim, inputs, opts);
  RecoveredQuery rq;
  rq.dag = victim;
  for (auto& tr : traces) {
    const StageSpec* st = victim.find_stage(tr.stage_id);
    StagePrediction p = predict_stage(artifacts, tr.trace, opts, st->op);
    p.stage_id = tr.stage_id;
    p.missed = tr.missed;
    StageSpec* dst = rq.dag.find_stage(tr.stage_id);
    OperatorSpec recovered;
    recovered.kind = p.predicted;
    if (p.window) {
      recovered.window_size = p.window->w;
      recovered.slide = p.window->s;
    }
    dst->op = recovered;
    dst->pad_target = 0;
    dst->batch = 1;
    rq.stages.push_back(std::move(p));
  }
  return rq;
}

double qrsr(const std::vector<double>& accuracies) {
  double product = 1.0;
  for (double a : accuracies) {
    if (!(a >= 0.0 && a <= 1.0))
      throw Error("accuracy outside [0, 1] in recovery rate");
    product *= a;
  }
  return product;
}

std::string qrsr_report_to_json(const QrsrReport& r) {
  json ops = json::array();
  for (const auto& o : r.operators)
    ops.push_back({{"query", o.query},
                   {"stage", o.stage},
                   {"operator", kind_name(o.label)},
                   {"n_test", o.n_test},
                   {"n_correct", o.n_correct},
                   {"accuracy", o.accuracy}});
  json j;
  j["setting"] = r.setting;
  j["model"] = r.model_id;
  j["query"] = r.query;
  j["operators"] = ops;
  j["qrsr"] = r.qrsr;
  j["exclusions"] = r.exclusions;
  return j.dump(2);
}

std::string qrsr_table_csv(const std::vector<QrsrReport>& reports) {
  std::string out =
      "query,operator,stage,no_samples,correctly_predicted,pct,qrsr_pct\n";
  for (const auto& r : reports) {
    for (const auto& o : r.operators) {
      out += r.query;
      out += ',';
      out += kind_name(o.label);
      out += ',';
      out += o.stage;
      out += ',';
      out += std::to_string(o.n_test);
      out += ',';
      out += std::to_string(o.n_correct);
      out += ',';
      out += pct(o.accuracy);
      out += ',';
      out += pct(r.qrsr);
      out += '\n';
    }
  }
  return out;
}

namespace {

// Shared scoring loop for both evaluation settings: group test rows by
// (query, stage) in first-appearance order and count correct predictions.
struct GroupedScores {
  std::vector<OperatorScore> groups;
  std::vector<std::string> query_order;
};

GroupedScores score_groups(const TrainedModel& clf, const Dataset& test) {
  GroupedScores out;
  std::map<std::pair<std::string, std::string>, size_t> index;
  for (const auto& row : test.rows) {
    if (!row.label) throw MissingLabel("test row lacks an operator label");
    auto key = std::make_pair(row.query, row.stage);
    auto it = index.find(key);
    size_t gi;
    if (it == index.end()) {
      gi = out.groups.size();
      index.emplace(key, gi);
      OperatorScore s;
      s.query = row.query;
      s.stage = row.stage;
      s.label = *row.label;
      out.groups.push_back(s);
      if (std::find(out.query_order.begin(), out.query_order.end(),
                    row.query) == out.query_order.end())
        out.query_order.push_back(row.query);
    } else {
      gi = it->second;
    }
    ++out.groups[gi].n_test;
    if (clf.predict_label(row.values) == *row.label)
      ++out.groups[gi].n_correct;
  }
  for (auto& g : out.groups)
    g.accuracy = g.n_test ? double(g.n_correct) / double(g.n_test) : 0.0;
  return out;
}

size_t count_queries(const Dataset& ds) {
  std::set<std::string> qs;
  for (const auto& row : ds.rows) qs.insert(row.query);
  return qs.size();
}

}  // namespace

Setting1Result evaluate_setting1(const Dataset& ds, ModelFamily family,
                                 const ParamGrid& grid, uint64_t seed,
                                 double train_frac, int folds) {
  if (count_queries(ds) < 2)
    throw DegenerateData("even-split evaluation needs at least two queries");
  SplitResult sp = split_even(ds, train_frac, seed);
  Setting1Result res;
  res.search = grid_search(sp.train, family, grid, folds, seed);
  res.classifier = fit(sp.train, res.search.best);
  res.overall = evaluate(res.classifier, sp.test);
  GroupedScores gs = score_groups(res.classifier, sp.test);
  for (const auto& q : gs.query_order) {
    QrsrReport r;
    r.setting = "even_split";
    r.model_id = res.search.best.describe();
    r.query = q;
    std::vector<double> accs;
    for (const auto& g : gs.groups) {
      if (g.query != q) continue;
      r.operators.push_back(g);
      accs.push_back(g.accuracy);
    }
    r.qrsr = qrsr(accs);
    res.reports.push_back(std::move(r));
  }
  return res;
}

Setting2Result evaluate_setting2(const Dataset& ds, ModelFamily family,
                                 const ParamGrid& grid, uint64_t seed,
                                 int folds) {
  std::vector<std::string> query_order;
  for (const auto& row : ds.rows)
    if (std::find(query_order.begin(), query_order.end(), row.query) ==
        query_order.end())
      query_order.push_back(row.query);
  if (query_order.size() < 2)
    throw DegenerateData("held-out evaluation needs at least two queries");

  Setting2Result res;
  for (const auto& q : query_order) {
    HoldoutResult h = leave_one_query_out(ds, q);
    std::set<OperatorKind> untrained(h.untrained_labels.begin(),
                                     h.untrained_labels.end());

    // Stages of the held-out query, in first-appearance order, with labels.
    std::vector<OperatorScore> stages;
    std::map<std::string, size_t> stage_index;
    for (const auto& row : h.test.rows) {
      if (!row.label) throw MissingLabel("test row lacks an operator label");
      if (stage_index.count(row.stage)) continue;
      stage_index.emplace(row.stage, stages.size());
      OperatorScore s;
      s.query = row.query;
      s.stage = row.stage;
      s.label = *row.label;
      stages.push_back(s);
    }

    std::vector<std::string> exclusions;
    bool any_scorable = false;
    for (const auto& s : stages) {
      if (untrained.count(s.label))
        exclusions.push_back(s.stage + ": operator " +
                             kind_name(s.label) +
                             " appears in no training query");
      else
        any_scorable = true;
    }
    if (!any_scorable) {
      res.excluded_queries.push_back(
          q + ": every operator is unique to this query");
      continue;
    }

    GridSearchResult search = grid_search(h.train, family, grid, folds, seed);
    TrainedModel clf = fit(h.train, search.best);
    for (const auto& row : h.test.rows) {
      OperatorScore& s = stages[stage_index.at(row.stage)];
      if (untrained.count(s.label)) continue;
      ++s.n_test;
      if (clf.predict_label(row.values) == *row.label) ++s.n_correct;
    }

    QrsrReport r;
    r.setting = "leave_one_query_out";
    r.model_id = search.best.describe();
    r.query = q;
    r.exclusions = std::move(exclusions);
    std::vector<double> accs;
    for (auto& s : stages) {
      if (untrained.count(s.label)) continue;
      s.accuracy = s.n_test ? double(s.n_correct) / double(s.n_test) : 0.0;
      r.operators.push_back(s);
      accs.push_back(s.accuracy);
    }
    r.qrsr = qrsr(accs);
    res.reports.push_back(std::move(r));
  }
  return res;
}

const char* mitigation_name(MitigationKind m) {
  switch (m) {
    case MitigationKind::Pad:
      return "pad";
    case MitigationKind::Fuse:
      return "fuse";
    case MitigationKind::Batch:
      return "batch";
  }
  return "pad";
}

MitigationKind mitigation_from_name(const std::string& name) {
  if (name == "pad") return MitigationKind::Pad;
  if (name == "fuse") return MitigationKind::Fuse;
  if (name == "batch") return MitigationKind::Batch;
  throw InvalidSpec("unknown mitigation: " + name);
}

PipelineSpec apply_mitigation(const PipelineSpec& victim, MitigationKind kind,
                              const MitigationParams& params) {
  victim.validate();
  switch (kind) {
    case MitigationKind::Pad: {
      if (params.pad_target == 0)
        throw InvalidSpec("pad mitigation needs a positive cycle budget");
      PipelineSpec spec = victim;
      for (const auto& st : victim.stages)
        spec = pad_stage(spec, st.id, params.pad_target);
      return spec;
    }
    case MitigationKind::Fuse: {
      std::vector<std::string> chain = params.fuse_chain;
      if (chain.empty()) chain = victim.topo_order();
      return fuse_stages(victim, chain);
    }
    case MitigationKind::Batch: {
      if (params.batch < 1)
        throw InvalidSpec("batch size must be at least 1");
      PipelineSpec spec = victim;
      if (params.batch == 1) return spec;
      for (const auto& st : victim.stages) {
        OperatorKind lead = st.op.kind == OperatorKind::Fused
                                ? st.op.fused_ops.front().kind
                                : st.op.kind;
        if (lead == OperatorKind::Join) continue;  // joins drain two sides
        spec = batch_stage(spec, st.id, params.batch);
      }
      return spec;
    }
  }
  throw InvalidSpec("unknown mitigation");
}

std::string mitigation_report_to_json(const MitigationReport& r) {
  json j;
  j["mitigation"] = mitigation_name(r.kind);
  j["params"] = r.params_desc;
  j["stages_before"] = r.stages_before;
  j["stages_after"] = r.stages_after;
  j["accuracy_before"] = r.accuracy_before;
  j["accuracy_after"] = r.accuracy_after;
  j["qrsr_before"] = r.qrsr_before;
  j["qrsr_after"] = r.qrsr_after;
  j["max_cv_before"] = r.max_cv_before;
  j["max_cv_after"] = r.max_cv_after;
  j["outputs_checked"] = r.outputs_checked;
  j["outputs_match"] = r.outputs_match;
  j["notes"] = r.notes;
  return j.dump(2);
}

namespace {

struct SideResult {
  double accuracy = 0;
  double qrsr_value = 1;
  double max_cv = 0;
};

SideResult observe_and_score(const PipelineSpec& spec,
                             const InputStreams& inputs,
                             const OfflineArtifacts& artifacts,
                             const OnlineOptions& opts, size_t reps) {
  std::vector<std::string> order = spec.topo_order();
  std::vector<uint64_t> correct(order.size(), 0);
  SideResult res;
  for (size_t rep = 0; rep < reps; ++rep) {
    OnlineOptions o = opts;
    o.seed = SplitMix64::mix(opts.seed, rep * 8191 + 3);
    auto traces = collect_stage_traces(spec, inputs, o);
    for (size_t i = 0; i < traces.size(); ++i) {
      const StageSpec* st = spec.find_stage(traces[i].stage_id);
      StagePrediction p = predict_stage(artifacts, traces[i].trace, o, st->op);
      if (p.predicted == st->op.kind) ++correct[i];
      res.max_cv = std::max(res.max_cv, delta_cv(traces[i].trace.deltas));
    }
  }
  uint64_t total_correct = 0;
  std::vector<double> accs;
  for (size_t i = 0; i < order.size(); ++i) {
    total_correct += correct[i];
    accs.push_back(double(correct[i]) / double(reps));
  }
  res.accuracy =
      order.empty() ? 0.0
                    : double(total_correct) / double(reps * order.size());
  res.qrsr_value = qrsr(accs);
  return res;
}

}  // namespace

MitigationReport evaluate_mitigation(const PipelineSpec& victim,
                                     MitigationKind kind,
                                     const MitigationParams& params,
                                     const OfflineArtifacts& artifacts,
                                     const InputStreams& inputs,
                                     const OnlineOptions& opts, size_t reps) {
  if (reps == 0) throw InvalidSpec("mitigation evaluation needs reps >= 1");
  victim.validate();
  PipelineSpec mitigated = apply_mitigation(victim, kind, params);

  MitigationReport rep;
  rep.kind = kind;
  switch (kind) {
    case MitigationKind::Pad:
      rep.params_desc = "pad_target=" + std::to_string(params.pad_target);
      break;
    case MitigationKind::Fuse: {
      rep.params_desc = "chain=";
      std::vector<std::string> chain = params.fuse_chain;
      if (chain.empty()) chain = victim.topo_order();
      for (size_t i = 0; i < chain.size(); ++i) {
        if (i) rep.params_desc += '+';
        rep.params_desc += chain[i];
      }
      break;
    }
    case MitigationKind::Batch:
      rep.params_desc = "batch=" + std::to_string(params.batch);
      break;
  }
  rep.stages_before = victim.stages.size();
  rep.stages_after = mitigated.stages.size();

  SideResult before = observe_and_score(victim, inputs, artifacts, opts, reps);
  SideResult after = observe_and_score(mitigated, inputs, artifacts, opts, reps);
  rep.accuracy_before = before.accuracy;
  rep.accuracy_after = after.accuracy;
  rep.qrsr_before = before.qrsr_value;
  rep.qrsr_after = after.qrsr_value;
  rep.max_cv_before = before.max_cv;
  rep.max_cv_after = after.max_cv;

  for (const auto& st : mitigated.stages)
    if (st.op.kind == OperatorKind::Fused)
      rep.notes.push_back("stage " + st.id + " fuses " +
                          std::to_string(st.op.fused_ops.size()) +
                          " operators; members are not separately observable");

  if (!inputs.empty()) {
    RunOptions ro;
    ro.mode = RunOptions::Mode::Deterministic;
    auto plain = run_pipeline(victim, inputs, ro);
    plain->wait();
    auto shaped = run_pipeline(mitigated, inputs, ro);
    shaped->wait();
    rep.outputs_checked = true;
    rep.outputs_match = victim.sinks.size() == mitigated.sinks.size();
    for (size_t i = 0; rep.outputs_match && i < victim.sinks.size(); ++i) {
      const auto& a = plain->sink_output(victim.sinks[i]);
      const auto& b = shaped->sink_output(mitigated.sinks[i]);
      if (a.size() != b.size()) {
        rep.outputs_match = false;
        break;
      }
      for (size_t r = 0; r < a.size(); ++r)
        if (!records_equal(a[r], b[r])) {
          rep.outputs_match = false;
          break;
        }
    }
  }
  return rep;
}

}  // namespace streamlab
