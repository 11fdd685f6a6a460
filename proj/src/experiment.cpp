#include "streamlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "streamlab/crypto.hpp"
#include "streamlab/features.hpp"
#include "streamlab/pipeline.hpp"

namespace streamlab {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInput(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw Error("write failed: " + path);
}

void ExperimentConfig::validate() const {
  if (version != 1) throw InvalidSpec("unsupported config version");
  if (feature_k < 2) throw InvalidSpec("feature_k must be >= 2");
  if (!(trim_frac >= 0 && trim_frac < 0.5))
    throw InvalidSpec("trim_frac must be in [0, 0.5)");
  if (folds < 2) throw InvalidSpec("folds must be >= 2");
  if (!(train_frac > 0 && train_frac < 1))
    throw InvalidSpec("train_frac must sit inside (0, 1)");
  if (setting != "even_split" && setting != "leave_one_query_out")
    throw InvalidSpec("unknown evaluation setting: " + setting);
  if (grid != "full" && grid != "reduced" && grid != "single")
    throw InvalidSpec("unknown grid name: " + grid);
  if (window_size < 1) throw InvalidSpec("window_size must be >= 1");
  if (slide < 1 || slide > window_size)
    throw InvalidSpec("slide must be in [1, window_size]");
  if (n_events < 8) throw InvalidSpec("n_events must be >= 8");
  if (!(plan_scale > 0)) throw InvalidSpec("plan_scale must be positive");
  if (batch < 1) throw InvalidSpec("batch must be >= 1");
  if (out_dir.empty()) throw InvalidSpec("out_dir must not be empty");
  query_from_name(query);
  mitigation_from_name(mitigation);
  cost_model.validate();
  if (generator.prng != "splitmix64")
    throw InvalidSpec("unknown prng: " + generator.prng);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json g;
  g["seed"] = cfg.generator.seed;
  g["persons"] = cfg.generator.persons;
  g["auctions"] = cfg.generator.auctions;
  g["bids"] = cfg.generator.bids;
  g["flights"] = cfg.generator.flights;
  g["rate"] = cfg.generator.rate == RateProfile::Uniform ? "uniform" : "bursty";
  g["flight_neg_frac"] = cfg.generator.flight_neg_frac;
  g["flight_zero_frac"] = cfg.generator.flight_zero_frac;
  g["price_min"] = cfg.generator.price_min;
  g["price_max"] = cfg.generator.price_max;
  g["categories"] = cfg.generator.categories;
  g["states"] = cfg.generator.states;
  g["prng"] = cfg.generator.prng;

  json j;
  j["version"] = cfg.version;
  j["seed"] = cfg.seed;
  j["mode"] = mode_name(cfg.mode);
  j["generator"] = g;
  j["cost_model"] = json::parse(cost_model_to_json(cfg.cost_model));
  j["feature_k"] = cfg.feature_k;
  j["trim_frac"] = cfg.trim_frac;
  j["family"] = family_name(cfg.family);
  j["grid"] = cfg.grid;
  j["folds"] = cfg.folds;
  j["train_frac"] = cfg.train_frac;
  j["setting"] = cfg.setting;
  j["query"] = cfg.query;
  j["window_size"] = cfg.window_size;
  j["slide"] = cfg.slide;
  j["n_events"] = cfg.n_events;
  j["plan_scale"] = cfg.plan_scale;
  j["flight_plan"] = cfg.flight_plan;
  j["mitigation"] = cfg.mitigation;
  j["pad_target"] = cfg.pad_target;
  j["batch"] = cfg.batch;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("bad config json: ") + e.what());
  }
  static const char* known[] = {
      "version",  "seed",        "mode",     "generator",  "cost_model",
      "feature_k", "trim_frac",  "family",   "grid",       "folds",
      "train_frac", "setting",   "query",    "window_size", "slide",
      "n_events", "plan_scale",  "flight_plan", "mitigation", "pad_target",
      "batch",    "out_dir"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return key == k;
        }) == std::end(known))
      throw InvalidSpec("unknown config key: " + key);
  }
  ExperimentConfig cfg;
  try {
    cfg.version = j.value("version", cfg.version);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("mode")) cfg.mode = mode_from_name(j.at("mode"));
    if (j.contains("generator")) {
      const json& g = j.at("generator");
      static const char* gknown[] = {
          "seed",      "persons",        "auctions",        "bids",
          "flights",   "rate",           "flight_neg_frac", "flight_zero_frac",
          "price_min", "price_max",      "categories",      "states",
          "prng"};
      for (const auto& [key, value] : g.items()) {
        (void)value;
        if (std::find_if(std::begin(gknown), std::end(gknown),
                         [&](const char* k) { return key == k; }) ==
            std::end(gknown))
          throw InvalidSpec("unknown generator key: " + key);
      }
      cfg.generator.seed = g.value("seed", cfg.generator.seed);
      cfg.generator.persons = g.value("persons", cfg.generator.persons);
      cfg.generator.auctions = g.value("auctions", cfg.generator.auctions);
      cfg.generator.bids = g.value("bids", cfg.generator.bids);
      cfg.generator.flights = g.value("flights", cfg.generator.flights);
      if (g.contains("rate")) {
        std::string rate = g.at("rate");
        if (rate == "uniform")
          cfg.generator.rate = RateProfile::Uniform;
        else if (rate == "bursty")
          cfg.generator.rate = RateProfile::Bursty;
        else
          throw InvalidSpec("unknown rate profile: " + rate);
      }
      cfg.generator.flight_neg_frac =
          g.value("flight_neg_frac", cfg.generator.flight_neg_frac);
      cfg.generator.flight_zero_frac =
          g.value("flight_zero_frac", cfg.generator.flight_zero_frac);
      cfg.generator.price_min = g.value("price_min", cfg.generator.price_min);
      cfg.generator.price_max = g.value("price_max", cfg.generator.price_max);
      cfg.generator.categories =
          g.value("categories", cfg.generator.categories);
      cfg.generator.states = g.value("states", cfg.generator.states);
      cfg.generator.prng = g.value("prng", cfg.generator.prng);
    }
    if (j.contains("cost_model"))
      cfg.cost_model = cost_model_from_json(j.at("cost_model").dump());
    cfg.feature_k = j.value("feature_k", cfg.feature_k);
    cfg.trim_frac = j.value("trim_frac", cfg.trim_frac);
    if (j.contains("family")) cfg.family = family_from_name(j.at("family"));
    cfg.grid = j.value("grid", cfg.grid);
    cfg.folds = j.value("folds", cfg.folds);
    cfg.train_frac = j.value("train_frac", cfg.train_frac);
    cfg.setting = j.value("setting", cfg.setting);
    cfg.query = j.value("query", cfg.query);
    cfg.window_size = j.value("window_size", cfg.window_size);
    cfg.slide = j.value("slide", cfg.slide);
    cfg.n_events = j.value("n_events", cfg.n_events);
    cfg.plan_scale = j.value("plan_scale", cfg.plan_scale);
    cfg.flight_plan = j.value("flight_plan", cfg.flight_plan);
    cfg.mitigation = j.value("mitigation", cfg.mitigation);
    cfg.pad_target = j.value("pad_target", cfg.pad_target);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("bad config json: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ParamGrid resolve_grid(const ExperimentConfig& cfg) {
  if (cfg.grid == "full")
    return cfg.family == ModelFamily::RandomForest ? default_rf_grid()
                                                   : default_gbt_grid();
  ParamGrid g;
  if (cfg.family == ModelFamily::RandomForest) {
    g.n_estimators = {100};
    g.max_depth = cfg.grid == "reduced" ? std::vector<int>{0, 10}
                                        : std::vector<int>{0};
    g.max_features = {RfParams::MaxFeatures::Sqrt};
    g.bootstrap = {true};
    g.gamma = {0.0};
  } else {
    g.n_estimators = {100};
    g.max_depth = cfg.grid == "reduced" ? std::vector<int>{3, 6}
                                        : std::vector<int>{6};
    g.max_features = {RfParams::MaxFeatures::Sqrt};
    g.bootstrap = {true};
    g.gamma = {0.0};
  }
  return g;
}

std::vector<ProfilePlanEntry> resolve_plan(const ExperimentConfig& cfg) {
  std::vector<ProfilePlanEntry> plan = default_market_plan(cfg.plan_scale);
  if (cfg.flight_plan) {
    std::vector<ProfilePlanEntry> flights = default_flight_plan(cfg.plan_scale);
    plan.insert(plan.end(), flights.begin(), flights.end());
  }
  return plan;
}

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

ordered_json record_to_json(const EventRecord& r) {
  ordered_json fields = ordered_json::object();
  for (const auto& f : r.fields) {
    if (std::holds_alternative<int64_t>(f.value))
      fields[f.name] = std::get<int64_t>(f.value);
    else if (std::holds_alternative<double>(f.value))
      fields[f.name] = std::get<double>(f.value);
    else
      fields[f.name] = std::get<std::string>(f.value);
  }
  ordered_json j;
  j["seq"] = r.seq;
  j["schema"] = schema_name(r.schema);
  j["ts"] = r.ts;
  j["fields"] = fields;
  return j;
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw MissingInput(path);
}

json metrics_to_json(const Metrics& m) {
  json classes = json::array();
  for (OperatorKind k : m.classes) classes.push_back(kind_name(k));
  json j;
  j["accuracy"] = m.accuracy;
  j["macro_precision"] = m.macro_precision;
  j["macro_recall"] = m.macro_recall;
  j["macro_f1"] = m.macro_f1;
  j["classes"] = classes;
  j["confusion"] = m.confusion;
  j["has_unknown_row"] = m.has_unknown_row;
  return j;
}

Dataset load_features(const ExperimentConfig& cfg) {
  std::string path = join_path(cfg.out_dir, "features.csv");
  require_file(path);
  return read_dataset_csv(path);
}

OnlineOptions online_options(const ExperimentConfig& cfg) {
  OnlineOptions oo;
  oo.mode = cfg.mode;
  oo.n_events = cfg.n_events;
  oo.seed = SplitMix64::mix(cfg.seed, 0xA77ACC);
  oo.model = cfg.cost_model;
  oo.k = cfg.feature_k;
  oo.trim_frac = cfg.trim_frac;
  return oo;
}

ModelSpec regressor_spec(const ExperimentConfig& cfg) {
  ModelSpec rs;
  rs.family = cfg.family;
  rs.task = TaskType::Regression;
  rs.seed = SplitMix64::mix(cfg.seed, 0x5EED5);
  return rs;
}

}  // namespace

std::vector<std::string> cmd_generate(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  MarketStreams market = gen_nexmark(cfg.generator);
  std::vector<EventRecord> flights = gen_flights(cfg.generator);

  std::vector<std::pair<std::string, const std::vector<EventRecord>*>> files = {
      {"persons.jsonl", &market.persons},
      {"auctions.jsonl", &market.auctions},
      {"bids.jsonl", &market.bids},
      {"flights.jsonl", &flights},
  };

  std::vector<std::string> written;
  json manifest_files = json::array();
  for (const auto& [name, records] : files) {
    std::string path = join_path(cfg.out_dir, name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    Sha256Stream sha;
    for (const auto& r : *records) {
      std::string line = record_to_json(r).dump();
      line += '\n';
      sha.update(line);
      out << line;
    }
    out.flush();
    if (!out) throw Error("write failed: " + path);
    manifest_files.push_back({{"name", name},
                              {"records", records->size()},
                              {"sha256", sha.hex()}});
    written.push_back(path);
  }

  json manifest;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["files"] = manifest_files;
  std::string mpath = join_path(cfg.out_dir, "generate_manifest.json");
  write_text_file(mpath, manifest.dump(2));
  written.push_back(mpath);
  return written;
}

std::vector<std::string> cmd_profile(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  std::vector<ProfilePlanEntry> plan = resolve_plan(cfg);

  std::string path = join_path(cfg.out_dir, "traces.jsonl");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  Sha256Stream sha;
  size_t count = 0;
  for (size_t i = 0; i < plan.size(); ++i) {
    const ProfilePlanEntry& e = plan[i];
    ProfileOptions po;
    po.mode = cfg.mode;
    po.n_events = cfg.n_events;
    po.model = cfg.cost_model;
    po.query = e.query;
    po.stage = e.stage;
    po.seed = SplitMix64::mix(cfg.seed, 1000003ULL * (i + 1));
    profile_operator(e.op, po, e.reps, [&](TimingTrace&& t) {
      std::string line = trace_to_jsonl(t);
      line += '\n';
      sha.update(line);
      out << line;
      ++count;
    });
  }
  out.flush();
  if (!out) throw Error("write failed: " + path);

  json manifest;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["file"] = "traces.jsonl";
  manifest["n_traces"] = count;
  manifest["sha256"] = sha.hex();
  std::string mpath = join_path(cfg.out_dir, "profile_manifest.json");
  write_text_file(mpath, manifest.dump(2));
  return {path, mpath};
}

std::vector<std::string> cmd_featurize(const ExperimentConfig& cfg) {
  cfg.validate();
  std::string tpath = join_path(cfg.out_dir, "traces.jsonl");
  require_file(tpath);
  std::ifstream in(tpath);
  if (!in) throw MissingInput(tpath);

  Dataset ds;
  ds.k = cfg.feature_k;
  ds.trim_frac = cfg.trim_frac;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TimingTrace t = trace_from_jsonl(line);
    ds.rows.push_back(featurize_trace(t, cfg.feature_k, cfg.trim_frac));
  }

  std::string fpath = join_path(cfg.out_dir, "features.csv");
  write_dataset_csv(ds, fpath);

  json classes = json::array();
  for (OperatorKind k : ds.classes()) classes.push_back(kind_name(k));
  json manifest;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["file"] = "features.csv";
  manifest["rows"] = ds.rows.size();
  manifest["classes"] = classes;
  std::string mpath = join_path(cfg.out_dir, "featurize_manifest.json");
  write_text_file(mpath, manifest.dump(2));
  return {fpath, fpath + ".meta.json", mpath};
}

std::vector<std::string> cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  Dataset ds = load_features(cfg);
  ParamGrid grid = resolve_grid(cfg);

  OfflineArtifacts art;
  art.search = grid_search(ds, cfg.family, grid, cfg.folds, cfg.seed);
  art.classifier = fit(ds, art.search.best);
  RegressorBundle regs = fit_kind_regressors(ds, regressor_spec(cfg));
  art.w_regressors = std::move(regs.w);
  art.s_regressors = std::move(regs.s);

  std::string adir = join_path(cfg.out_dir, "artifacts");
  save_artifacts(art, adir);

  json cells = json::array();
  for (const auto& cell : art.search.table) {
    json c;
    c["config"] = cell.spec.describe();
    c["mean_score"] = cell.mean_score;
    c["fold_scores"] = cell.fold_scores;
    if (!cell.error.empty()) c["error"] = cell.error;
    cells.push_back(c);
  }
  json report;
  report["config"] = json::parse(config_to_json(cfg));
  report["best"] = art.search.best.describe();
  report["best_score"] = art.search.best_score;
  report["cells"] = cells;
  std::string rpath = join_path(cfg.out_dir, "cv_report.json");
  write_text_file(rpath, report.dump(2));

  std::vector<std::string> written = {adir + "/manifest.json",
                                      adir + "/classifier.json", rpath};
  return written;
}

std::vector<std::string> cmd_attack(const ExperimentConfig& cfg) {
  cfg.validate();
  std::string adir = join_path(cfg.out_dir, "artifacts");
  require_file(adir + "/manifest.json");
  OfflineArtifacts art = load_artifacts(adir);

  QueryId qid = query_from_name(cfg.query);
  PipelineSpec victim = catalog_query(qid, cfg.window_size, cfg.slide);
  InputStreams inputs;
  if (cfg.mode == TraceMode::Measured)
    inputs = catalog_streams(qid, cfg.generator);
  OnlineOptions oo = online_options(cfg);
  RecoveredQuery rq = online_phase(victim, inputs, art, oo);

  json stages = json::array();
  for (const auto& p : rq.stages) {
    json s;
    s["stage"] = p.stage_id;
    s["operator"] = kind_name(p.predicted);
    s["confidence"] = p.confidence;
    if (p.window) {
      s["window_size"] = p.window->w;
      s["slide"] = p.window->s;
    }
    s["missed"] = p.missed;
    s["trace_len"] = p.trace_len;
    stages.push_back(s);
  }
  json recovered;
  recovered["config"] = json::parse(config_to_json(cfg));
  recovered["query"] = cfg.query;
  recovered["stages"] = stages;
  recovered["dag"] = json::parse(pipeline_to_json(rq.dag));
  std::string rqpath = join_path(cfg.out_dir, "recovered_query.json");
  write_text_file(rqpath, recovered.dump(2));

  Dataset ds = load_features(cfg);
  ParamGrid grid = resolve_grid(cfg);
  std::vector<QrsrReport> reports;
  json extra;
  if (cfg.setting == "even_split") {
    Setting1Result res = evaluate_setting1(ds, cfg.family, grid, cfg.seed,
                                           cfg.train_frac, cfg.folds);
    reports = std::move(res.reports);
    json metrics;
    metrics["config"] = json::parse(config_to_json(cfg));
    metrics["metrics"] = metrics_to_json(res.overall);
    std::string mpath = join_path(cfg.out_dir, "attack_metrics.json");
    write_text_file(mpath, metrics.dump(2));
    extra["overall_accuracy"] = res.overall.accuracy;
  } else {
    Setting2Result res =
        evaluate_setting2(ds, cfg.family, grid, cfg.seed, cfg.folds);
    reports = std::move(res.reports);
    extra["excluded_queries"] = res.excluded_queries;
  }

  json rlist = json::array();
  for (const auto& r : reports) rlist.push_back(json::parse(qrsr_report_to_json(r)));
  json qj;
  qj["config"] = json::parse(config_to_json(cfg));
  qj["setting"] = cfg.setting;
  qj["reports"] = rlist;
  for (const auto& [key, value] : extra.items()) qj[key] = value;
  std::string qpath = join_path(cfg.out_dir, "qrsr_report.json");
  write_text_file(qpath, qj.dump(2));
  std::string cpath = join_path(cfg.out_dir, "qrsr_table.csv");
  write_text_file(cpath, qrsr_table_csv(reports));

  std::vector<std::string> written = {rqpath, qpath, cpath};
  if (cfg.setting == "even_split")
    written.push_back(join_path(cfg.out_dir, "attack_metrics.json"));
  return written;
}

std::vector<std::string> cmd_mitigate(const ExperimentConfig& cfg) {
  cfg.validate();
  std::string adir = join_path(cfg.out_dir, "artifacts");
  require_file(adir + "/manifest.json");
  OfflineArtifacts art = load_artifacts(adir);

  QueryId qid = query_from_name(cfg.query);
  PipelineSpec victim = catalog_query(qid, cfg.window_size, cfg.slide);
  InputStreams inputs = catalog_streams(qid, cfg.generator);
  MitigationKind kind = mitigation_from_name(cfg.mitigation);
  MitigationParams params;
  params.pad_target = cfg.pad_target;
  params.batch = cfg.batch;
  OnlineOptions oo = online_options(cfg);
  MitigationReport rep =
      evaluate_mitigation(victim, kind, params, art, inputs, oo);

  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["report"] = json::parse(mitigation_report_to_json(rep));
  std::string path = join_path(cfg.out_dir, "mitigation_report.json");
  write_text_file(path, j.dump(2));
  return {path};
}

std::vector<std::string> cmd_report(const ExperimentConfig& cfg) {
  cfg.validate();
  std::string tpath = join_path(cfg.out_dir, "traces.jsonl");
  require_file(tpath);
  std::ifstream in(tpath);
  if (!in) throw MissingInput(tpath);

  // Exact pooled delta histograms per operator kind.
  std::map<OperatorKind, std::map<uint64_t, uint64_t>> hist;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TimingTrace t = trace_from_jsonl(line);
    if (!t.label) continue;
    auto& h = hist[*t.label];
    for (uint64_t d : t.deltas) ++h[d];
  }
  if (hist.empty()) throw MissingInput(tpath + " holds no labeled traces");

  std::string curves = "operator,x,y\n";
  const size_t kPoints = 512;
  for (const auto& [kind, h] : hist) {
    uint64_t total = 0;
    for (const auto& [value, count] : h) total += count;
    size_t next = 0;
    uint64_t cum = 0;
    for (const auto& [value, count] : h) {
      cum += count;
      double y = double(cum) / double(total);
      bool emitted = false;
      while (next < kPoints && y >= double(next + 1) / double(kPoints)) {
        ++next;
        emitted = true;
      }
      if (emitted) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%llu,%.8f",
                      static_cast<unsigned long long>(value), y);
        curves += kind_name(kind);
        curves += ',';
        curves += buf;
        curves += '\n';
      }
    }
  }
  std::string cpath = join_path(cfg.out_dir, "cdf_curves.csv");
  write_text_file(cpath, curves);
  std::vector<std::string> written = {cpath};

  // Confusion matrix from the attack metrics, when present.
  std::string mpath = join_path(cfg.out_dir, "attack_metrics.json");
  bool confusion_written = false;
  if (fs::exists(mpath)) {
    json mj;
    try {
      mj = json::parse(read_text_file(mpath));
    } catch (const json::exception& e) {
      throw MalformedPayload(std::string("bad metrics json: ") + e.what());
    }
    const json& m = mj.at("metrics");
    std::vector<std::string> classes =
        m.at("classes").get<std::vector<std::string>>();
    auto confusion =
        m.at("confusion").get<std::vector<std::vector<uint64_t>>>();
    std::string csv = "label";
    for (const auto& c : classes) csv += "," + c;
    csv += '\n';
    for (size_t t = 0; t < confusion.size(); ++t) {
      csv += t < classes.size() ? classes[t] : std::string("other");
      for (uint64_t v : confusion[t]) csv += "," + std::to_string(v);
      csv += '\n';
    }
    std::string confpath = join_path(cfg.out_dir, "confusion.csv");
    write_text_file(confpath, csv);
    written.push_back(confpath);
    confusion_written = true;
  }

  json manifest;
  manifest["config"] = json::parse(config_to_json(cfg));
  manifest["cdf_curves"] = "cdf_curves.csv";
  manifest["confusion"] =
      confusion_written ? json("confusion.csv") : json(nullptr);
  std::string mfpath = join_path(cfg.out_dir, "report_manifest.json");
  write_text_file(mfpath, manifest.dump(2));
  written.push_back(mfpath);
  return written;
}

}  // namespace streamlab
