#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "streamlab/attack.hpp"
#include "streamlab/features.hpp"
#include "streamlab/generators.hpp"
#include "streamlab/models.hpp"
#include "streamlab/observer.hpp"
#include "streamlab/pipeline.hpp"

namespace py = pybind11;

namespace {

using namespace streamlab;

py::dict record_to_dict(const EventRecord& r) {
  py::dict fields;
  for (const auto& f : r.fields) {
    if (std::holds_alternative<int64_t>(f.value))
      fields[py::str(f.name)] = std::get<int64_t>(f.value);
    else if (std::holds_alternative<double>(f.value))
      fields[py::str(f.name)] = std::get<double>(f.value);
    else
      fields[py::str(f.name)] = std::get<std::string>(f.value);
  }
  py::dict d;
  d["seq"] = r.seq;
  d["schema"] = schema_name(r.schema);
  d["ts"] = r.ts;
  d["fields"] = fields;
  return d;
}

SchemaId schema_from_name(const std::string& name) {
  for (SchemaId id : {SchemaId::Person, SchemaId::Auction, SchemaId::Bid,
                      SchemaId::Flight, SchemaId::Derived})
    if (name == schema_name(id)) return id;
  throw InvalidSpec("unknown schema: " + name);
}

EventRecord record_from_dict(const py::dict& d) {
  EventRecord r;
  r.seq = d["seq"].cast<uint64_t>();
  r.schema = schema_from_name(d["schema"].cast<std::string>());
  r.ts = d["ts"].cast<int64_t>();
  for (auto item : d["fields"].cast<py::dict>()) {
    Field f;
    f.name = item.first.cast<std::string>();
    py::handle v = item.second;
    if (py::isinstance<py::int_>(v))
      f.value = v.cast<int64_t>();
    else if (py::isinstance<py::float_>(v))
      f.value = v.cast<double>();
    else
      f.value = v.cast<std::string>();
    r.fields.push_back(std::move(f));
  }
  return r;
}

py::list records_to_list(const std::vector<EventRecord>& recs) {
  py::list out;
  for (const auto& r : recs) out.append(record_to_dict(r));
  return out;
}

std::vector<EventRecord> records_from_list(const py::list& l) {
  std::vector<EventRecord> out;
  out.reserve(l.size());
  for (auto item : l) out.push_back(record_from_dict(item.cast<py::dict>()));
  return out;
}

py::dict py_generate(uint64_t seed, uint64_t persons, uint64_t auctions,
                     uint64_t bids) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.persons = persons;
  cfg.auctions = auctions;
  cfg.bids = bids;
  MarketStreams ms = gen_nexmark(cfg);
  py::dict d;
  d["persons"] = records_to_list(ms.persons);
  d["auctions"] = records_to_list(ms.auctions);
  d["bids"] = records_to_list(ms.bids);
  return d;
}

py::list py_flights(uint64_t seed, uint64_t n) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.flights = n;
  return records_to_list(gen_flights(cfg));
}

py::list py_queries() {
  py::list out;
  for (QueryId q : {QueryId::Q1, QueryId::Q2, QueryId::Q3, QueryId::Q4,
                    QueryId::Q5, QueryId::Q6, QueryId::FlightStats})
    out.append(std::string(query_name(q)));
  return out;
}

py::list py_query_stages(const std::string& name, uint32_t w, uint32_t s) {
  PipelineSpec spec = catalog_query(query_from_name(name), w, s);
  py::list out;
  for (const auto& id : spec.topo_order()) {
    const StageSpec* st = spec.find_stage(id);
    out.append(py::make_tuple(id, std::string(kind_name(st->op.kind))));
  }
  return out;
}

py::dict py_run_query(const std::string& name, const py::dict& inputs,
                      uint32_t w, uint32_t s, const std::string& mode) {
  PipelineSpec spec = catalog_query(query_from_name(name), w, s);
  InputStreams streams;
  for (auto item : inputs)
    streams[item.first.cast<std::string>()] =
        records_from_list(item.second.cast<py::list>());
  RunOptions opts;
  if (mode == "deterministic")
    opts.mode = RunOptions::Mode::Deterministic;
  else if (mode == "threaded")
    opts.mode = RunOptions::Mode::Threaded;
  else
    throw InvalidSpec("unknown run mode: " + mode);
  auto run = run_pipeline(spec, streams, opts);
  run->wait();
  py::dict out;
  for (const auto& sink : spec.sinks)
    out[py::str(sink)] = records_to_list(run->sink_output(sink));
  return out;
}

std::vector<uint64_t> py_synth_trace(const std::string& kind, size_t n,
                                     uint64_t seed, uint32_t w, uint32_t s) {
  OperatorSpec op;
  op.kind = kind_from_name(kind);
  op.window_size = w;
  op.slide = s;
  if (is_windowed(op.kind) && (w < 1 || s < 1 || s > w))
    throw InvalidSpec("windowed kinds need 1 <= slide <= window_size");
  return synth_trace(op, CostModel::defaults(), n, seed).deltas;
}

std::string py_train_classifier(const std::vector<std::vector<double>>& rows,
                                const std::vector<std::string>& labels,
                                int n_estimators, uint64_t seed) {
  if (rows.size() != labels.size())
    throw DimensionMismatch("rows and labels differ in length");
  Dataset ds;
  ds.k = rows.empty() ? 0 : rows.front().size();
  for (size_t i = 0; i < rows.size(); ++i) {
    FeatureRow r;
    r.values = rows[i];
    r.label = kind_from_name(labels[i]);
    ds.rows.push_back(std::move(r));
  }
  ModelSpec spec;
  spec.family = ModelFamily::RandomForest;
  spec.rf.n_estimators = n_estimators;
  spec.seed = seed;
  return model_to_json(fit(ds, spec));
}

std::vector<std::string> py_predict(const std::string& model_json,
                                    const std::vector<std::vector<double>>& rows) {
  TrainedModel model = model_from_json(model_json);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& row : rows)
    out.push_back(kind_name(model.predict_label(row)));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Sealed stream-processing lab: engine, timing observation, trace "
      "classification and mitigations";
  m.attr("__version__") = "0.1.0";

  py::register_exception<Error>(m, "StreamLabError");

  m.def("generate", &py_generate, py::arg("seed") = 42,
        py::arg("persons") = 100, py::arg("auctions") = 300,
        py::arg("bids") = 1000,
        "Generate the auction-market streams as lists of record dicts");
  m.def("flights", &py_flights, py::arg("seed") = 42, py::arg("n") = 100,
        "Generate the flight-record stream");
  m.def("queries", &py_queries, "Names of the built-in catalog queries");
  m.def("query_stages", &py_query_stages, py::arg("name"),
        py::arg("window_size") = 16, py::arg("slide") = 4,
        "Stage ids and operator kinds of a catalog query, in topological "
        "order");
  m.def("run_query", &py_run_query, py::arg("name"), py::arg("inputs"),
        py::arg("window_size") = 16, py::arg("slide") = 4,
        py::arg("mode") = "deterministic",
        "Run a catalog query over record-dict streams and return each "
        "sink's output");
  m.def("synth_trace", &py_synth_trace, py::arg("kind"), py::arg("n") = 1000,
        py::arg("seed") = 42, py::arg("window_size") = 16, py::arg("slide") = 4,
        "Synthesize one operator's per-record cost trace from the default "
        "cost model");
  m.def("trim_trace", &trim_trace, py::arg("deltas"), py::arg("frac") = 0.05,
        "Drop a fraction of deltas from each end of a trace");
  m.def("cdf_features", &cdf_features, py::arg("deltas"), py::arg("k") = 1024,
        "Quantile sample of a trace's sorted deltas");
  m.def("qrsr", &qrsr, py::arg("accuracies"),
        "Query recovery success rate: product of per-operator accuracies");
  m.def("train_classifier", &py_train_classifier, py::arg("rows"),
        py::arg("labels"), py::arg("n_estimators") = 50, py::arg("seed") = 7,
        "Fit a random-forest operator classifier; returns the model as JSON");
  m.def("predict", &py_predict, py::arg("model_json"), py::arg("rows"),
        "Predict operator kinds with a JSON-serialized model");
}
