#include "streamlab/generators.hpp"

namespace streamlab {

namespace {

int64_t next_ts(SplitMix64& rng, RateProfile rate, int64_t prev) {
  if (rate == RateProfile::Uniform) return prev + 1;
  // Bursty: mostly back to back, occasional quiet gaps.
  if (rng.bernoulli(0.08)) return prev + int64_t(rng.uniform_int(10, 100));
  return prev + int64_t(rng.uniform_int(0, 1));
}

}  // namespace

MarketStreams gen_nexmark(const GeneratorConfig& cfg) {
  if (cfg.prng != kPrngName)
    throw InvalidSpec("unsupported prng: " + cfg.prng);
  if (cfg.persons == 0 || cfg.auctions == 0)
    throw InvalidSpec("need at least one person and auction");
  MarketStreams out;
  out.persons.reserve(cfg.persons);
  out.auctions.reserve(cfg.auctions);
  out.bids.reserve(cfg.bids);

  SplitMix64 prng_p(SplitMix64::mix(cfg.seed, 1));
  int64_t ts = 0;
  for (uint64_t i = 0; i < cfg.persons; ++i) {
    EventRecord r;
    r.seq = i;
    r.schema = SchemaId::Person;
    ts = next_ts(prng_p, cfg.rate, ts);
    r.ts = ts;
    r.fields = {{"id", int64_t(i + 1)},
                {"name", "person-" + std::to_string(i + 1)},
                {"state", "S" + std::to_string(prng_p.uniform_int(0, cfg.states - 1))}};
    out.persons.push_back(std::move(r));
  }

  SplitMix64 prng_a(SplitMix64::mix(cfg.seed, 2));
  ts = 0;
  for (uint64_t i = 0; i < cfg.auctions; ++i) {
    EventRecord r;
    r.seq = i;
    r.schema = SchemaId::Auction;
    ts = next_ts(prng_a, cfg.rate, ts);
    r.ts = ts;
    r.fields = {{"id", int64_t(i + 1)},
                {"seller", int64_t(prng_a.uniform_int(1, cfg.persons))},
                {"category", int64_t(prng_a.uniform_int(0, cfg.categories - 1))},
                {"reserve", int64_t(prng_a.uniform_int(uint64_t(cfg.price_min),
                                                       uint64_t(cfg.price_max)))}};
    out.auctions.push_back(std::move(r));
  }

  SplitMix64 prng_b(SplitMix64::mix(cfg.seed, 3));
  ts = 0;
  for (uint64_t i = 0; i < cfg.bids; ++i) {
    EventRecord r;
    r.seq = i;
    r.schema = SchemaId::Bid;
    ts = next_ts(prng_b, cfg.rate, ts);
    r.ts = ts;
    r.fields = {{"auction", int64_t(prng_b.uniform_int(1, cfg.auctions))},
                {"bidder", int64_t(prng_b.uniform_int(1, cfg.persons))},
                {"price", int64_t(prng_b.uniform_int(uint64_t(cfg.price_min),
                                                     uint64_t(cfg.price_max)))}};
    out.bids.push_back(std::move(r));
  }
  return out;
}

std::vector<EventRecord> gen_flights(const GeneratorConfig& cfg) {
  if (cfg.prng != kPrngName)
    throw InvalidSpec("unsupported prng: " + cfg.prng);
  if (cfg.flight_neg_frac + cfg.flight_zero_frac > 1.0)
    throw InvalidSpec("flight delay fractions exceed 1");
  std::vector<EventRecord> out;
  out.reserve(cfg.flights);
  SplitMix64 rng(SplitMix64::mix(cfg.seed, 4));
  int64_t ts = 0;
  for (uint64_t i = 0; i < cfg.flights; ++i) {
    EventRecord r;
    r.seq = i;
    r.schema = SchemaId::Flight;
    ts = next_ts(rng, cfg.rate, ts);
    r.ts = ts;
    double u = rng.uniform();
    int64_t delay;
    if (u < cfg.flight_neg_frac)
      delay = -int64_t(rng.uniform_int(1, 120));
    else if (u < cfg.flight_neg_frac + cfg.flight_zero_frac)
      delay = 0;
    else
      delay = int64_t(rng.uniform_int(1, 240));
    r.fields = {{"flight_id", int64_t(i + 1)},
                {"carrier_id", int64_t(rng.uniform_int(1, 50))},
                {"delay", delay}};
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SchemaSubset> synth_schema_subsets(const Schema& base,
                                               uint64_t seed,
                                               size_t n_variants,
                                               size_t records_per_variant) {
  if (base.empty()) throw InvalidSpec("base schema must have fields");
  std::vector<SchemaSubset> out;
  SplitMix64 rng(SplitMix64::mix(seed, 5));
  for (size_t v = 0; v < n_variants; ++v) {
    SchemaSubset subset;
    while (subset.schema.empty())
      for (const auto& f : base)
        if (rng.bernoulli(0.6)) subset.schema.push_back(f);
    for (size_t i = 0; i < records_per_variant; ++i) {
      EventRecord r;
      r.seq = i;
      r.schema = SchemaId::Derived;
      r.ts = int64_t(i);
      for (const auto& f : subset.schema) {
        switch (f.type) {
          case SchemaField::Int:
            r.fields.push_back({f.name, int64_t(rng.uniform_int(0, 1000))});
            break;
          case SchemaField::Float:
            r.fields.push_back({f.name, rng.uniform(0.0, 1000.0)});
            break;
          case SchemaField::Str:
            r.fields.push_back(
                {f.name, "s" + std::to_string(rng.uniform_int(0, 99))});
            break;
        }
      }
      subset.records.push_back(std::move(r));
    }
    out.push_back(std::move(subset));
  }
  return out;
}

QueryId query_from_name(const std::string& name) {
  if (name == "q1") return QueryId::Q1;
  if (name == "q2") return QueryId::Q2;
  if (name == "q3") return QueryId::Q3;
  if (name == "q4") return QueryId::Q4;
  if (name == "q5") return QueryId::Q5;
  if (name == "q6") return QueryId::Q6;
  if (name == "flight_stats") return QueryId::FlightStats;
  throw UnknownQuery(name);
}

const char* query_name(QueryId q) {
  switch (q) {
    case QueryId::Q1: return "q1";
    case QueryId::Q2: return "q2";
    case QueryId::Q3: return "q3";
    case QueryId::Q4: return "q4";
    case QueryId::Q5: return "q5";
    case QueryId::Q6: return "q6";
    case QueryId::FlightStats: return "flight_stats";
  }
  throw UnknownQuery("bad query id");
}

PipelineSpec catalog_query(QueryId q, uint32_t w, uint32_t s) {
  PipelineSpec p;
  auto stage = [&](const std::string& id, OperatorKind kind,
                   const std::string& expr, bool windowed = false,
                   const std::string& key = "") {
    StageSpec st;
    st.id = id;
    st.op.kind = kind;
    st.op.expr_id = expr;
    if (windowed) {
      st.op.window_size = w;
      st.op.slide = s;
    }
    st.op.key_field = key;
    p.stages.push_back(std::move(st));
  };
  switch (q) {
    case QueryId::Q1:
      stage("map", OperatorKind::Map, "scale:price:0.9");
      p.sources = {{"bids", "map"}};
      p.sinks = {"map"};
      break;
    case QueryId::Q2:
      stage("filter", OperatorKind::Filter, "range:auction:1:6000");
      stage("map", OperatorKind::Map, "project:auction,price");
      p.edges = {{"filter", "map"}};
      p.sources = {{"bids", "filter"}};
      p.sinks = {"map"};
      break;
    case QueryId::Q3:
      stage("filter_person", OperatorKind::Filter, "eq:state:S7");
      stage("filter_auction", OperatorKind::Filter, "eq:category:10");
      stage("join", OperatorKind::Join, "", true, "id=seller");
      stage("map", OperatorKind::Map, "project:name,reserve");
      p.edges = {{"filter_person", "join"},
                 {"filter_auction", "join"},
                 {"join", "map"}};
      p.sources = {{"persons", "filter_person"}, {"auctions", "filter_auction"}};
      p.sinks = {"map"};
      break;
    case QueryId::Q4:
      stage("join", OperatorKind::Join, "", true, "auction=id");
      stage("max", OperatorKind::Max, "field:price", true);
      stage("average", OperatorKind::Average, "field:value", true);
      p.edges = {{"join", "max"}, {"max", "average"}};
      p.sources = {{"bids", "join"}, {"auctions", "join"}};
      p.sinks = {"average"};
      break;
    case QueryId::Q5:
      stage("count", OperatorKind::Count, "", true);
      p.sources = {{"bids", "count"}};
      p.sinks = {"count"};
      break;
    case QueryId::Q6:
      stage("join", OperatorKind::Join, "", true, "auction=id");
      stage("filter", OperatorKind::Filter, "gt:price:5000");
      stage("max", OperatorKind::Max, "field:price", true);
      stage("avg_partition", OperatorKind::AveragePartition, "field:value",
            true, "seller");
      p.edges = {{"join", "filter"}, {"filter", "max"}, {"max", "avg_partition"}};
      p.sources = {{"bids", "join"}, {"auctions", "join"}};
      p.sinks = {"avg_partition"};
      break;
    case QueryId::FlightStats:
      stage("map", OperatorKind::Map, "project:carrier_id,delay");
      stage("filter", OperatorKind::Filter, "gt:delay:0");
      stage("reduce", OperatorKind::Reduce, "field:delay", true);
      p.edges = {{"map", "filter"}, {"filter", "reduce"}};
      p.sources = {{"flights", "map"}};
      p.sinks = {"reduce"};
      break;
  }
  p.validate();
  return p;
}

std::vector<std::string> catalog_inputs(QueryId q) {
  switch (q) {
    case QueryId::Q1:
    case QueryId::Q2:
    case QueryId::Q5: return {"bids"};
    case QueryId::Q3: return {"persons", "auctions"};
    case QueryId::Q4:
    case QueryId::Q6: return {"bids", "auctions"};
    case QueryId::FlightStats: return {"flights"};
  }
  throw UnknownQuery("bad query id");
}

std::map<std::string, std::vector<EventRecord>> catalog_streams(
    QueryId q, const GeneratorConfig& cfg) {
  std::map<std::string, std::vector<EventRecord>> out;
  auto needs = catalog_inputs(q);
  bool market = false;
  for (const auto& n : needs) market |= n != "flights";
  if (market) {
    MarketStreams m = gen_nexmark(cfg);
    for (const auto& n : needs) {
      if (n == "persons") out["persons"] = std::move(m.persons);
      if (n == "auctions") out["auctions"] = std::move(m.auctions);
      if (n == "bids") out["bids"] = std::move(m.bids);
    }
  }
  for (const auto& n : needs)
    if (n == "flights") out["flights"] = gen_flights(cfg);
  return out;
}

}  // namespace streamlab
