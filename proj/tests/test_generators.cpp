#include <set>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "streamlab/generators.hpp"

using namespace streamlab;

namespace {

GeneratorConfig tiny_config() {
  GeneratorConfig cfg;
  cfg.seed = 99;
  cfg.persons = 50;
  cfg.auctions = 70;
  cfg.bids = 400;
  cfg.flights = 1000;
  return cfg;
}

}  // namespace

TEST_CASE("market generation is deterministic in the seed") {
  GeneratorConfig cfg = tiny_config();
  MarketStreams a = gen_nexmark(cfg);
  MarketStreams b = gen_nexmark(cfg);
  CHECK(oracle::outputs_equal(a.persons, b.persons));
  CHECK(oracle::outputs_equal(a.auctions, b.auctions));
  CHECK(oracle::outputs_equal(a.bids, b.bids));

  cfg.seed = 100;
  MarketStreams c = gen_nexmark(cfg);
  CHECK_FALSE(oracle::outputs_equal(a.bids, c.bids));
}

TEST_CASE("market streams have the configured sizes") {
  GeneratorConfig cfg = tiny_config();
  MarketStreams s = gen_nexmark(cfg);
  CHECK(s.persons.size() == cfg.persons);
  CHECK(s.auctions.size() == cfg.auctions);
  CHECK(s.bids.size() == cfg.bids);
}

TEST_CASE("references always point at generated entities") {
  GeneratorConfig cfg = tiny_config();
  MarketStreams s = gen_nexmark(cfg);
  std::set<int64_t> person_ids, auction_ids;
  for (const auto& p : s.persons)
    person_ids.insert(std::get<int64_t>(p.get("id")));
  for (const auto& a : s.auctions) {
    auction_ids.insert(std::get<int64_t>(a.get("id")));
    CHECK(person_ids.count(std::get<int64_t>(a.get("seller"))) == 1);
  }
  for (const auto& b : s.bids) {
    CHECK(auction_ids.count(std::get<int64_t>(b.get("auction"))) == 1);
    CHECK(person_ids.count(std::get<int64_t>(b.get("bidder"))) == 1);
  }
}

TEST_CASE("generated values respect configured ranges") {
  GeneratorConfig cfg = tiny_config();
  cfg.price_min = 10;
  cfg.price_max = 20;
  cfg.categories = 3;
  cfg.states = 4;
  MarketStreams s = gen_nexmark(cfg);
  for (const auto& b : s.bids) {
    int64_t price = std::get<int64_t>(b.get("price"));
    CHECK(price >= 10);
    CHECK(price <= 20);
  }
  for (const auto& a : s.auctions) {
    int64_t cat = std::get<int64_t>(a.get("category"));
    CHECK(cat >= 0);
    CHECK(cat < 3);
  }
  for (const auto& p : s.persons) {
    std::string st = std::get<std::string>(p.get("state"));
    CHECK(st.size() == 2);
    CHECK(st[0] == 'S');
    CHECK(st[1] >= '0');
    CHECK(st[1] <= '3');
  }
}

TEST_CASE("uniform rate ticks one per record, bursty rate gaps") {
  GeneratorConfig cfg = tiny_config();
  MarketStreams uniform = gen_nexmark(cfg);
  for (size_t i = 0; i < uniform.bids.size(); ++i)
    CHECK(uniform.bids[i].ts == int64_t(i + 1));

  cfg.rate = RateProfile::Bursty;
  MarketStreams bursty = gen_nexmark(cfg);
  bool gap = false;
  for (size_t i = 1; i < bursty.bids.size(); ++i) {
    CHECK(bursty.bids[i].ts >= bursty.bids[i - 1].ts);
    if (bursty.bids[i].ts - bursty.bids[i - 1].ts > 1) gap = true;
  }
  CHECK(gap);
}

TEST_CASE("flight delays follow the configured sign mix") {
  GeneratorConfig cfg = tiny_config();
  auto flights = gen_flights(cfg);
  REQUIRE(flights.size() == cfg.flights);
  size_t neg = 0, zero = 0, pos = 0;
  for (const auto& f : flights) {
    int64_t d = std::get<int64_t>(f.get("delay"));
    if (d < 0)
      ++neg;
    else if (d == 0)
      ++zero;
    else
      ++pos;
  }
  CHECK(double(neg) / double(cfg.flights) ==
        doctest::Approx(cfg.flight_neg_frac).epsilon(0.25));
  CHECK(double(zero) / double(cfg.flights) ==
        doctest::Approx(cfg.flight_zero_frac).epsilon(0.3));
  CHECK(pos > 0);

  GeneratorConfig bad = cfg;
  bad.flight_neg_frac = 0.7;
  bad.flight_zero_frac = 0.5;
  CHECK_THROWS_AS(gen_flights(bad), InvalidSpec);
}

TEST_CASE("an unsupported prng name is rejected") {
  GeneratorConfig cfg = tiny_config();
  cfg.prng = "mt19937";
  CHECK_THROWS_AS(gen_nexmark(cfg), InvalidSpec);
  CHECK_THROWS_AS(gen_flights(cfg), InvalidSpec);
}

TEST_CASE("schema subsets keep at least one base field") {
  Schema base = {{"a", SchemaField::Int},
                 {"b", SchemaField::Float},
                 {"c", SchemaField::Str}};
  auto subsets = synth_schema_subsets(base, 5, 20, 8);
  REQUIRE(subsets.size() == 20);
  for (const auto& sub : subsets) {
    CHECK(sub.schema.size() >= 1);
    CHECK(sub.schema.size() <= base.size());
    REQUIRE(sub.records.size() == 8);
    for (const auto& r : sub.records) {
      REQUIRE(r.fields.size() == sub.schema.size());
      for (size_t i = 0; i < sub.schema.size(); ++i)
        CHECK(r.fields[i].name == sub.schema[i].name);
    }
  }
  auto again = synth_schema_subsets(base, 5, 20, 8);
  CHECK(again[3].schema.size() == subsets[3].schema.size());
  CHECK(oracle::outputs_equal(again[3].records, subsets[3].records));
}

TEST_CASE("query names round trip and reject unknowns") {
  for (const char* name :
       {"q1", "q2", "q3", "q4", "q5", "q6", "flight_stats"})
    CHECK(query_name(query_from_name(name)) == std::string(name));
  CHECK_THROWS_AS(query_from_name("q7"), UnknownQuery);
}

TEST_CASE("catalog queries have the documented stage kinds") {
  auto kinds_of = [](QueryId q) {
    std::vector<OperatorKind> kinds;
    PipelineSpec p = catalog_query(q);
    p.validate();
    for (const auto& id : p.topo_order())
      kinds.push_back(p.find_stage(id)->op.kind);
    return kinds;
  };
  CHECK(kinds_of(QueryId::Q1) == std::vector<OperatorKind>{OperatorKind::Map});
  CHECK(kinds_of(QueryId::Q2) ==
        std::vector<OperatorKind>{OperatorKind::Filter, OperatorKind::Map});
  CHECK(kinds_of(QueryId::Q3) ==
        std::vector<OperatorKind>{OperatorKind::Filter, OperatorKind::Filter,
                                  OperatorKind::Join, OperatorKind::Map});
  CHECK(kinds_of(QueryId::Q4) ==
        std::vector<OperatorKind>{OperatorKind::Join, OperatorKind::Max,
                                  OperatorKind::Average});
  CHECK(kinds_of(QueryId::Q5) ==
        std::vector<OperatorKind>{OperatorKind::Count});
  CHECK(kinds_of(QueryId::Q6) ==
        std::vector<OperatorKind>{OperatorKind::Join, OperatorKind::Filter,
                                  OperatorKind::Max,
                                  OperatorKind::AveragePartition});
  CHECK(kinds_of(QueryId::FlightStats) ==
        std::vector<OperatorKind>{OperatorKind::Map, OperatorKind::Filter,
                                  OperatorKind::Reduce});
}

TEST_CASE("catalog windowed stages take the requested parameters") {
  PipelineSpec p = catalog_query(QueryId::Q4, 32, 8);
  CHECK(p.find_stage("join")->op.window_size == 32);
  CHECK(p.find_stage("join")->op.slide == 8);
  CHECK(p.find_stage("max")->op.window_size == 32);
  CHECK(p.find_stage("average")->op.slide == 8);
  CHECK(p.find_stage("join")->op.key_field == "auction=id");
}

TEST_CASE("catalog streams cover exactly the query's inputs") {
  GeneratorConfig cfg = tiny_config();
  for (QueryId q : {QueryId::Q1, QueryId::Q3, QueryId::Q4,
                    QueryId::FlightStats}) {
    auto names = catalog_inputs(q);
    auto streams = catalog_streams(q, cfg);
    REQUIRE(streams.size() == names.size());
    for (const auto& n : names) {
      REQUIRE(streams.count(n) == 1);
      CHECK_FALSE(streams.at(n).empty());
    }
  }
  CHECK(catalog_inputs(QueryId::Q3) ==
        std::vector<std::string>{"persons", "auctions"});
  CHECK(catalog_inputs(QueryId::Q4) ==
        std::vector<std::string>{"bids", "auctions"});
}
