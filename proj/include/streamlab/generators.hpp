#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "streamlab/common.hpp"
#include "streamlab/operator_spec.hpp"

namespace streamlab {

enum class RateProfile { Uniform, Bursty };

// Workload generation is fully seeded: the same config always yields the
// same streams, byte for byte, on any platform.
struct GeneratorConfig {
  uint64_t seed = 42;
  // Auction-market stream sizes.
  uint64_t persons = 20000;
  uint64_t auctions = 60000;
  uint64_t bids = 920000;
  // Flight-record stream size.
  uint64_t flights = 100000;
  RateProfile rate = RateProfile::Uniform;
  // Flight delay sign mix.
  double flight_neg_frac = 0.25;
  double flight_zero_frac = 0.15;
  // Value ranges.
  int64_t price_min = 1;
  int64_t price_max = 10000;
  uint32_t categories = 20;
  uint32_t states = 50;
  std::string prng = "splitmix64";
};

struct MarketStreams {
  std::vector<EventRecord> persons;
  std::vector<EventRecord> auctions;
  std::vector<EventRecord> bids;
};

// Auction-market workload: persons (id, name, state, ts), auctions (id,
// seller, category, reserve, ts), bids (auction, bidder, price, ts).
// References always point at generated entities.
MarketStreams gen_nexmark(const GeneratorConfig& cfg);

// Flight-record workload: (flight_id, carrier_id, delay, ts) with the
// configured mix of negative, zero and positive delays.
std::vector<EventRecord> gen_flights(const GeneratorConfig& cfg);

struct SchemaField {
  enum Type { Int, Float, Str };
  std::string name;
  Type type;
};
using Schema = std::vector<SchemaField>;

struct SchemaSubset {
  Schema schema;
  std::vector<EventRecord> records;
};

// Random field-subset variants of a base schema, with records to match.
// Every variant keeps at least one field; draws are seeded.
std::vector<SchemaSubset> synth_schema_subsets(const Schema& base,
                                               uint64_t seed,
                                               size_t n_variants,
                                               size_t records_per_variant);

enum class QueryId {
  Q1 = 1,
  Q2 = 2,
  Q3 = 3,
  Q4 = 4,
  Q5 = 5,
  Q6 = 6,
  FlightStats = 7,
};

QueryId query_from_name(const std::string& name);
const char* query_name(QueryId q);

// Stage lists per query:
//   q1  map                              q4  join, max, average
//   q2  filter, map                      q5  count
//   q3  filter, filter, join, map        q6  join, filter, max, avg-partition
//   flight_stats  map, filter, reduce
// Windowed stages take the given parameters.
PipelineSpec catalog_query(QueryId q, uint32_t window_size = 16,
                           uint32_t slide = 4);

// Input stream names a catalog query reads, in binding order.
std::vector<std::string> catalog_inputs(QueryId q);

// Generates exactly the streams a catalog query reads.
std::map<std::string, std::vector<EventRecord>> catalog_streams(
    QueryId q, const GeneratorConfig& cfg);

}  // namespace streamlab
