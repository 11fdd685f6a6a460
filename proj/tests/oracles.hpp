#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streamlab/common.hpp"
#include "streamlab/operator_spec.hpp"

// Brute-force reference implementations the tests compare the library
// against. Everything here materializes windows explicitly from index
// arithmetic, so a bug in the streaming operators cannot hide in a shared
// code path.
namespace oracle {

// Number of complete windows a count-based slide produces over n records:
// window i covers records [i*s, i*s + w).
size_t n_windows(size_t n, uint32_t w, uint32_t s);

// Expected emissions of an unkeyed windowed aggregate (Max, Average, Count,
// Reduce) over one input stream. Each emission copies the record that closed
// its window, switches the schema to derived, numbers emissions from zero
// and stores the aggregate under "value".
std::vector<streamlab::EventRecord> agg_emissions(
    streamlab::OperatorKind kind, const std::string& field,
    const std::vector<streamlab::EventRecord>& input, uint32_t w, uint32_t s);

// Keyed variant: windows form per key-field value over that key's
// subsequence; emissions order by the stream position of each window's
// closing record and share one emission counter.
std::vector<streamlab::EventRecord> keyed_agg_emissions(
    streamlab::OperatorKind kind, const std::string& field,
    const std::string& key_field,
    const std::vector<streamlab::EventRecord>& input, uint32_t w, uint32_t s);

// Two-sided windowed equi-join: batch i pairs left records [i*s, i*s+w)
// with right records [i*s, i*s+w); key-equal pairs emit left-major. Merged
// records take the left fields, then the right fields with "_r" appended to
// a clashing name, the max timestamp and a running emission number.
std::vector<streamlab::EventRecord> join_emissions(
    const std::string& left_key, const std::string& right_key,
    const std::vector<streamlab::EventRecord>& left,
    const std::vector<streamlab::EventRecord>& right, uint32_t w, uint32_t s);

// Closed-form featurizer references: drop floor(frac*n) from each end, and
// read sorted[j*(n-1)/(k-1)] for j in [0, k).
std::vector<uint64_t> trim_reference(const std::vector<uint64_t>& xs,
                                     double frac);
std::vector<double> cdf_reference(std::vector<uint64_t> xs, size_t k);

// Field-by-field equality, numeric across int/float.
bool records_equal(const streamlab::EventRecord& a,
                   const streamlab::EventRecord& b);
bool outputs_equal(const std::vector<streamlab::EventRecord>& a,
                   const std::vector<streamlab::EventRecord>& b);

}  // namespace oracle
