#pragma once

#include <memory>
#include <vector>

#include "streamlab/common.hpp"
#include "streamlab/operator_spec.hpp"

namespace streamlab {

// Incremental execution state for one stage. Stateless kinds keep nothing;
// windowed kinds buffer up to window_size records per window (per key for
// the keyed kinds, per side for join).
//
// Aggregate emissions copy the record that completed the window, switch its
// schema to derived, renumber seq with a per-stage emission counter and set
// field "value" to the aggregate. Join emissions merge the two sides' fields
// (right-side names get a "_r" suffix on collision).
class OperatorState {
 public:
  virtual ~OperatorState() = default;

  // Feeds one record on the given input (join: 0 left, 1 right; all other
  // kinds use input 0) and returns the records emitted, in order.
  virtual std::vector<EventRecord> on_record(const EventRecord& rec,
                                             int input) = 0;

  // Which input the stage must consume next. Join alternates by buffered
  // counts so its consumption order depends only on the input streams, never
  // on thread timing. Single-input kinds always return 0.
  virtual int wants_input() const { return 0; }

  // Driver marks an input stream exhausted so wants_input can fall back to
  // the other side.
  virtual void input_closed(int input) { (void)input; }

  static std::unique_ptr<OperatorState> make(const OperatorSpec& spec);
};

// Convenience wrapper used by single-record callers.
std::vector<EventRecord> apply_operator(OperatorState& state,
                                        const EventRecord& rec,
                                        int input = 0);

// Runs one operator over whole input streams in the documented consumption
// order and returns everything it emits. Join takes two streams; the rest
// take one.
std::vector<EventRecord> run_operator(const OperatorSpec& spec,
                                      const std::vector<std::vector<EventRecord>>& inputs);

}  // namespace streamlab
