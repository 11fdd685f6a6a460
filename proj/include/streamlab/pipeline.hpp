#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "streamlab/crypto.hpp"
#include "streamlab/operator_spec.hpp"
#include "streamlab/ring_buffer.hpp"
#include "streamlab/timing.hpp"

namespace streamlab {

using InputStreams = std::map<std::string, std::vector<EventRecord>>;

struct RunOptions {
  enum class Mode { Threaded, Deterministic };
  Mode mode = Mode::Threaded;
  size_t buffer_capacity = 1024;
  std::array<uint8_t, 16> key = kDefaultKey;
  // Threaded mode aborts with PipelineStall when no record moves for this
  // long.
  uint64_t stall_timeout_ms = 20000;
  // Cycle source for pad_target busy-waits. Hardware counter when null.
  CycleCounter* pad_counter = nullptr;
};

// One pipeline execution. Every record crosses each stage boundary sealed:
// sources encrypt, a stage decrypts what it pops, applies its operator and
// re-encrypts what it emits, sinks decrypt. Each buffer has one producer and
// one consumer; consumer counters stay visible to outside readers while the
// run is live, which is exactly the surface a boundary observer uses.
//
// Threaded mode runs each stage, source and router on its own thread.
// Deterministic mode runs the same per-task step functions round robin on
// the calling thread, so both modes produce identical outputs.
class PipelineRun {
 public:
  virtual ~PipelineRun() = default;

  // Input buffers of a stage, in binding order (sources first, then edges,
  // both in spec order). Join reads input 0 as its left side.
  virtual size_t input_count(const std::string& stage_id) const = 0;
  virtual const RingBuffer<Ciphertext>& input_buffer(const std::string& stage_id,
                                                     size_t input) const = 0;

  // Blocks until the run completes, then rethrows the first stage failure if
  // any. Deterministic runs complete before run_pipeline returns, so wait
  // only rethrows.
  virtual void wait() = 0;
  virtual bool finished() const = 0;

  // Decrypted records collected at a sink, in arrival order. Only valid
  // after wait().
  virtual const std::vector<EventRecord>& sink_output(
      const std::string& stage_id) const = 0;
};

std::unique_ptr<PipelineRun> run_pipeline(const PipelineSpec& spec,
                                          const InputStreams& inputs,
                                          const RunOptions& opts = {});

}  // namespace streamlab
