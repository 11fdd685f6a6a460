#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "streamlab/common.hpp"

namespace streamlab {

enum class OperatorKind : uint8_t {
  Map = 0,
  Filter = 1,
  Join = 2,
  Max = 3,
  Average = 4,
  AveragePartition = 5,
  Count = 6,
  Reduce = 7,
  Fused = 8,
};

const char* kind_name(OperatorKind k);
OperatorKind kind_from_name(const std::string& name);

// True for kinds that buffer a count-based window.
bool is_windowed(OperatorKind k);

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Map;
  std::string expr_id;
  uint32_t window_size = 0;
  uint32_t slide = 0;
  std::string key_field;
  // Populated only for Fused: the original chain, first to last.
  std::vector<OperatorSpec> fused_ops;
};

struct StageSpec {
  std::string id;
  OperatorSpec op;
  // Mitigation knobs. pad_target is a cycle budget per record (0 disables);
  // batch > 1 drains inputs in groups with one consumer-counter step each.
  uint64_t pad_target = 0;
  uint32_t batch = 1;
};

struct SourceBinding {
  std::string stream;  // input stream name, e.g. "bids"
  std::string to;      // stage id
};

struct PipelineSpec {
  std::vector<StageSpec> stages;
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<SourceBinding> sources;
  std::vector<std::string> sinks;

  const StageSpec* find_stage(const std::string& id) const;
  StageSpec* find_stage(const std::string& id);
  std::vector<std::string> inputs_of(const std::string& id) const;
  std::vector<std::string> outputs_of(const std::string& id) const;
  // Stage ids in topological order. Throws InvalidSpec on a cycle.
  std::vector<std::string> topo_order() const;

  // Checks structural invariants: ids unique, edges reference known stages,
  // DAG acyclic, Join stages have exactly two inbound edges plus sources,
  // every other stage exactly one, window parameters in range.
  void validate() const;
};

std::string pipeline_to_json(const PipelineSpec& spec);
PipelineSpec pipeline_from_json(const std::string& json);

// Replaces a linear chain of stages with one fused stage executing the same
// operators back to back. The chain must be connected head to tail with no
// branches in between; otherwise NotAChain.
PipelineSpec fuse_stages(const PipelineSpec& spec,
                         const std::vector<std::string>& chain);

// Sets a per-record cycle budget on one stage. Records finishing early are
// held until the budget elapses, flattening the processing-time profile.
PipelineSpec pad_stage(const PipelineSpec& spec, const std::string& stage_id,
                       uint64_t target_cycles);

// Makes one stage consume its inputs in groups of batch_size with a single
// observable consumer step per group.
PipelineSpec batch_stage(const PipelineSpec& spec, const std::string& stage_id,
                         uint32_t batch_size);

}  // namespace streamlab
