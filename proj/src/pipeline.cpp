#include "streamlab/pipeline.hpp"

#include <chrono>
#include <mutex>
#include <thread>

#include "streamlab/operators.hpp"

#if defined(STREAMLAB_HAS_TSC)
#include <x86intrin.h>
#endif

namespace streamlab {

#if defined(STREAMLAB_HAS_TSC)
uint64_t TscCounter::now() const { return __rdtsc(); }
#endif

std::unique_ptr<CycleCounter> make_hardware_counter() {
#if defined(STREAMLAB_HAS_TSC)
  return std::make_unique<TscCounter>();
#else
  return std::make_unique<SteadyCycleCounter>(1.0);
#endif
}

namespace {

using Buffer = RingBuffer<Ciphertext>;

struct Shared {
  std::atomic<bool> abort{false};
  std::atomic<uint64_t> progress{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::string failed_stage;
  bool threaded = false;
  CycleCounter* pad_counter = nullptr;

  void record_error(const std::string& where) {
    std::lock_guard<std::mutex> lock(err_mu);
    if (!first_error) {
      first_error = std::current_exception();
      failed_stage = where;
    }
    abort.store(true, std::memory_order_release);
  }
};

// A unit of pipeline work. step() does a bounded amount of work and never
// blocks (pad busy-waits excepted), so the deterministic scheduler can round
// robin tasks on one thread and the threaded wrapper can poll abort between
// steps. Both modes run the same step logic.
class Task {
 public:
  virtual ~Task() = default;
  virtual bool step() = 0;
  virtual bool done() const = 0;
  virtual const std::string& name() const = 0;
};

class SourceTask : public Task {
 public:
  SourceTask(std::string name, const std::vector<EventRecord>* records,
             Buffer* out, const std::array<uint8_t, 16>& key)
      : name_(std::move(name)), records_(records), out_(out), cipher_(key) {}

  bool step() override {
    if (done_) return false;
    if (pos_ == records_->size()) {
      out_->close();
      done_ = true;
      return true;
    }
    if (!have_pending_) {
      pending_ = cipher_.encrypt((*records_)[pos_]);
      have_pending_ = true;
    }
    if (out_->push(std::move(pending_)) == PushResult::Full) return false;
    have_pending_ = false;
    ++pos_;
    return true;
  }

  bool done() const override { return done_; }
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
  const std::vector<EventRecord>* records_;
  Buffer* out_;
  AesGcmCipher cipher_;
  size_t pos_ = 0;
  Ciphertext pending_;
  bool have_pending_ = false;
  bool done_ = false;
};

class StageTask : public Task {
 public:
  StageTask(const StageSpec& spec, std::vector<Buffer*> inputs, Buffer* out,
            const std::array<uint8_t, 16>& key, Shared* shared)
      : spec_(spec),
        state_(OperatorState::make(spec.op)),
        inputs_(std::move(inputs)),
        out_(out),
        cipher_(key),
        shared_(shared),
        exhausted_(inputs_.size(), false) {}

  bool step() override {
    if (done_) return false;
    if (pend_pos_ < pending_.size()) return flush_pending();

    bool all_gone = true;
    for (bool e : exhausted_) all_gone &= e;
    if (all_gone) {
      out_->close();
      done_ = true;
      return true;
    }

    int side = state_->wants_input();
    if (side < 0 || size_t(side) >= inputs_.size()) side = 0;
    if (exhausted_[side]) {
      // The wanted side is gone; let the state pick again next step after
      // being told, or fall back to any open input.
      for (size_t i = 0; i < inputs_.size(); ++i)
        if (!exhausted_[i]) side = int(i);
      if (exhausted_[side]) return false;
    }
    Buffer* buf = inputs_[side];
    if (buf->exhausted()) {
      state_->input_closed(side);
      exhausted_[side] = true;
      return true;
    }

    if (spec_.batch > 1) {
      batch_.clear();
      size_t n = buf->pop_batch(batch_, spec_.batch);
      if (n == 0) return false;
      for (const auto& ct : batch_) process(ct, side);
    } else {
      std::optional<Ciphertext> ct = buf->pop();
      if (!ct) return false;
      process(*ct, side);
    }
    flush_pending();
    return true;
  }

  bool done() const override { return done_; }
  const std::string& name() const override { return spec_.id; }

 private:
  void process(const Ciphertext& ct, int side) {
    uint64_t t0 = 0;
    bool pad = spec_.pad_target > 0 && shared_->threaded;
    if (pad) t0 = shared_->pad_counter->now();
    EventRecord rec = cipher_.decrypt(ct);
    std::vector<EventRecord> outs = state_->on_record(rec, side);
    if (pad) {
      // Hold the record until the cycle budget elapses so fast and slow
      // paths leave the stage looking alike. Simulated runs model this in
      // the cost layer instead.
      while (shared_->pad_counter->now() - t0 < spec_.pad_target) {
        if (shared_->abort.load(std::memory_order_relaxed)) break;
      }
    }
    for (const auto& r : outs) pending_.push_back(cipher_.encrypt(r));
  }

  bool flush_pending() {
    bool progressed = false;
    while (pend_pos_ < pending_.size()) {
      if (out_->push(std::move(pending_[pend_pos_])) == PushResult::Full) break;
      ++pend_pos_;
      progressed = true;
    }
    if (pend_pos_ == pending_.size()) {
      pending_.clear();
      pend_pos_ = 0;
    }
    return progressed;
  }

  StageSpec spec_;
  std::unique_ptr<OperatorState> state_;
  std::vector<Buffer*> inputs_;
  Buffer* out_;
  AesGcmCipher cipher_;
  Shared* shared_;
  std::vector<bool> exhausted_;
  std::vector<Ciphertext> pending_;
  size_t pend_pos_ = 0;
  std::vector<Ciphertext> batch_;
  bool done_ = false;
};

// Moves a stage's sealed outputs onward: copies to each downstream input
// buffer and, for sink stages, decrypts into the collected output.
class RouterTask : public Task {
 public:
  RouterTask(std::string name, Buffer* in, std::vector<Buffer*> targets,
             std::vector<EventRecord>* sink_out,
             const std::array<uint8_t, 16>& key)
      : name_(std::move(name)),
        in_(in),
        targets_(std::move(targets)),
        sink_out_(sink_out),
        cipher_(key) {}

  bool step() override {
    if (done_) return false;
    if (have_pending_) return deliver();
    if (in_->exhausted()) {
      for (Buffer* t : targets_) t->close();
      done_ = true;
      return true;
    }
    std::optional<Ciphertext> ct = in_->pop();
    if (!ct) return false;
    pending_ = std::move(*ct);
    have_pending_ = true;
    deliver_idx_ = 0;
    deliver();
    return true;
  }

  bool done() const override { return done_; }
  const std::string& name() const override { return name_; }

 private:
  bool deliver() {
    bool progressed = false;
    while (deliver_idx_ < targets_.size()) {
      if (targets_[deliver_idx_]->push(Ciphertext(pending_)) == PushResult::Full)
        return progressed;
      ++deliver_idx_;
      progressed = true;
    }
    if (sink_out_) sink_out_->push_back(cipher_.decrypt(pending_));
    have_pending_ = false;
    return true;
  }

  std::string name_;
  Buffer* in_;
  std::vector<Buffer*> targets_;
  std::vector<EventRecord>* sink_out_;
  AesGcmCipher cipher_;
  Ciphertext pending_;
  bool have_pending_ = false;
  size_t deliver_idx_ = 0;
  bool done_ = false;
};

class PipelineRunImpl : public PipelineRun {
 public:
  PipelineRunImpl(const PipelineSpec& spec, const InputStreams& inputs,
                  const RunOptions& opts)
      : spec_(spec), opts_(opts) {
    spec_.validate();
    shared_.threaded = opts.mode == RunOptions::Mode::Threaded;
    if (!opts_.pad_counter) {
      owned_counter_ = make_hardware_counter();
      shared_.pad_counter = owned_counter_.get();
    } else {
      shared_.pad_counter = opts_.pad_counter;
    }

    for (const auto& b : spec_.sources) {
      auto it = inputs.find(b.stream);
      if (it == inputs.end())
        throw InvalidSpec("no input stream named " + b.stream);
      streams_[b.stream] = it->second;
    }

    build();
    start();
  }

  ~PipelineRunImpl() override {
    shared_.abort.store(true, std::memory_order_release);
    join_all();
  }

  size_t input_count(const std::string& stage_id) const override {
    auto it = stage_inputs_.find(stage_id);
    if (it == stage_inputs_.end()) throw InvalidSpec("unknown stage: " + stage_id);
    return it->second.size();
  }

  const Buffer& input_buffer(const std::string& stage_id,
                             size_t input) const override {
    auto it = stage_inputs_.find(stage_id);
    if (it == stage_inputs_.end()) throw InvalidSpec("unknown stage: " + stage_id);
    if (input >= it->second.size())
      throw InvalidSpec("stage " + stage_id + " has no input " +
                        std::to_string(input));
    return *it->second[input];
  }

  void wait() override {
    if (opts_.mode == RunOptions::Mode::Threaded) {
      monitor();
      join_all();
    }
    if (stalled_) throw PipelineStall(stall_msg_);
    if (shared_.first_error) std::rethrow_exception(shared_.first_error);
  }

  bool finished() const override {
    return exited_.load(std::memory_order_acquire) == tasks_.size();
  }

  const std::vector<EventRecord>& sink_output(
      const std::string& stage_id) const override {
    auto it = sink_outputs_.find(stage_id);
    if (it == sink_outputs_.end())
      throw InvalidSpec(stage_id + " is not a sink");
    return it->second;
  }

 private:
  void build() {
    // Input buffers per stage: source bindings first, then inbound edges,
    // both in spec order. Each buffer gets exactly one producer.
    std::map<size_t, Buffer*> edge_buffer;  // index into spec_.edges
    for (const auto& stage : spec_.stages) {
      auto& ins = stage_inputs_[stage.id];
      for (const auto& b : spec_.sources) {
        if (b.to != stage.id) continue;
        buffers_.push_back(std::make_unique<Buffer>(opts_.buffer_capacity));
        Buffer* buf = buffers_.back().get();
        ins.push_back(buf);
        source_feeds_.push_back({b.stream, buf});
      }
      for (size_t ei = 0; ei < spec_.edges.size(); ++ei) {
        if (spec_.edges[ei].second != stage.id) continue;
        buffers_.push_back(std::make_unique<Buffer>(opts_.buffer_capacity));
        ins.push_back(buffers_.back().get());
        edge_buffer[ei] = buffers_.back().get();
      }
    }
    for (const auto& stage : spec_.stages) {
      buffers_.push_back(std::make_unique<Buffer>(opts_.buffer_capacity));
      stage_out_[stage.id] = buffers_.back().get();
    }
    for (const auto& s : spec_.sinks) sink_outputs_[s];

    for (auto& feed : source_feeds_)
      tasks_.push_back(std::make_unique<SourceTask>(
          "source:" + feed.stream, &inputs_copy(feed.stream), feed.buf,
          opts_.key));
    for (const auto& stage : spec_.stages)
      tasks_.push_back(std::make_unique<StageTask>(
          stage, stage_inputs_[stage.id], stage_out_[stage.id], opts_.key,
          &shared_));
    for (const auto& stage : spec_.stages) {
      std::vector<Buffer*> targets;
      for (size_t ei = 0; ei < spec_.edges.size(); ++ei)
        if (spec_.edges[ei].first == stage.id) targets.push_back(edge_buffer[ei]);
      auto sink_it = sink_outputs_.find(stage.id);
      std::vector<EventRecord>* sink =
          sink_it == sink_outputs_.end() ? nullptr : &sink_it->second;
      tasks_.push_back(std::make_unique<RouterTask>(
          "router:" + stage.id, stage_out_[stage.id], std::move(targets), sink,
          opts_.key));
    }
  }

  // Sources need stable storage for their stream; keep one copy per stream
  // name for the lifetime of the run.
  const std::vector<EventRecord>& inputs_copy(const std::string& stream) {
    return streams_[stream];
  }

  void start() {
    if (opts_.mode == RunOptions::Mode::Threaded) {
      for (auto& task : tasks_) {
        threads_.emplace_back([this, t = task.get()] {
          try {
            while (!t->done()) {
              if (shared_.abort.load(std::memory_order_relaxed)) break;
              if (t->step())
                shared_.progress.fetch_add(1, std::memory_order_relaxed);
              else
                std::this_thread::yield();
            }
          } catch (...) {
            shared_.record_error(t->name());
          }
          exited_.fetch_add(1, std::memory_order_acq_rel);
        });
      }
    } else {
      run_deterministic();
    }
  }

  void run_deterministic() {
    size_t done_count = 0;
    std::vector<bool> counted(tasks_.size(), false);
    while (done_count < tasks_.size()) {
      bool progressed = false;
      for (size_t i = 0; i < tasks_.size(); ++i) {
        if (counted[i]) continue;
        try {
          if (tasks_[i]->step()) progressed = true;
        } catch (...) {
          shared_.record_error(tasks_[i]->name());
          exited_.store(tasks_.size(), std::memory_order_release);
          return;
        }
        if (tasks_[i]->done()) {
          counted[i] = true;
          ++done_count;
        }
      }
      if (!progressed && done_count < tasks_.size()) {
        stalled_ = true;
        stall_msg_ = "scheduler made no progress";
        break;
      }
    }
    exited_.store(tasks_.size(), std::memory_order_release);
  }

  void monitor() {
    using clock = std::chrono::steady_clock;
    uint64_t last = shared_.progress.load(std::memory_order_relaxed);
    auto last_change = clock::now();
    while (exited_.load(std::memory_order_acquire) < tasks_.size()) {
      if (shared_.abort.load(std::memory_order_acquire)) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      uint64_t p = shared_.progress.load(std::memory_order_relaxed);
      if (p != last) {
        last = p;
        last_change = clock::now();
      } else if (clock::now() - last_change >
                 std::chrono::milliseconds(opts_.stall_timeout_ms)) {
        stalled_ = true;
        stall_msg_ = "no record moved for " +
                     std::to_string(opts_.stall_timeout_ms) + " ms";
        shared_.abort.store(true, std::memory_order_release);
        break;
      }
    }
  }

  void join_all() {
    for (auto& t : threads_)
      if (t.joinable()) t.join();
  }

 private:
  PipelineSpec spec_;
  RunOptions opts_;
  Shared shared_;
  std::unique_ptr<CycleCounter> owned_counter_;
  std::map<std::string, std::vector<EventRecord>> streams_;

  struct SourceFeed {
    std::string stream;
    Buffer* buf;
  };

  std::vector<std::unique_ptr<Buffer>> buffers_;
  std::map<std::string, std::vector<Buffer*>> stage_inputs_;
  std::map<std::string, Buffer*> stage_out_;
  std::vector<SourceFeed> source_feeds_;
  std::map<std::string, std::vector<EventRecord>> sink_outputs_;
  std::vector<std::unique_ptr<Task>> tasks_;
  std::vector<std::thread> threads_;
  std::atomic<size_t> exited_{0};
  bool stalled_ = false;
  std::string stall_msg_;
};

}  // namespace

std::unique_ptr<PipelineRun> run_pipeline(const PipelineSpec& spec,
                                          const InputStreams& inputs,
                                          const RunOptions& opts) {
  auto run = std::make_unique<PipelineRunImpl>(spec, inputs, opts);
  return run;
}

}  // namespace streamlab
