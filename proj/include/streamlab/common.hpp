#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace streamlab {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class MissingField : public Error {
 public:
  explicit MissingField(const std::string& name)
      : Error("missing field: " + name) {}
};

class TypeMismatch : public Error {
 public:
  explicit TypeMismatch(const std::string& msg) : Error(msg) {}
};

class AuthFailure : public Error {
 public:
  AuthFailure() : Error("ciphertext authentication failed") {}
};

class MalformedPayload : public Error {
 public:
  explicit MalformedPayload(const std::string& msg)
      : Error("malformed payload: " + msg) {}
};

class InvalidSpec : public Error {
 public:
  explicit InvalidSpec(const std::string& msg) : Error(msg) {}
};

class NotAChain : public Error {
 public:
  explicit NotAChain(const std::string& msg) : Error(msg) {}
};

class UnknownQuery : public Error {
 public:
  explicit UnknownQuery(const std::string& name)
      : Error("unknown query: " + name) {}
};

class PipelineStall : public Error {
 public:
  explicit PipelineStall(const std::string& msg) : Error(msg) {}
};

class InvalidModel : public Error {
 public:
  explicit InvalidModel(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class DegenerateData : public Error {
 public:
  explicit DegenerateData(const std::string& msg) : Error(msg) {}
};

class EmptyAfterTrim : public Error {
 public:
  EmptyAfterTrim() : Error("trace empty after trimming") {}
};

class MissingLabel : public Error {
 public:
  explicit MissingLabel(const std::string& msg) : Error(msg) {}
};

class ClassTooSmall : public Error {
 public:
  explicit ClassTooSmall(const std::string& msg) : Error(msg) {}
};

class MissingInput : public Error {
 public:
  explicit MissingInput(const std::string& path)
      : Error("missing input: " + path) {}
};

enum class SchemaId : uint8_t {
  Person = 0,
  Auction = 1,
  Bid = 2,
  Flight = 3,
  Derived = 4,
};

const char* schema_name(SchemaId id);

// Field values are integers, floats or short strings.
using Value = std::variant<int64_t, double, std::string>;

struct Field {
  std::string name;
  Value value;
};

struct EventRecord {
  uint64_t seq = 0;
  SchemaId schema = SchemaId::Derived;
  int64_t ts = 0;
  std::vector<Field> fields;

  const Value* find(const std::string& name) const {
    for (const auto& f : fields)
      if (f.name == name) return &f.value;
    return nullptr;
  }

  const Value& get(const std::string& name) const {
    const Value* v = find(name);
    if (!v) throw MissingField(name);
    return *v;
  }

  // Numeric view of a field; throws TypeMismatch for string fields.
  double numeric(const std::string& name) const {
    const Value& v = get(name);
    if (std::holds_alternative<int64_t>(v))
      return static_cast<double>(std::get<int64_t>(v));
    if (std::holds_alternative<double>(v)) return std::get<double>(v);
    throw TypeMismatch("field " + name + " is not numeric");
  }

  void set(const std::string& name, Value v) {
    for (auto& f : fields) {
      if (f.name == name) {
        f.value = std::move(v);
        return;
      }
    }
    fields.push_back({name, std::move(v)});
  }
};

bool value_equal(const Value& a, const Value& b);
std::string value_to_string(const Value& v);

// splitmix64: tiny deterministic generator with identical output on every
// platform. All randomized behavior in the library derives from it so runs
// reproduce bit for bit from a seed.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] inclusive.
  uint64_t uniform_int(uint64_t lo, uint64_t hi) {
    return lo + next() % (hi - lo + 1);
  }

  // Standard normal via Box-Muller; two uniforms per draw, no cached state.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double loc, double scale) { return loc + scale * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Derive an independent stream for a subtask without advancing this one.
  static uint64_t mix(uint64_t seed, uint64_t salt) {
    SplitMix64 g(seed ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL));
    return g.next();
  }

 private:
  uint64_t state_;
};

// Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.uniform_int(0, i - 1));
    std::swap(v[i - 1], v[j]);
  }
}

inline const char* kPrngName = "splitmix64";

}  // namespace streamlab
