#include "streamlab/expr.hpp"

#include <cstdlib>

namespace streamlab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

double parse_num(const std::string& s, const std::string& expr) {
  char* end = nullptr;
  double v = strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw InvalidSpec("bad number '" + s + "' in expr: " + expr);
  return v;
}

Value parse_literal(const std::string& s) {
  if (s.empty()) return s;
  char* end = nullptr;
  long long iv = strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() && *end == '\0') return int64_t(iv);
  double dv = strtod(s.c_str(), &end);
  if (end != s.c_str() && *end == '\0') return dv;
  return s;
}

}  // namespace

MapExpr parse_map_expr(const std::string& expr_id) {
  auto parts = split(expr_id, ':');
  const std::string& op = parts[0];
  if (op == "scale" && parts.size() == 3) {
    std::string field = parts[1];
    double rate = parse_num(parts[2], expr_id);
    return {expr_id, [field, rate](const EventRecord& rec) {
              EventRecord out = rec;
              out.set(field, rec.numeric(field) * rate);
              return out;
            }};
  }
  if (op == "add" && parts.size() == 3) {
    std::string field = parts[1];
    double delta = parse_num(parts[2], expr_id);
    return {expr_id, [field, delta](const EventRecord& rec) {
              EventRecord out = rec;
              out.set(field, rec.numeric(field) + delta);
              return out;
            }};
  }
  if (op == "project" && parts.size() == 2) {
    auto names = split(parts[1], ',');
    return {expr_id, [names](const EventRecord& rec) {
              EventRecord out;
              out.seq = rec.seq;
              out.schema = rec.schema;
              out.ts = rec.ts;
              for (const auto& n : names) out.fields.push_back({n, rec.get(n)});
              return out;
            }};
  }
  throw InvalidSpec("unknown map expr: " + expr_id);
}

FilterExpr parse_filter_expr(const std::string& expr_id) {
  auto parts = split(expr_id, ':');
  const std::string& op = parts[0];
  if (op == "gt" && parts.size() == 3) {
    std::string field = parts[1];
    double thr = parse_num(parts[2], expr_id);
    return {expr_id,
            [field, thr](const EventRecord& r) { return r.numeric(field) > thr; }};
  }
  if (op == "lt" && parts.size() == 3) {
    std::string field = parts[1];
    double thr = parse_num(parts[2], expr_id);
    return {expr_id,
            [field, thr](const EventRecord& r) { return r.numeric(field) < thr; }};
  }
  if (op == "eq" && parts.size() == 3) {
    std::string field = parts[1];
    Value want = parse_literal(parts[2]);
    return {expr_id, [field, want](const EventRecord& r) {
              return value_equal(r.get(field), want);
            }};
  }
  if (op == "range" && parts.size() == 4) {
    std::string field = parts[1];
    double lo = parse_num(parts[2], expr_id);
    double hi = parse_num(parts[3], expr_id);
    return {expr_id, [field, lo, hi](const EventRecord& r) {
              double v = r.numeric(field);
              return v >= lo && v <= hi;
            }};
  }
  throw InvalidSpec("unknown filter expr: " + expr_id);
}

std::string parse_agg_field(const std::string& expr_id) {
  if (expr_id.empty()) return "";
  auto parts = split(expr_id, ':');
  if (parts.size() == 2 && parts[0] == "field" && !parts[1].empty())
    return parts[1];
  throw InvalidSpec("unknown aggregate expr: " + expr_id);
}

JoinKey parse_join_key(const std::string& key_field) {
  if (key_field.empty()) throw InvalidSpec("join key_field must not be empty");
  size_t pos = key_field.find('=');
  if (pos == std::string::npos) return {key_field, key_field};
  JoinKey k{key_field.substr(0, pos), key_field.substr(pos + 1)};
  if (k.left.empty() || k.right.empty())
    throw InvalidSpec("bad join key_field: " + key_field);
  return k;
}

}  // namespace streamlab
