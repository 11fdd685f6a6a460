#pragma once

#include <functional>
#include <string>
#include <vector>

#include "streamlab/common.hpp"

namespace streamlab {

// Map and filter behavior comes from a closed registry of parameterized
// expression ids rather than arbitrary code:
//
//   map:     scale:<field>:<rate>      multiply numeric field by rate
//            add:<field>:<delta>       add delta to numeric field
//            project:<f1>,<f2>,...     keep only the listed fields
//   filter:  gt:<field>:<thr>          keep records with field > thr
//            lt:<field>:<thr>          keep records with field < thr
//            eq:<field>:<value>        keep records with field == value
//            range:<field>:<lo>:<hi>   keep lo <= field <= hi
//   window:  field:<name>              numeric field an aggregate reads
//
// Unknown ids throw InvalidSpec at parse time; a referenced field missing
// from a record throws MissingField when the expression runs.

struct MapExpr {
  std::string id;
  std::function<EventRecord(const EventRecord&)> apply;
};

struct FilterExpr {
  std::string id;
  std::function<bool(const EventRecord&)> test;
};

MapExpr parse_map_expr(const std::string& expr_id);
FilterExpr parse_filter_expr(const std::string& expr_id);

// Field name an aggregate reads, from "field:<name>". Empty expr ids are
// allowed for count, which reads no field.
std::string parse_agg_field(const std::string& expr_id);

// Join key spec "name" (same field both sides) or "left=right".
struct JoinKey {
  std::string left;
  std::string right;
};
JoinKey parse_join_key(const std::string& key_field);

}  // namespace streamlab
