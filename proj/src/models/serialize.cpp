#include "json.hpp"
#include "train_internal.hpp"

namespace streamlab {

using nlohmann::json;

std::string model_to_json(const TrainedModel& m) {
  json j;
  j["version"] = 1;
  j["family"] = family_name(m.spec.family);
  j["task"] = m.spec.task == TaskType::Classification ? "classification"
                                                      : "regression";
  j["feature_dim"] = m.feature_dim;
  j["seed"] = m.spec.seed;
  if (m.spec.family == ModelFamily::RandomForest) {
    j["hyper"] = {{"n_estimators", m.spec.rf.n_estimators},
                  {"max_depth", m.spec.rf.max_depth},
                  {"max_features",
                   m.spec.rf.max_features == RfParams::MaxFeatures::Sqrt
                       ? "sqrt"
                       : "log2"},
                  {"bootstrap", m.spec.rf.bootstrap}};
  } else {
    j["hyper"] = {{"n_estimators", m.spec.gbt.n_estimators},
                  {"max_depth", m.spec.gbt.max_depth},
                  {"gamma", m.spec.gbt.gamma},
                  {"learning_rate", m.spec.gbt.learning_rate}};
  }
  json classes = json::array();
  for (OperatorKind k : m.classes) classes.push_back(kind_name(k));
  j["classes"] = classes;
  if (!m.target_name.empty()) j["target"] = m.target_name;
  j["base_scores"] = m.base_scores;
  json groups = json::array();
  for (const auto& group : m.tree_groups) {
    json trees = json::array();
    for (const Tree& t : group) {
      json nodes = json::array();
      for (const TreeNode& nd : t.nodes)
        nodes.push_back({{"feature_idx", nd.feature_idx},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"leaf_value", nd.leaf_value}});
      trees.push_back({{"nodes", nodes}});
    }
    groups.push_back(trees);
  }
  j["tree_groups"] = groups;
  return j.dump();
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("bad model json: ") + e.what());
  }
  TrainedModel m;
  try {
    if (j.at("version").get<int>() != 1)
      throw InvalidModel("unsupported model version");
    m.spec.family = family_from_name(j.at("family").get<std::string>());
    m.spec.task = j.at("task").get<std::string>() == "classification"
                      ? TaskType::Classification
                      : TaskType::Regression;
    m.feature_dim = j.at("feature_dim").get<size_t>();
    m.spec.seed = j.value("seed", uint64_t(0));
    const json& h = j.at("hyper");
    if (m.spec.family == ModelFamily::RandomForest) {
      m.spec.rf.n_estimators = h.at("n_estimators");
      m.spec.rf.max_depth = h.at("max_depth");
      m.spec.rf.max_features = h.at("max_features").get<std::string>() == "sqrt"
                                   ? RfParams::MaxFeatures::Sqrt
                                   : RfParams::MaxFeatures::Log2;
      m.spec.rf.bootstrap = h.at("bootstrap");
    } else {
      m.spec.gbt.n_estimators = h.at("n_estimators");
      m.spec.gbt.max_depth = h.at("max_depth");
      m.spec.gbt.gamma = h.at("gamma");
      m.spec.gbt.learning_rate = h.at("learning_rate");
    }
    for (const auto& c : j.at("classes"))
      m.classes.push_back(kind_from_name(c.get<std::string>()));
    m.target_name = j.value("target", "");
    m.base_scores = j.at("base_scores").get<std::vector<double>>();
    for (const auto& gj : j.at("tree_groups")) {
      std::vector<Tree> group;
      for (const auto& tj : gj) {
        Tree t;
        for (const auto& nj : tj.at("nodes")) {
          TreeNode nd;
          nd.feature_idx = nj.at("feature_idx");
          nd.threshold = nj.at("threshold");
          nd.left = nj.at("left");
          nd.right = nj.at("right");
          nd.leaf_value = nj.at("leaf_value");
          t.nodes.push_back(nd);
        }
        if (t.nodes.empty()) throw InvalidModel("tree with no nodes");
        group.push_back(std::move(t));
      }
      m.tree_groups.push_back(std::move(group));
    }
  } catch (const json::exception& e) {
    throw InvalidModel(std::string("bad model json: ") + e.what());
  }
  if (m.tree_groups.empty()) throw InvalidModel("model has no trees");
  return m;
}

}  // namespace streamlab
