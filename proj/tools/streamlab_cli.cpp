#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "streamlab/experiment.hpp"

namespace {

std::vector<std::string> dispatch(const std::string& name,
                                  const streamlab::ExperimentConfig& cfg) {
  if (name == "generate") return streamlab::cmd_generate(cfg);
  if (name == "profile") return streamlab::cmd_profile(cfg);
  if (name == "featurize") return streamlab::cmd_featurize(cfg);
  if (name == "train") return streamlab::cmd_train(cfg);
  if (name == "attack") return streamlab::cmd_attack(cfg);
  if (name == "mitigate") return streamlab::cmd_mitigate(cfg);
  if (name == "report") return streamlab::cmd_report(cfg);
  throw streamlab::InvalidSpec("unknown subcommand: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "streamlab: a desk-scale lab for timing side channels on sealed "
      "stream pipelines"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  std::string mode;
  std::string out;
  std::string query;
  std::string model;
  std::string setting;

  auto* opt_config =
      app.add_option("--config", config_path, "JSON experiment config file");
  auto* opt_seed = app.add_option("--seed", seed, "Override the master seed");
  auto* opt_mode =
      app.add_option("--mode", mode, "Trace mode: simulated or measured")
          ->check(CLI::IsMember({"simulated", "measured"}));
  auto* opt_out = app.add_option("--out", out, "Output directory");
  auto* opt_query =
      app.add_option("--query", query,
                     "Victim query: q1..q6 or flight_stats");
  auto* opt_model =
      app.add_option("--model", model,
                     "Model family: random_forest or gradient_boosted_trees")
          ->check(CLI::IsMember({"random_forest", "gradient_boosted_trees"}));
  auto* opt_setting =
      app.add_option("--setting", setting,
                     "Evaluation setting: even_split or leave_one_query_out")
          ->check(CLI::IsMember({"even_split", "leave_one_query_out"}));

  struct SubDef {
    const char* name;
    const char* desc;
  };
  const SubDef subs[] = {
      {"generate", "Write the synthetic input streams and their manifest"},
      {"profile", "Collect labeled per-operator timing traces"},
      {"featurize", "Turn traces into a feature table"},
      {"train", "Grid-search and fit the classifier and regressors"},
      {"attack", "Recover a victim query and score recovery rates"},
      {"mitigate", "Measure one mitigation's effect on recovery"},
      {"report", "Emit figure-ready CSV tables from prior outputs"},
  };
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.desc);
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  streamlab::ExperimentConfig cfg;
  try {
    if (opt_config->count())
      cfg = streamlab::config_from_json(streamlab::read_text_file(config_path));
    if (opt_seed->count()) cfg.seed = seed;
    if (opt_mode->count()) cfg.mode = streamlab::mode_from_name(mode);
    if (opt_out->count()) cfg.out_dir = out;
    if (opt_query->count()) cfg.query = query;
    if (opt_model->count()) cfg.family = streamlab::family_from_name(model);
    if (opt_setting->count()) cfg.setting = setting;
    cfg.validate();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    std::vector<std::string> written = dispatch(sub, cfg);
    for (const auto& path : written) std::printf("%s\n", path.c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
