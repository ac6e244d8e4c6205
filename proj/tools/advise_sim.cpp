// Command-line front end: run arms from a config file, compare metric CSVs.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "advise/advise.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kConfig = 3,
  kIo = 4,
  kInvalidArgument = 5,
  kInternal = 6,
};

int exit_code_for(const advise::Error& e) {
  const std::string_view c = e.category();
  if (c == "config_error") return kConfig;
  if (c == "io_error") return kIo;
  if (c == "invalid_argument") return kInvalidArgument;
  return kInternal;
}

struct RunOptions {
  std::string config;
  std::vector<std::string> arms;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::optional<int> episodes;
  unsigned threads = 0;
};

struct CompareOptions {
  std::vector<std::string> inputs;
  std::size_t window = 100;
  std::string curves;
  std::optional<std::size_t> smoothing;
};

int do_run(const RunOptions& o) {
  advise::ExperimentConfig cfg = advise::load_config(o.config);
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (o.episodes) cfg.episodes = *o.episodes;
  std::vector<advise::Arm> arms;
  for (const auto& name : o.arms) {
    if (name == "all") {
      arms.assign(advise::kAllArms.begin(), advise::kAllArms.end());
      continue;
    }
    const auto arm = advise::parse_arm(name);
    if (!arm) throw advise::ConfigError("arm", "unknown arm '" + name + "'");
    arms.push_back(*arm);
  }
  if (arms.empty()) arms.push_back(cfg.arm);
  cfg.validate();

  const auto runs = advise::run_arms(cfg, arms, o.threads);
  advise::emit_csv(o.out, runs, cfg.trainers.size());
  std::fprintf(stderr, "wrote %zu runs x %d episodes to %s\n", runs.size(), cfg.episodes,
               o.out.c_str());
  return kOk;
}

int do_compare(const CompareOptions& o) {
  const auto report = advise::compare_arm_files(o.inputs, o.window);
  std::cout << report.to_text();
  if (!o.curves.empty()) {
    std::vector<advise::RunMetrics> runs;
    for (const auto& path : o.inputs) {
      auto f = advise::load_csv(path);
      std::move(f.runs.begin(), f.runs.end(), std::back_inserter(runs));
    }
    std::ofstream out(o.curves, std::ios::binary);
    if (!out) throw advise::IoError(o.curves, "cannot open for writing");
    advise::emit_smoothed_curves(out, runs, o.smoothing.value_or(100));
    if (!out.flush()) throw advise::IoError(o.curves, "write failed");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback-shaped feature-set selection on a simulated wearable"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "run one or more arms over the configured seeds");
  run_cmd->add_option("--config", run.config, "experiment config file")->required();
  run_cmd->add_option("--arm", run.arms,
                      "MultiTrainers, PlainQL, RandomPolicy, FixedLow or all; repeatable "
                      "(default: experiment.arm from the config)");
  run_cmd->add_option("--out", run.out, "metrics CSV to write")->required();
  run_cmd->add_option("--seed-override", run.seeds, "replace the configured seed list");
  run_cmd->add_option("--episodes-override", run.episodes, "replace the configured episode count");
  run_cmd->add_option("--threads", run.threads, "concurrent seeds (0 = hardware concurrency)");

  CompareOptions cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "summarize metric CSVs over a final window");
  cmp_cmd->add_option("--inputs", cmp.inputs, "metric CSV files")->required()->expected(1, -1);
  cmp_cmd->add_option("--window", cmp.window, "final episodes per seed to summarize")
      ->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--curves", cmp.curves, "also write trailing-window smoothed curves here");
  cmp_cmd->add_option("--smoothing-window", cmp.smoothing, "trailing window for --curves (default 100)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return do_run(run);
    return do_compare(cmp);
  } catch (const advise::Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.category().data(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return kInternal;
  }
}
