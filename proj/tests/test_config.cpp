#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "advise/config.hpp"

using advise::ConfigError;
using advise::ExperimentConfig;
using advise::parse_config_text;

namespace {

std::string error_field(const std::string& text) {
  try {
    (void)parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST(Config, ShippedDefaultMatchesBuiltInDefaults) {
  const ExperimentConfig cfg = advise::load_config(std::string(ADVISE_CONFIG_DIR) + "/default.cfg");
  const ExperimentConfig def;
  EXPECT_EQ(cfg.arm, def.arm);
  EXPECT_EQ(cfg.episodes, def.episodes);
  EXPECT_EQ(cfg.seeds, def.seeds);
  EXPECT_EQ(cfg.smoothing_window, def.smoothing_window);
  EXPECT_EQ(cfg.rl.gamma, def.rl.gamma);
  EXPECT_EQ(cfg.rl.alpha, def.rl.alpha);
  EXPECT_EQ(cfg.rl.tau, def.rl.tau);
  EXPECT_EQ(cfg.q_init, def.q_init);
  EXPECT_EQ(cfg.env.power.cost_low, def.env.power.cost_low);
  EXPECT_EQ(cfg.env.power.cost_high, def.env.power.cost_high);
  EXPECT_EQ(cfg.env.power.target, def.env.power.target);
  EXPECT_EQ(cfg.env.power.cap, def.env.power.cap);
  EXPECT_EQ(cfg.env.episode.steps(), 240);
  EXPECT_EQ(cfg.env.episode.lambda, def.env.episode.lambda);
  EXPECT_EQ(cfg.env.activities.num_activities, def.env.activities.num_activities);
  EXPECT_EQ(cfg.env.activities.stay_probability, def.env.activities.stay_probability);
  EXPECT_EQ(cfg.env.activities.low_accuracy, def.env.activities.low_accuracy);
  EXPECT_EQ(cfg.env.activities.high_accuracy, def.env.activities.high_accuracy);
  EXPECT_EQ(cfg.consistency.alpha0, def.consistency.alpha0);
  EXPECT_EQ(cfg.consistency.em.tol, def.consistency.em.tol);
  ASSERT_EQ(cfg.trainers.size(), 2u);
  EXPECT_EQ(cfg.trainers[0].name, "rgbd");
  EXPECT_EQ(cfg.trainers[0].accuracy, 0.9);
  EXPECT_EQ(cfg.trainers[1].name, "pir");
  EXPECT_EQ(cfg.trainers[1].accuracy, 0.75);
}

TEST(Config, EmptyTextGivesDefaults) {
  const auto cfg = parse_config_text("");
  EXPECT_EQ(cfg.episodes, 2000);
  EXPECT_EQ(cfg.trainers.size(), 2u);
  EXPECT_EQ(cfg.env.activities.low_accuracy[19], 0.3);
}

TEST(Config, SectionsListsAndComments) {
  const auto cfg = parse_config_text(R"(
# comment line
[experiment]
arm = fixed-low   # trailing comment
episodes = 10
seeds = 4, 5 ,6
[rl]
q_init = -2.5
[activities]
count = 4
low_accuracy = 0.5
high_accuracy = 0.6, 0.7, 0.8, 0.9
hard =
[trainers]
count = 3
[trainers.2]
name = wearable-camera
accuracy = 0.6
feedback_probability = 0.25
)");
  EXPECT_EQ(cfg.arm, advise::Arm::FixedLow);
  EXPECT_EQ(cfg.episodes, 10);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{4, 5, 6}));
  EXPECT_EQ(cfg.q_init, -2.5);
  EXPECT_EQ(cfg.env.activities.low_accuracy, (std::vector<double>{0.5, 0.5, 0.5, 0.5}));
  EXPECT_EQ(cfg.env.activities.high_accuracy, (std::vector<double>{0.6, 0.7, 0.8, 0.9}));
  ASSERT_EQ(cfg.trainers.size(), 3u);
  EXPECT_EQ(cfg.trainers[0].name, "rgbd");
  EXPECT_EQ(cfg.trainers[2].name, "wearable-camera");
  EXPECT_EQ(cfg.trainers[2].feedback_probability, 0.25);
}

TEST(Config, HardActivitiesAndTransitions) {
  const auto cfg = parse_config_text(R"(
activities.count = 3
activities.hard = 1
activities.hard_low_accuracy = 0.1
activities.transition = 0, 1, 0,  0, 0, 1,  1, 0, 0
)");
  EXPECT_EQ(cfg.env.activities.low_accuracy, (std::vector<double>{0.8, 0.1, 0.8}));
  EXPECT_EQ(cfg.env.activities.transition[1], (std::vector<double>{0, 0, 1}));
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(error_field("rl.gama = 0.9"), "rl.gama");
  EXPECT_EQ(error_field("[rl]\ngamma = 1.5"), "rl.gamma");
  EXPECT_EQ(error_field("[rl]\ngamma = fast"), "rl.gamma");
  EXPECT_EQ(error_field("experiment.episodes = 10\nexperiment.episodes = 20"), "experiment.episodes");
  EXPECT_EQ(error_field("experiment.arm = greedy"), "experiment.arm");
  EXPECT_EQ(error_field("experiment.seeds = 1, -2"), "experiment.seeds");
  EXPECT_EQ(error_field("trainers.count = 2\ntrainers.1.accuracy = 1.2"), "trainers.1.accuracy");
  EXPECT_EQ(error_field("trainers.count = 1\ntrainers.1.accuracy = 0.5"), "trainers.1.accuracy");
  EXPECT_EQ(error_field("activities.count = 3\nactivities.low_accuracy = 0.5, 0.5"),
            "activities.low_accuracy");
  EXPECT_EQ(error_field("activities.hard = 25"), "activities.hard");
  EXPECT_EQ(error_field("activities.count = 2\nactivities.transition = 1, 0, 0"),
            "activities.transition");
  EXPECT_EQ(error_field("power.cost_high = 0.01"), "power.cost_high");
  EXPECT_EQ(error_field("[rl\ngamma = 0.9"), "line 1");
  EXPECT_EQ(error_field("just words"), "line 1");
}

TEST(Config, TraceFileResolvesAgainstConfigDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "advise_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream trace(dir / "labels.txt");
    for (int k = 0; k < 240; ++k) trace << (k / 10) % 20 << '\n';
  }
  std::ofstream(dir / "run.cfg") << "[activities]\ntrace_file = labels.txt\n";
  const auto cfg = advise::load_config((dir / "run.cfg").string());
  ASSERT_EQ(cfg.env.activities.trace.size(), 240u);
  EXPECT_EQ(cfg.env.activities.trace[25], 2);

  std::ofstream(dir / "missing.cfg") << "activities.trace_file = nope.txt\n";
  EXPECT_THROW((void)advise::load_config((dir / "missing.cfg").string()), advise::IoError);
  EXPECT_THROW((void)advise::load_config((dir / "absent.cfg").string()), advise::IoError);
  std::filesystem::remove_all(dir);
}
