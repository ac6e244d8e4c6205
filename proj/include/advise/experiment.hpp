#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "advise/action.hpp"
#include "advise/consistency.hpp"
#include "advise/environment.hpp"
#include "advise/feedback.hpp"
#include "advise/q_learning.hpp"
#include "advise/random.hpp"
#include "advise/state.hpp"
#include "advise/trainer.hpp"

namespace advise {

enum class Arm { MultiTrainers, PlainQL, RandomPolicy, FixedLow };

inline constexpr std::array<Arm, 4> kAllArms{Arm::MultiTrainers, Arm::PlainQL,
                                             Arm::RandomPolicy, Arm::FixedLow};

constexpr std::string_view to_string(Arm arm) noexcept {
  switch (arm) {
    case Arm::MultiTrainers: return "MultiTrainers";
    case Arm::PlainQL: return "PlainQL";
    case Arm::RandomPolicy: return "RandomPolicy";
    case Arm::FixedLow: return "FixedLow";
  }
  return "?";
}

// Case-insensitive; '-' and '_' are ignored ("fixed-low" == "FixedLow").
inline std::optional<Arm> parse_arm(std::string_view text) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (const char c : s) {
      if (c != '-' && c != '_') out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
  };
  const std::string key = squash(text);
  for (const Arm arm : kAllArms) {
    if (squash(to_string(arm)) == key) return arm;
  }
  return std::nullopt;
}

struct ConsistencyConfig {
  double alpha0 = 1.0 / 16.0;
  double initial = 0.5;
  double q_tilde = 0.1;
  double h_tilde = 0.1;
  EmOptions em;

  [[nodiscard]] TrainerEstimate fresh_estimate() const {
    return TrainerEstimate{initial, q_tilde, h_tilde, alpha0};
  }
};

inline std::vector<TrainerModel> default_trainers() {
  return {TrainerModel{"rgbd", 0.9, 1.0}, TrainerModel{"pir", 0.75, 1.0}};
}

struct ExperimentConfig {
  Arm arm = Arm::MultiTrainers;
  int episodes = 2000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  RlHyperParams rl;
  EnvironmentConfig env;
  std::vector<TrainerModel> trainers = default_trainers();
  ConsistencyConfig consistency;
  int smoothing_window = 100;
  // Value of never-visited Q entries; unset means the lowest reachable
  // episode reward (error rate 1 with the high set on every step).
  std::optional<double> q_init;

  [[nodiscard]] double initial_q() const {
    if (q_init) return *q_init;
    const double worst_power = env.power.cost_high * env.episode.steps();
    return episode_reward(1.0, worst_power, env.power, env.episode.lambda);
  }

  void validate() const {
    if (episodes < 1) throw ConfigError("experiment.episodes", "must be at least 1");
    if (seeds.empty()) throw ConfigError("experiment.seeds", "need at least one seed");
    if (smoothing_window < 1) {
      throw ConfigError("experiment.smoothing_window", "must be at least 1");
    }
    if (!(rl.gamma > 0.0 && rl.gamma <= 1.0)) throw ConfigError("rl.gamma", "must be in (0, 1]");
    if (!(rl.alpha > 0.0 && rl.alpha <= 1.0)) throw ConfigError("rl.alpha", "must be in (0, 1]");
    if (!(rl.tau > 0.0) || !std::isfinite(rl.tau)) throw ConfigError("rl.tau", "must be positive");
    if (q_init && !std::isfinite(*q_init)) throw ConfigError("rl.q_init", "must be finite");
    env.validate();
    for (std::size_t n = 0; n < trainers.size(); ++n) {
      const std::string at = "trainers." + std::to_string(n);
      const auto& t = trainers[n];
      if (!(t.accuracy >= 0.0 && t.accuracy <= 1.0)) {
        throw ConfigError(at + ".accuracy", "must be in [0, 1]");
      }
      if (!(t.feedback_probability >= 0.0 && t.feedback_probability <= 1.0)) {
        throw ConfigError(at + ".feedback_probability", "must be in [0, 1]");
      }
    }
    const auto& c = consistency;
    if (!(c.alpha0 > 0.0 && c.alpha0 <= 1.0)) {
      throw ConfigError("consistency.alpha0", "must be in (0, 1]");
    }
    if (!(c.initial > 0.0 && c.initial < 1.0)) {
      throw ConfigError("consistency.initial", "must be in (0, 1)");
    }
    if (!(c.q_tilde > 0.0)) throw ConfigError("consistency.q_tilde", "must be positive");
    if (!(c.h_tilde > 0.0)) throw ConfigError("consistency.h_tilde", "must be positive");
    if (c.em.max_iters < 1) throw ConfigError("consistency.em_max_iters", "must be at least 1");
    if (!(c.em.tol > 0.0)) throw ConfigError("consistency.em_tol", "must be positive");
  }
};

struct EpisodeMetrics {
  int episode = 0;
  double reward = 0.0;
  double error_rate = 0.0;
  double power_mC = 0.0;
  std::vector<double> consistency;  // one per trainer; empty unless MultiTrainers

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

struct RunMetrics {
  Arm arm = Arm::MultiTrainers;
  std::uint64_t seed = 0;
  std::size_t num_trainers = 0;  // number of consistency columns
  std::vector<EpisodeMetrics> episodes;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct StepEvent {
  int episode = 0;
  int step = 0;
  State state;
  Action action = Action::LowFeatures;
  ActionProbabilities policy;
  double reward = 0.0;
};

// One arm with one seed. The master seed is split into named streams for the
// environment, the action sampler and each trainer, so different arms with
// the same seed see the same activity sequence and classifier outputs.
class ExperimentRun {
public:
  ExperimentRun(ExperimentConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        seed_(seed),
        env_(cfg_.env, seed),
        policy_rng_(seed, "policy"),
        q_(cfg_.initial_q()),
        ledger_(cfg_.trainers.size()) {
    cfg_.validate();
    for (std::size_t n = 0; n < cfg_.trainers.size(); ++n) {
      trainer_rngs_.emplace_back(seed, "trainer." + std::to_string(n));
      estimates_.push_back(cfg_.consistency.fresh_estimate());
    }
    consistency_.resize(cfg_.trainers.size());
  }

  void set_observer(std::function<void(const StepEvent&)> observer) {
    observer_ = std::move(observer);
  }

  EpisodeMetrics run_episode() {
    State s = env_.reset();
    EpisodeMetrics m;
    m.episode = episode_;
    for (int step = 0;; ++step) {
      ActionProbabilities pi_r{};
      ActionProbabilities pi = policy_for(s, pi_r);
      const Action a = choose(pi);
      const StepResult res = env_.step(a);
      if (learns()) {
        if (cfg_.arm == Arm::MultiTrainers) apply_feedback(s, a, pi_r, res);
        q_update(q_, s, a, res.reward, res.next, res.terminal, cfg_.rl);
      }
      if (observer_) observer_(StepEvent{episode_, step, s, a, pi, res.reward});
      if (res.terminal) {
        m.reward = res.reward;
        m.error_rate = error_rate(env_.records());
        m.power_mC = res.cumulative_power;
        break;
      }
      s = res.next;
    }
    if (cfg_.arm == Arm::MultiTrainers) {
      for (const auto& e : estimates_) m.consistency.push_back(e.c_avg);
    }
    ++episode_;
    return m;
  }

  [[nodiscard]] const QTable<State>& q_table() const noexcept { return q_; }
  [[nodiscard]] const FeedbackLedger<State>& ledger() const noexcept { return ledger_; }
  [[nodiscard]] std::span<const TrainerEstimate> estimates() const noexcept { return estimates_; }
  [[nodiscard]] const WearableEnvironment& environment() const noexcept { return env_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

private:
  [[nodiscard]] bool learns() const {
    return cfg_.arm == Arm::MultiTrainers || cfg_.arm == Arm::PlainQL;
  }

  ActionProbabilities policy_for(const State& s, ActionProbabilities& pi_r) {
    switch (cfg_.arm) {
      case Arm::FixedLow: return pi_r = ActionProbabilities{{1.0, 0.0}};
      case Arm::RandomPolicy: return pi_r = ActionProbabilities{{0.5, 0.5}};
      case Arm::PlainQL: return pi_r = boltzmann_policy(q_, s, cfg_.rl.tau);
      case Arm::MultiTrainers: break;
    }
    pi_r = boltzmann_policy(q_, s, cfg_.rl.tau);
    for (std::size_t n = 0; n < estimates_.size(); ++n) consistency_[n] = estimates_[n].c_avg;
    return fuse_policies(pi_r, multi_trainer_policy(ledger_, consistency_, s));
  }

  Action choose(const ActionProbabilities& pi) {
    if (cfg_.arm == Arm::FixedLow) return Action::LowFeatures;
    return select_action(pi, policy_rng_);
  }

  // Trainers judge the step, their feedback lands on the decision state, and
  // every trainer with feedback at the pair taken refreshes its consistency.
  void apply_feedback(const State& s, Action a, const ActionProbabilities& pi_r,
                      const StepResult& res) {
    const int num_labels = cfg_.env.activities.num_activities;
    for (std::size_t n = 0; n < cfg_.trainers.size(); ++n) {
      const TrainerModel& tm = cfg_.trainers[n];
      RandomStream& rng = trainer_rngs_[n];
      const int c_trainer = trainer_classify(tm, res.record.true_label, num_labels, rng);
      if (tm.feedback_probability < 1.0 && !rng.bernoulli(tm.feedback_probability)) continue;
      for (const FeedbackEvent& e : generate_feedback(c_trainer, res.record.c_low, res.record.c_high,
                                                      res.cumulative_power,
                                                      cfg_.env.power.target)) {
        ledger_.record(TrainerId{n}, s, e.action, e.sign);
      }
    }
    for (std::size_t n = 0; n < cfg_.trainers.size(); ++n) {
      const TrainerId id{n};
      const FeedbackCounts counts = ledger_.counts(id, s, a);
      if (counts.total() == 0) continue;
      const double c_sa = em_consistency(pi_r[a], counts.h_plus, counts.h_minus, cfg_.consistency.em);
      const AccuracyMetrics acc = accuracy_metrics(q_, ledger_, id, s);
      estimates_[n] = update_consistency(estimates_[n], c_sa, acc.q_score, acc.h_score);
    }
  }

  ExperimentConfig cfg_;
  std::uint64_t seed_;
  WearableEnvironment env_;
  RandomStream policy_rng_;
  std::vector<RandomStream> trainer_rngs_;
  QTable<State> q_;
  FeedbackLedger<State> ledger_;
  std::vector<TrainerEstimate> estimates_;
  std::vector<double> consistency_;
  int episode_ = 0;
  std::function<void(const StepEvent&)> observer_;
};

inline RunMetrics run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentRun run(cfg, seed);
  RunMetrics out{cfg.arm, seed, cfg.trainers.size(), {}};
  out.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int e = 0; e < cfg.episodes; ++e) out.episodes.push_back(run.run_episode());
  return out;
}

// Runs every seed of the configured arm. Seeds run concurrently; results come
// back in seed-list order.
inline std::vector<RunMetrics> run_experiment(const ExperimentConfig& cfg,
                                              unsigned max_threads = 0) {
  cfg.validate();
  if (max_threads == 0) max_threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<RunMetrics> out(cfg.seeds.size());
  for (std::size_t begin = 0; begin < cfg.seeds.size(); begin += max_threads) {
    const std::size_t end = std::min(cfg.seeds.size(), begin + max_threads);
    std::vector<std::future<RunMetrics>> pending;
    for (std::size_t i = begin; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, run_single, std::cref(cfg), cfg.seeds[i]));
    }
    for (std::size_t i = begin; i < end; ++i) out[i] = pending[i - begin].get();
  }
  return out;
}

// Runs several arms over the same seeds.
inline std::vector<RunMetrics> run_arms(ExperimentConfig cfg, std::span<const Arm> arms,
                                        unsigned max_threads = 0) {
  std::vector<RunMetrics> out;
  for (const Arm arm : arms) {
    cfg.arm = arm;
    auto runs = run_experiment(cfg, max_threads);
    std::move(runs.begin(), runs.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace advise
