#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advise/action.hpp"
#include "advise/error.hpp"
#include "advise/random.hpp"
#include "advise/state.hpp"

namespace advise {

// Draws a classifier (or trainer) output: the true label with probability
// `accuracy`, otherwise one of the other labels uniformly.
inline int noisy_label(int true_label, double accuracy, int num_labels, RandomStream& rng) {
  if (rng.uniform() < accuracy || num_labels < 2) return true_label;
  const int other = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_labels - 1)));
  return other >= true_label ? other + 1 : other;
}

// Activity dynamics plus the per-activity accuracy of both feature sets.
struct ActivityModel {
  int num_activities = 20;
  // Row-stochastic; empty means "stay with stay_probability, else move
  // uniformly to another activity".
  std::vector<std::vector<double>> transition;
  double stay_probability = 0.9;
  // When non-empty, activities are replayed from this trace each episode.
  std::vector<int> trace;
  std::vector<double> low_accuracy;
  std::vector<double> high_accuracy;

  // Default synthetic set: most activities are recognized well by the low
  // set, a few are hard for it and need the high set.
  static ActivityModel synthetic(int num_activities = 20, int num_hard = 5) {
    ActivityModel m;
    m.num_activities = num_activities;
    m.low_accuracy.assign(static_cast<std::size_t>(num_activities), 0.8);
    m.high_accuracy.assign(static_cast<std::size_t>(num_activities), 0.9);
    for (int k = num_activities - num_hard; k < num_activities; ++k) {
      m.low_accuracy[static_cast<std::size_t>(k)] = 0.3;
    }
    return m;
  }

  void validate(int steps_per_episode) const {
    const auto n = static_cast<std::size_t>(num_activities);
    if (num_activities < 2) throw ConfigError("activities.count", "need at least 2 activities");
    if (low_accuracy.size() != n) {
      throw ConfigError("activities.low_accuracy", "expected one accuracy per activity");
    }
    if (high_accuracy.size() != n) {
      throw ConfigError("activities.high_accuracy", "expected one accuracy per activity");
    }
    for (std::size_t k = 0; k < n; ++k) {
      const std::string at = "[" + std::to_string(k) + "]";
      if (!(low_accuracy[k] >= 0.0 && low_accuracy[k] <= 1.0)) {
        throw ConfigError("activities.low_accuracy" + at, "must be in [0, 1]");
      }
      if (!(high_accuracy[k] >= 0.0 && high_accuracy[k] <= 1.0)) {
        throw ConfigError("activities.high_accuracy" + at, "must be in [0, 1]");
      }
      if (high_accuracy[k] < low_accuracy[k]) {
        throw ConfigError("activities.high_accuracy" + at,
                          "high-set accuracy must not be below low-set accuracy");
      }
    }
    if (transition.empty()) {
      if (!(stay_probability >= 0.0 && stay_probability <= 1.0)) {
        throw ConfigError("activities.stay_probability", "must be in [0, 1]");
      }
    } else {
      if (transition.size() != n) {
        throw ConfigError("activities.transition", "expected one row per activity");
      }
      for (std::size_t i = 0; i < n; ++i) {
        const std::string at = "activities.transition[" + std::to_string(i) + "]";
        if (transition[i].size() != n) throw ConfigError(at, "expected one entry per activity");
        double total = 0.0;
        for (const double p : transition[i]) {
          if (!(p >= 0.0)) throw ConfigError(at, "entries must be non-negative");
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ConfigError(at, "row must sum to 1");
      }
    }
    if (!trace.empty()) {
      if (trace.size() < static_cast<std::size_t>(steps_per_episode)) {
        throw ConfigError("activities.trace", "trace shorter than one episode");
      }
      for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i] < 0 || trace[i] >= num_activities) {
          throw ConfigError("activities.trace[" + std::to_string(i) + "]", "label out of range");
        }
      }
    }
  }

  [[nodiscard]] int initial(RandomStream& rng) const {
    if (!trace.empty()) return trace.front();
    return static_cast<int>(rng.below(static_cast<std::uint64_t>(num_activities)));
  }

  [[nodiscard]] int next(int current, RandomStream& rng) const {
    if (transition.empty()) {
      if (rng.uniform() < stay_probability) return current;
      return noisy_label(current, 0.0, num_activities, rng);
    }
    const auto& row = transition[static_cast<std::size_t>(current)];
    double u = rng.uniform();
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (u < row[k]) return static_cast<int>(k);
      u -= row[k];
    }
    return current;  // rounding slack in the row sum
  }
};

class SimClassifier {
public:
  SimClassifier(std::vector<double> accuracy, int num_labels)
      : accuracy_(std::move(accuracy)), num_labels_(num_labels) {}

  int classify(int true_label, RandomStream& rng) const {
    return noisy_label(true_label, accuracy_.at(static_cast<std::size_t>(true_label)),
                       num_labels_, rng);
  }

  [[nodiscard]] double accuracy(int label) const {
    return accuracy_.at(static_cast<std::size_t>(label));
  }

private:
  std::vector<double> accuracy_;
  int num_labels_;
};

// Per-step energy of each feature set, in mC.
struct PowerModel {
  double cost_low = 0.04;
  double cost_high = 0.20;
  double target = 16.7;  // per-episode budget
  int cap = 100;         // saturation of the state's power bucket

  void validate() const {
    if (!(cost_low > 0.0)) throw ConfigError("power.cost_low", "must be positive");
    if (!(cost_high > cost_low)) throw ConfigError("power.cost_high", "must exceed cost_low");
    if (!(target > 0.0) || !std::isfinite(target)) {
      throw ConfigError("power.target", "must be positive");
    }
    if (cap < 1) throw ConfigError("power.cap", "must be at least 1");
  }

  [[nodiscard]] double cost(Action a) const {
    return a == Action::LowFeatures ? cost_low : cost_high;
  }
};

struct EpisodeConfig {
  int length_min = 20;
  int step_seconds = 5;
  double lambda = 1.0;

  [[nodiscard]] int steps() const { return length_min * 60 / step_seconds; }

  void validate() const {
    if (length_min < 1) throw ConfigError("episode.length_min", "must be at least 1");
    if (step_seconds < 1) throw ConfigError("episode.step_seconds", "must be at least 1");
    if ((length_min * 60) % step_seconds != 0) {
      throw ConfigError("episode.step_seconds", "must divide the episode length");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw ConfigError("episode.lambda", "must be positive");
    }
  }
};

struct EnvironmentConfig {
  ActivityModel activities = ActivityModel::synthetic();
  PowerModel power;
  EpisodeConfig episode;

  void validate() const {
    episode.validate();
    power.validate();
    activities.validate(episode.steps());
  }
};

// r = -lambda * p_e - (P / P_tgt)^2
inline double episode_reward(double error_rate, double power_mC, const PowerModel& pm,
                             double lambda) {
  detail::require(std::isfinite(error_rate) && error_rate >= 0.0 && error_rate <= 1.0,
                  "error rate must be in [0, 1]");
  detail::require(std::isfinite(power_mC) && power_mC >= 0.0, "power must be finite and >= 0");
  detail::require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
  const double normalized = power_mC / pm.target;
  return -lambda * error_rate - normalized * normalized;
}

struct StepRecord {
  int true_label = 0;
  int c_low = 0;
  std::optional<int> c_high;  // only when the high set was computed
  double power_delta = 0.0;

  // The classification the host acts on this step.
  [[nodiscard]] int selected() const { return c_high.value_or(c_low); }
};

inline double error_rate(std::span<const StepRecord> records) {
  detail::require(!records.empty(), "error_rate: episode has no steps");
  std::size_t wrong = 0;
  for (const auto& r : records) wrong += r.selected() != r.true_label ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(records.size());
}

struct StepResult {
  State next;
  StepRecord record;
  bool terminal = false;
  double reward = 0.0;  // nonzero only on the terminal step
  double cumulative_power = 0.0;
};

// Episodic simulated wearable. Activity dynamics and both classifiers draw
// from separate streams, and both classifiers run every step, so runs with
// the same seed see identical activities and classifier outputs regardless
// of the actions taken.
class WearableEnvironment {
public:
  WearableEnvironment(EnvironmentConfig cfg, std::uint64_t master_seed)
      : cfg_(std::move(cfg)),
        low_(cfg_.activities.low_accuracy, cfg_.activities.num_activities),
        high_(cfg_.activities.high_accuracy, cfg_.activities.num_activities),
        activity_rng_(master_seed, "environment.activity"),
        low_rng_(master_seed, "environment.classifier.low"),
        high_rng_(master_seed, "environment.classifier.high") {
    cfg_.validate();
  }

  // Starts a new episode. The first observation carries a low-set
  // classification of the starting activity; it is not charged power.
  State reset() {
    steps_ = 0;
    low_steps_ = 0;
    high_steps_ = 0;
    records_.clear();
    records_.reserve(static_cast<std::size_t>(cfg_.episode.steps()));
    activity_ = cfg_.activities.initial(activity_rng_);
    state_ = State{0, 0, low_.classify(activity_, low_rng_)};
    active_ = true;
    return state_;
  }

  StepResult step(Action a) {
    if (!active_) throw StateError("step called on a terminated episode; call reset()");
    if (!cfg_.activities.trace.empty()) {
      const auto& trace = cfg_.activities.trace;
      activity_ = trace[static_cast<std::size_t>(steps_) % trace.size()];
    } else {
      activity_ = cfg_.activities.next(activity_, activity_rng_);
    }
    const int c_low = low_.classify(activity_, low_rng_);
    const int c_high = high_.classify(activity_, high_rng_);

    ++steps_;
    if (a == Action::LowFeatures) {
      ++low_steps_;
    } else {
      ++high_steps_;
    }

    StepResult out;
    out.record.true_label = activity_;
    out.record.c_low = c_low;
    if (a == Action::HighFeatures) out.record.c_high = c_high;
    out.record.power_delta = cfg_.power.cost(a);
    records_.push_back(out.record);

    out.cumulative_power = cumulative_power();
    const double elapsed_s = static_cast<double>(steps_) * cfg_.episode.step_seconds;
    state_ = State{static_cast<std::int32_t>(std::lround(elapsed_s / 60.0)),
                   static_cast<std::int32_t>(
                       std::min<long>(cfg_.power.cap, std::lround(out.cumulative_power))),
                   c_low};
    out.next = state_;
    out.terminal = steps_ >= cfg_.episode.steps();
    if (out.terminal) {
      active_ = false;
      out.reward = episode_reward(error_rate(records_), out.cumulative_power, cfg_.power,
                                  cfg_.episode.lambda);
    }
    return out;
  }

  // Counted per action so a fixed policy's total is exactly n * cost.
  [[nodiscard]] double cumulative_power() const {
    return static_cast<double>(low_steps_) * cfg_.power.cost_low +
           static_cast<double>(high_steps_) * cfg_.power.cost_high;
  }

  [[nodiscard]] const State& state() const noexcept { return state_; }
  [[nodiscard]] bool terminated() const noexcept { return !active_; }
  [[nodiscard]] int steps_taken() const noexcept { return steps_; }
  [[nodiscard]] int high_steps() const noexcept { return high_steps_; }
  [[nodiscard]] int current_activity() const noexcept { return activity_; }
  [[nodiscard]] std::span<const StepRecord> records() const noexcept { return records_; }
  [[nodiscard]] const EnvironmentConfig& config() const noexcept { return cfg_; }

private:
  EnvironmentConfig cfg_;
  SimClassifier low_;
  SimClassifier high_;
  RandomStream activity_rng_;
  RandomStream low_rng_;
  RandomStream high_rng_;
  State state_{};
  int activity_ = 0;
  int steps_ = 0;
  int low_steps_ = 0;
  int high_steps_ = 0;
  bool active_ = false;
  std::vector<StepRecord> records_;
};

inline StepResult env_step(WearableEnvironment& env, Action a) { return env.step(a); }

// Plain-text label trace: one integer label per line. Blank lines are skipped.
inline std::vector<int> load_label_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open label trace");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) {
      throw IoError(path, "line " + std::to_string(line_no) + ": expected an integer label");
    }
    labels.push_back(value);
  }
  return labels;
}

}  // namespace advise
