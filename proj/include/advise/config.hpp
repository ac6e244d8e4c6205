#pragma once

// Experiment configuration files: flat `key = value` lines with dotted keys.
// A `[section]` line prefixes the keys that follow it, so
//
//   [rl]
//   tau = 0.1
//
// is the same as `rl.tau = 0.1`. `#` starts a comment. Lists are
// comma-separated. Unknown keys are rejected.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "advise/environment.hpp"
#include "advise/error.hpp"
#include "advise/experiment.hpp"

namespace advise {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class ConfigEntries {
public:
  void add(std::string key, std::string value, int line) {
    if (entries_.contains(key)) {
      throw ConfigError(key, "duplicate key (line " + std::to_string(line) + ")");
    }
    entries_.emplace(std::move(key), Entry{std::move(value), line});
  }

  [[nodiscard]] bool has(const std::string& key) const { return entries_.contains(key); }

  // Removes and returns the raw value.
  std::optional<std::string> take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    std::string v = std::move(it->second.value);
    entries_.erase(it);
    return v;
  }

  double take_double(const std::string& key, double fallback) {
    const auto v = take(key);
    return v ? parse_double(key, *v) : fallback;
  }

  long long take_int(const std::string& key, long long fallback) {
    const auto v = take(key);
    return v ? parse_int(key, *v) : fallback;
  }

  std::optional<std::vector<double>> take_doubles(const std::string& key) {
    const auto v = take(key);
    if (!v) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_double(key, item));
    return out;
  }

  std::optional<std::vector<long long>> take_ints(const std::string& key) {
    const auto v = take(key);
    if (!v) return std::nullopt;
    std::vector<long long> out;
    for (const auto& item : split_list(*v)) out.push_back(parse_int(key, item));
    return out;
  }

  void reject_leftovers() const {
    if (!entries_.empty()) {
      const auto& [key, entry] = *entries_.begin();
      throw ConfigError(key, "unknown key (line " + std::to_string(entry.line) + ")");
    }
  }

  static double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
  }

  static long long parse_int(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigError(key, "expected an integer, got '" + text + "'");
    }
    return v;
  }

private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries_;
};

inline ConfigEntries parse_entries(std::istream& in) {
  ConfigEntries entries;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no), "empty key");
    if (!section.empty()) key = section + "." + key;
    entries.add(std::move(key), trim(std::string_view(line).substr(eq + 1)), line_no);
  }
  return entries;
}

inline std::vector<double> per_activity(const std::string& key, std::optional<std::vector<double>> v,
                                        double fallback, int count) {
  const auto n = static_cast<std::size_t>(count);
  if (!v) return std::vector<double>(n, fallback);
  if (v->size() == 1) return std::vector<double>(n, v->front());
  if (v->size() != n) {
    throw ConfigError(key, "expected 1 or " + std::to_string(count) + " values, got " +
                               std::to_string(v->size()));
  }
  return *v;
}

}  // namespace detail

// Builds and validates an ExperimentConfig. Relative file references
// (activities.trace_file) resolve against `base_dir`.
inline ExperimentConfig parse_config(std::istream& in,
                                     const std::filesystem::path& base_dir = ".") {
  auto e = detail::parse_entries(in);
  ExperimentConfig cfg;

  if (const auto arm = e.take("experiment.arm")) {
    const auto parsed = parse_arm(*arm);
    if (!parsed) throw ConfigError("experiment.arm", "unknown arm '" + *arm + "'");
    cfg.arm = *parsed;
  }
  cfg.episodes = static_cast<int>(e.take_int("experiment.episodes", cfg.episodes));
  if (const auto seeds = e.take_ints("experiment.seeds")) {
    cfg.seeds.clear();
    for (const long long s : *seeds) {
      if (s < 0) throw ConfigError("experiment.seeds", "seeds must be non-negative");
      cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  cfg.smoothing_window =
      static_cast<int>(e.take_int("experiment.smoothing_window", cfg.smoothing_window));

  cfg.rl.gamma = e.take_double("rl.gamma", cfg.rl.gamma);
  cfg.rl.alpha = e.take_double("rl.alpha", cfg.rl.alpha);
  cfg.rl.tau = e.take_double("rl.tau", cfg.rl.tau);
  if (const auto q0 = e.take("rl.q_init"); q0 && *q0 != "pessimistic") {
    cfg.q_init = detail::ConfigEntries::parse_double("rl.q_init", *q0);
  }

  auto& power = cfg.env.power;
  power.cost_low = e.take_double("power.cost_low", power.cost_low);
  power.cost_high = e.take_double("power.cost_high", power.cost_high);
  power.target = e.take_double("power.target", power.target);
  power.cap = static_cast<int>(e.take_int("power.cap", power.cap));

  auto& episode = cfg.env.episode;
  episode.length_min = static_cast<int>(e.take_int("episode.length_min", episode.length_min));
  episode.step_seconds = static_cast<int>(e.take_int("episode.step_seconds", episode.step_seconds));
  episode.lambda = e.take_double("episode.lambda", episode.lambda);

  auto& act = cfg.env.activities;
  act.num_activities = static_cast<int>(e.take_int("activities.count", 20));
  if (act.num_activities < 2) throw ConfigError("activities.count", "need at least 2 activities");
  act.stay_probability = e.take_double("activities.stay_probability", act.stay_probability);
  act.low_accuracy = detail::per_activity("activities.low_accuracy",
                                          e.take_doubles("activities.low_accuracy"), 0.8,
                                          act.num_activities);
  act.high_accuracy = detail::per_activity("activities.high_accuracy",
                                           e.take_doubles("activities.high_accuracy"), 0.9,
                                           act.num_activities);
  std::vector<long long> hard;
  if (const auto listed = e.take("activities.hard")) {
    for (const auto& item : detail::split_list(*listed)) {
      hard.push_back(detail::ConfigEntries::parse_int("activities.hard", item));
    }
  } else {
    for (int k = act.num_activities - act.num_activities / 4; k < act.num_activities; ++k) {
      hard.push_back(k);
    }
  }
  const double hard_low = e.take_double("activities.hard_low_accuracy", 0.3);
  const double hard_high = e.take_double("activities.hard_high_accuracy", 0.9);
  for (const long long k : hard) {
    if (k < 0 || k >= act.num_activities) {
      throw ConfigError("activities.hard", "activity " + std::to_string(k) + " out of range");
    }
    act.low_accuracy[static_cast<std::size_t>(k)] = hard_low;
    act.high_accuracy[static_cast<std::size_t>(k)] = hard_high;
  }
  if (const auto matrix = e.take_doubles("activities.transition")) {
    const auto n = static_cast<std::size_t>(act.num_activities);
    if (matrix->size() != n * n) {
      throw ConfigError("activities.transition", "expected count*count row-major entries");
    }
    act.transition.assign(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) act.transition[i][j] = (*matrix)[i * n + j];
    }
  }
  if (const auto trace = e.take("activities.trace_file")) {
    std::filesystem::path p(*trace);
    if (p.is_relative()) p = base_dir / p;
    act.trace = load_label_trace(p.string());
  }

  auto& c = cfg.consistency;
  c.alpha0 = e.take_double("consistency.alpha0", c.alpha0);
  c.initial = e.take_double("consistency.initial", c.initial);
  c.q_tilde = e.take_double("consistency.q_tilde", c.q_tilde);
  c.h_tilde = e.take_double("consistency.h_tilde", c.h_tilde);
  c.em.max_iters = static_cast<int>(e.take_int("consistency.em_max_iters", c.em.max_iters));
  c.em.tol = e.take_double("consistency.em_tol", c.em.tol);

  const long long num_trainers =
      e.take_int("trainers.count", static_cast<long long>(cfg.trainers.size()));
  if (num_trainers < 0) throw ConfigError("trainers.count", "must be non-negative");
  const auto defaults = default_trainers();
  cfg.trainers.clear();
  for (long long n = 0; n < num_trainers; ++n) {
    const std::string at = "trainers." + std::to_string(n) + ".";
    TrainerModel t = static_cast<std::size_t>(n) < defaults.size()
                         ? defaults[static_cast<std::size_t>(n)]
                         : TrainerModel{"t" + std::to_string(n), 0.9, 1.0};
    if (const auto name = e.take(at + "name")) t.name = *name;
    t.accuracy = e.take_double(at + "accuracy", t.accuracy);
    t.feedback_probability = e.take_double(at + "feedback_probability", t.feedback_probability);
    cfg.trainers.push_back(std::move(t));
  }

  e.reject_leftovers();
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::filesystem::path& base_dir = ".") {
  std::istringstream in(text);
  return parse_config(in, base_dir);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config file");
  return parse_config(in, std::filesystem::path(path).parent_path());
}

}  // namespace advise
