#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "advise/csv.hpp"
#include "advise/error.hpp"
#include "advise/experiment.hpp"

namespace advise {

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;          // over every (seed, episode) value in the window
  double standard_error = 0.0;  // of the mean, from per-seed window means
  std::size_t count = 0;
  std::vector<double> seed_means;
};

struct ArmSummary {
  Arm arm = Arm::MultiTrainers;
  std::size_t seeds = 0;
  std::map<std::string, MetricStats> metrics;

  [[nodiscard]] const MetricStats& at(const std::string& metric) const {
    const auto it = metrics.find(metric);
    if (it == metrics.end()) {
      throw InvalidArgument("no metric '" + metric + "' for arm " + std::string(to_string(arm)));
    }
    return it->second;
  }
};

struct PairwiseComparison {
  std::string metric;
  Arm first = Arm::MultiTrainers;
  Arm second = Arm::MultiTrainers;
  double difference = 0.0;  // mean(first) - mean(second)
  double pooled_se = 0.0;   // sqrt(se_first^2 + se_second^2)
  char order = '=';         // '>', '<' or '='
  bool significant = false; // |difference| > 2 * pooled_se
};

struct ComparisonReport {
  std::size_t window = 0;
  std::vector<ArmSummary> arms;
  std::vector<PairwiseComparison> pairs;

  [[nodiscard]] const ArmSummary& summary(Arm arm) const {
    for (const auto& s : arms) {
      if (s.arm == arm) return s;
    }
    throw InvalidArgument("arm " + std::string(to_string(arm)) + " not in report");
  }

  [[nodiscard]] const PairwiseComparison& pair(const std::string& metric, Arm first,
                                               Arm second) const {
    for (const auto& p : pairs) {
      if (p.metric == metric && p.first == first && p.second == second) return p;
    }
    throw InvalidArgument("no comparison of " + metric + " between " +
                          std::string(to_string(first)) + " and " + std::string(to_string(second)));
  }

  // Arms carrying `metric`, best (largest mean) first.
  [[nodiscard]] std::vector<Arm> ranking(const std::string& metric) const {
    std::vector<const ArmSummary*> have;
    for (const auto& s : arms) {
      if (s.metrics.contains(metric)) have.push_back(&s);
    }
    std::stable_sort(have.begin(), have.end(), [&](const ArmSummary* a, const ArmSummary* b) {
      return a->at(metric).mean > b->at(metric).mean;
    });
    std::vector<Arm> out;
    for (const auto* s : have) out.push_back(s->arm);
    return out;
  }

  [[nodiscard]] std::string to_text() const;
};

namespace detail {

inline double mean_of(std::span<const double> v) {
  double total = 0.0;
  for (const double x : v) total += x;
  return v.empty() ? 0.0 : total / static_cast<double>(v.size());
}

inline double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline std::vector<std::string> metric_names(std::size_t num_trainers) {
  std::vector<std::string> names{"reward", "error_rate", "power_mC"};
  for (std::size_t n = 0; n < num_trainers; ++n) names.push_back("consistency_t" + std::to_string(n));
  return names;
}

inline std::optional<double> metric_value(const EpisodeMetrics& m, std::size_t which) {
  switch (which) {
    case 0: return m.reward;
    case 1: return m.error_rate;
    case 2: return m.power_mC;
    default: {
      const std::size_t n = which - 3;
      if (n < m.consistency.size()) return m.consistency[n];
      return std::nullopt;
    }
  }
}

}  // namespace detail

// Final-window statistics per arm, plus every ordered pair of arms per metric.
inline ComparisonReport compare_arms(std::span<const RunMetrics> runs, std::size_t window) {
  detail::require(window >= 1, "compare_arms: window must be at least 1");
  std::size_t num_trainers = runs.empty() ? 0 : runs.front().num_trainers;
  std::vector<Arm> arms;
  for (const auto& r : runs) {
    if (r.num_trainers != num_trainers) {
      throw InvalidArgument("compare_arms: runs disagree on the number of consistency columns");
    }
    if (std::find(arms.begin(), arms.end(), r.arm) == arms.end()) arms.push_back(r.arm);
  }
  if (arms.size() < 2) throw InvalidArgument("compare_arms: need at least two arms");

  const auto names = detail::metric_names(num_trainers);
  ComparisonReport report;
  report.window = window;
  for (const Arm arm : arms) {
    ArmSummary summary{arm, 0, {}};
    std::vector<std::vector<double>> all(names.size());
    std::vector<std::vector<double>> seed_means(names.size());
    for (const auto& r : runs) {
      if (r.arm != arm) continue;
      ++summary.seeds;
      const std::size_t n = r.episodes.size();
      const std::size_t first = n > window ? n - window : 0;
      for (std::size_t k = 0; k < names.size(); ++k) {
        std::vector<double> vals;
        for (std::size_t e = first; e < n; ++e) {
          if (const auto v = detail::metric_value(r.episodes[e], k)) vals.push_back(*v);
        }
        if (vals.empty()) continue;
        seed_means[k].push_back(detail::mean_of(vals));
        all[k].insert(all[k].end(), vals.begin(), vals.end());
      }
    }
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (all[k].empty()) continue;
      MetricStats st;
      st.count = all[k].size();
      st.mean = detail::mean_of(all[k]);
      st.stddev = detail::sample_stddev(all[k]);
      st.seed_means = seed_means[k];
      st.standard_error =
          seed_means[k].size() >= 2
              ? detail::sample_stddev(seed_means[k]) / std::sqrt(static_cast<double>(seed_means[k].size()))
              : st.stddev / std::sqrt(static_cast<double>(st.count));
      summary.metrics.emplace(names[k], std::move(st));
    }
    report.arms.push_back(std::move(summary));
  }

  for (const auto& metric : names) {
    for (const auto& a : report.arms) {
      for (const auto& b : report.arms) {
        if (a.arm == b.arm || !a.metrics.contains(metric) || !b.metrics.contains(metric)) continue;
        const auto& sa = a.at(metric);
        const auto& sb = b.at(metric);
        PairwiseComparison p{metric, a.arm, b.arm, sa.mean - sb.mean, 0.0, '=', false};
        p.pooled_se = std::sqrt(sa.standard_error * sa.standard_error +
                                sb.standard_error * sb.standard_error);
        p.order = p.difference > 0.0 ? '>' : (p.difference < 0.0 ? '<' : '=');
        p.significant = std::abs(p.difference) > 2.0 * p.pooled_se;
        report.pairs.push_back(std::move(p));
      }
    }
  }
  return report;
}

inline ComparisonReport compare_arm_files(const std::vector<std::string>& paths, std::size_t window) {
  std::vector<RunMetrics> runs;
  std::optional<std::size_t> num_trainers;
  for (const auto& path : paths) {
    MetricsFile f = load_csv(path);
    if (num_trainers && *num_trainers != f.num_trainers) {
      throw InvalidArgument(path + ": schema differs from the other inputs");
    }
    num_trainers = f.num_trainers;
    std::move(f.runs.begin(), f.runs.end(), std::back_inserter(runs));
  }
  return compare_arms(runs, window);
}

inline std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  char buf[160];
  out << "final-window statistics (last " << window << " episodes per seed)\n";
  for (const auto& s : arms) {
    out << to_string(s.arm) << " (" << s.seeds << " seeds)\n";
    for (const auto& [metric, st] : s.metrics) {
      std::snprintf(buf, sizeof buf, "  %-16s mean %12.6g  sd %10.4g  se %10.4g\n", metric.c_str(),
                    st.mean, st.stddev, st.standard_error);
      out << buf;
    }
  }
  out << "ranking by mean reward:";
  for (const Arm arm : ranking("reward")) out << ' ' << to_string(arm);
  out << '\n';
  out << "pairwise (first - second; significant when |diff| > 2 pooled se)\n";
  for (const auto& p : pairs) {
    std::snprintf(buf, sizeof buf, "  %-16s %-14s %c %-14s diff %12.6g  se %10.4g  %s\n",
                  p.metric.c_str(), std::string(to_string(p.first)).c_str(), p.order,
                  std::string(to_string(p.second)).c_str(), p.difference, p.pooled_se,
                  p.significant ? "significant" : "-");
    out << buf;
  }
  return out.str();
}

// Trailing-window mean of each metric, averaged over the seeds of each arm,
// one row per arm and episode. Same column layout as the metrics CSV minus
// the seed column.
inline void emit_smoothed_curves(std::ostream& out, std::span<const RunMetrics> runs,
                                 std::size_t window) {
  detail::require(window >= 1, "smoothing window must be at least 1");
  const std::size_t num_trainers = runs.empty() ? 0 : runs.front().num_trainers;
  const auto names = detail::metric_names(num_trainers);
  out << "arm,episode";
  for (const auto& n : names) out << ',' << n;
  out << '\n';

  std::vector<Arm> arms;
  for (const auto& r : runs) {
    if (std::find(arms.begin(), arms.end(), r.arm) == arms.end()) arms.push_back(r.arm);
  }
  for (const Arm arm : arms) {
    std::size_t length = 0;
    for (const auto& r : runs) {
      if (r.arm == arm) length = std::max(length, r.episodes.size());
    }
    for (std::size_t e = 0; e < length; ++e) {
      out << to_string(arm) << ',' << e;
      for (std::size_t k = 0; k < names.size(); ++k) {
        double total = 0.0;
        std::size_t seeds = 0;
        for (const auto& r : runs) {
          if (r.arm != arm || e >= r.episodes.size()) continue;
          const std::size_t first = e + 1 > window ? e + 1 - window : 0;
          double sum = 0.0;
          std::size_t count = 0;
          for (std::size_t i = first; i <= e; ++i) {
            if (const auto v = detail::metric_value(r.episodes[i], k)) {
              sum += *v;
              ++count;
            }
          }
          if (count > 0) {
            total += sum / static_cast<double>(count);
            ++seeds;
          }
        }
        out << ',';
        if (seeds > 0) out << detail::format_g6(total / static_cast<double>(seeds));
      }
      out << '\n';
    }
  }
}

}  // namespace advise
