#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "advise/action.hpp"
#include "advise/error.hpp"
#include "advise/q_learning.hpp"
#include "advise/state.hpp"

namespace advise {

// Consistency levels are kept away from 0 and 1 so logit(C) stays finite.
inline constexpr double kConsistencyFloor = 1e-6;

inline double clamp_consistency(double c) {
  return std::clamp(c, kConsistencyFloor, 1.0 - kConsistencyFloor);
}

struct TrainerId {
  std::size_t index = 0;

  friend constexpr bool operator==(const TrainerId&, const TrainerId&) = default;
};

enum class FeedbackSign { Positive, Negative };

struct FeedbackCounts {
  std::int64_t h_plus = 0;
  std::int64_t h_minus = 0;

  [[nodiscard]] std::int64_t delta() const noexcept { return h_plus - h_minus; }
  [[nodiscard]] std::int64_t total() const noexcept { return h_plus + h_minus; }

  friend constexpr bool operator==(const FeedbackCounts&, const FeedbackCounts&) = default;
};

// Positive/negative feedback tallies per trainer and state-action pair.
// Counts only ever increase.
template <class StateT, class Hash = DefaultStateHash<StateT>>
class FeedbackLedger {
public:
  using Row = PerAction<FeedbackCounts>;

  explicit FeedbackLedger(std::size_t num_trainers = 1) : per_trainer_(num_trainers) {}

  [[nodiscard]] std::size_t num_trainers() const noexcept { return per_trainer_.size(); }

  void record(TrainerId n, const StateT& s, Action a, FeedbackSign sign) {
    check(n);
    FeedbackCounts& c = per_trainer_[n.index][s][a];
    if (sign == FeedbackSign::Positive) {
      ++c.h_plus;
    } else {
      ++c.h_minus;
    }
  }

  [[nodiscard]] Row row(TrainerId n, const StateT& s) const {
    check(n);
    const auto& m = per_trainer_[n.index];
    const auto it = m.find(s);
    return it == m.end() ? Row{} : it->second;
  }

  [[nodiscard]] FeedbackCounts counts(TrainerId n, const StateT& s, Action a) const {
    return row(n, s)[a];
  }

  [[nodiscard]] std::int64_t delta(TrainerId n, const StateT& s, Action a) const {
    return counts(n, s, a).delta();
  }

private:
  void check(TrainerId n) const {
    if (n.index >= per_trainer_.size()) {
      throw InvalidArgument("trainer index " + std::to_string(n.index) + " out of range");
    }
  }

  std::vector<std::unordered_map<StateT, Row, Hash>> per_trainer_;
};

template <class StateT, class Hash>
void record_feedback(FeedbackLedger<StateT, Hash>& ledger, TrainerId n, const StateT& s,
                     Action a, FeedbackSign sign) {
  ledger.record(n, s, a, sign);
}

namespace detail {

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double c) { return std::log(c) - std::log1p(-c); }

}  // namespace detail

// Probability that an action is optimal given net feedback delta from one
// trainer of consistency c: C^d / (C^d + (1-C)^d), evaluated as a logistic
// of d * logit(C) so large |d| cannot overflow.
inline double single_trainer_policy(std::int64_t delta, double c) {
  const double cc = clamp_consistency(c);
  return detail::logistic(static_cast<double>(delta) * detail::logit(cc));
}

namespace detail {

// log(logistic(x)) without overflow or underflow to -inf.
inline double log_logistic(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace detail

// Feedback policy over the actions. For each action the trainers' evidence
// is held as log-odds that the action is optimal:
// sum_n delta_n(s,a) * logit(C_n), i.e. the log of prod_n C_n^d / (1-C_n)^d.
struct FeedbackPolicy {
  PerAction<double> log_odds{};

  // Probability that `a` is optimal. With one trainer this is exactly
  // single_trainer_policy(delta(s,a), C).
  [[nodiscard]] double weight(Action a) const { return detail::logistic(log_odds[a]); }

  [[nodiscard]] PerAction<double> weights() const {
    PerAction<double> w;
    for (const Action a : kAllActions) w[a] = weight(a);
    return w;
  }

  [[nodiscard]] PerAction<double> log_weights() const {
    PerAction<double> lw;
    for (const Action a : kAllActions) lw[a] = detail::log_logistic(log_odds[a]);
    return lw;
  }

  // Weights normalized over the action set, computed in log space.
  [[nodiscard]] ActionProbabilities normalized() const {
    const auto lw = log_weights();
    const double top = std::max(lw[Action::LowFeatures], lw[Action::HighFeatures]);
    ActionProbabilities p;
    double total = 0.0;
    for (const Action a : kAllActions) {
      p[a] = std::exp(lw[a] - top);
      total += p[a];
    }
    for (const Action a : kAllActions) p[a] /= total;
    return p;
  }
};

template <class StateT, class Hash>
FeedbackPolicy multi_trainer_policy(const FeedbackLedger<StateT, Hash>& ledger,
                                    std::span<const double> consistency, const StateT& s) {
  if (consistency.size() != ledger.num_trainers()) {
    throw InvalidArgument("multi_trainer_policy: expected " +
                          std::to_string(ledger.num_trainers()) + " consistency values, got " +
                          std::to_string(consistency.size()));
  }
  FeedbackPolicy out;
  for (std::size_t n = 0; n < consistency.size(); ++n) {
    const double l = detail::logit(clamp_consistency(consistency[n]));
    const auto row = ledger.row(TrainerId{n}, s);
    for (const Action a : kAllActions) {
      out.log_odds[a] += static_cast<double>(row[a].delta()) * l;
    }
  }
  return out;
}

// pi(s,a) proportional to pi_F(s,a) * pi_R(s,a). pi_f may be unnormalized.
// When the product underflows everywhere the learner's policy is returned.
inline ActionProbabilities fuse_policies(const ActionProbabilities& pi_r,
                                         const PerAction<double>& pi_f) {
  validate_distribution(pi_r, "fuse_policies(pi_r)");
  double f_total = 0.0;
  for (const Action a : kAllActions) {
    detail::require(std::isfinite(pi_f[a]) && pi_f[a] >= 0.0,
                    "fuse_policies(pi_f): weights must be finite and non-negative");
    f_total += pi_f[a];
  }
  detail::require(f_total > 0.0, "fuse_policies(pi_f): weights must not all be zero");

  ActionProbabilities fused;
  double total = 0.0;
  for (const Action a : kAllActions) {
    fused[a] = pi_r[a] * (pi_f[a] / f_total);
    total += fused[a];
  }
  if (!(total > 1e-300)) return pi_r;
  for (const Action a : kAllActions) fused[a] /= total;
  return fused;
}

// Same product, taken in log space so arbitrarily confident feedback cannot
// underflow the feedback side.
inline ActionProbabilities fuse_policies(const ActionProbabilities& pi_r,
                                         const FeedbackPolicy& pi_f) {
  validate_distribution(pi_r, "fuse_policies(pi_r)");
  const auto lw = pi_f.log_weights();
  PerAction<double> log_p;
  double top = -std::numeric_limits<double>::infinity();
  for (const Action a : kAllActions) {
    log_p[a] = pi_r[a] > 0.0 ? std::log(pi_r[a]) + lw[a]
                             : -std::numeric_limits<double>::infinity();
    top = std::max(top, log_p[a]);
  }
  if (top == -std::numeric_limits<double>::infinity()) return pi_r;
  ActionProbabilities fused;
  double total = 0.0;
  for (const Action a : kAllActions) {
    fused[a] = std::exp(log_p[a] - top);
    total += fused[a];
  }
  for (const Action a : kAllActions) fused[a] /= total;
  return fused;
}

}  // namespace advise
