#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

#include "advise/error.hpp"
#include "advise/feedback.hpp"
#include "advise/q_learning.hpp"

namespace advise {

struct EmOptions {
  int max_iters = 100;
  double tol = 1e-9;
};

namespace detail {

inline double log_or_neg_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

inline double log_add(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// One EM run of the consistency estimator from a given starting point.
// The hidden variable is whether the action is optimal: with probability
// p1q it is, and each feedback is then positive with probability C;
// otherwise each feedback is negative with probability C.
inline double em_from(double start, double p1q, std::int64_t h_plus, std::int64_t h_minus,
                      const EmOptions& opts) {
  const double n = static_cast<double>(h_plus + h_minus);
  const double d = static_cast<double>(h_plus - h_minus);
  const double log_p1 = log_or_neg_inf(p1q);
  const double log_p0 = log_or_neg_inf(1.0 - p1q);
  double c = clamp_consistency(start);
  for (int i = 0; i < opts.max_iters; ++i) {
    // E-step: posterior that the action is optimal, from the odds
    // p1q C^d : p0q (1-C)^d.
    const double a = log_p1 + d * std::log(c);
    const double b = log_p0 + d * std::log1p(-c);
    const double p_opt = logistic(a - b);
    const double p_not = logistic(b - a);
    // M-step.
    const double next =
        clamp_consistency((p_opt * static_cast<double>(h_plus) +
                           p_not * static_cast<double>(h_minus)) / n);
    const bool done = std::abs(next - c) < opts.tol;
    c = next;
    if (done) break;
  }
  return c;
}

}  // namespace detail

// log p(h+, h-; C) with the optimality bit marginalized out.
inline double marginal_log_likelihood(double p1q, std::int64_t h_plus, std::int64_t h_minus,
                                      double c) {
  detail::require(p1q >= 0.0 && p1q <= 1.0, "p1q must be in [0, 1]");
  detail::require(c > 0.0 && c < 1.0, "consistency must be in (0, 1)");
  const double hp = static_cast<double>(h_plus);
  const double hm = static_cast<double>(h_minus);
  const double log_c = std::log(c);
  const double log_1mc = std::log1p(-c);
  return detail::log_add(detail::log_or_neg_inf(p1q) + hp * log_c + hm * log_1mc,
                         detail::log_or_neg_inf(1.0 - p1q) + hp * log_1mc + hm * log_c);
}

// Maximum-likelihood consistency of one trainer at one state-action pair.
//
// p1q is the learner's probability of the action (its prior belief that the
// action is optimal). The EM iteration starts at C = 0.5. When p1q = 0.5 that
// start is a stationary point of the likelihood even if it is a minimum, so
// the iteration is also run from 0.75 and 0.25 and the start with the highest
// marginal likelihood wins. Ties keep the earlier start.
inline double em_consistency(double p1q, std::int64_t h_plus, std::int64_t h_minus,
                             const EmOptions& opts = {}) {
  detail::require(std::isfinite(p1q) && p1q >= 0.0 && p1q <= 1.0, "p1q must be in [0, 1]");
  detail::require(h_plus >= 0 && h_minus >= 0, "feedback counts must be non-negative");
  detail::require(opts.max_iters >= 1, "max_iters must be at least 1");
  if (h_plus + h_minus == 0) {
    throw NoFeedbackError("em_consistency: no feedback recorded for this pair");
  }
  constexpr std::array<double, 3> kStarts{0.5, 0.75, 0.25};
  double best = detail::em_from(kStarts[0], p1q, h_plus, h_minus, opts);
  double best_ll = marginal_log_likelihood(p1q, h_plus, h_minus, best);
  for (const double start : std::span(kStarts).subspan(1)) {
    const double c = detail::em_from(start, p1q, h_plus, h_minus, opts);
    const double ll = marginal_log_likelihood(p1q, h_plus, h_minus, c);
    if (ll > best_ll + 1e-12 * std::max(1.0, std::abs(best_ll))) {
      best = c;
      best_ll = ll;
    }
  }
  return best;
}

struct AccuracyMetrics {
  double q_score = 0.0;  // sum over actions of |Q(s,a)|
  double h_score = 0.0;  // sum over actions of h+ + h-
};

template <class StateT, class Hash>
AccuracyMetrics accuracy_metrics(const QTable<StateT, Hash>& table,
                                 const FeedbackLedger<StateT, Hash>& ledger, TrainerId n,
                                 const StateT& s) {
  AccuracyMetrics m;
  const auto q = table.row(s);
  const auto h = ledger.row(n, s);
  for (const Action a : kAllActions) {
    m.q_score += std::abs(q[a]);
    m.h_score += static_cast<double>(h[a].total());
  }
  return m;
}

// Averaged consistency of one trainer plus the running accuracy trackers
// that scale its adaptive learning rate.
struct TrainerEstimate {
  double c_avg = 0.5;
  double q_tilde = 0.1;
  double h_tilde = 0.1;
  double alpha0 = 1.0 / 16.0;
};

// Recursive averaging step. The rate is alpha0 * (Q(s) H(s)) / (Q~ H~), capped
// at 1, computed from the trackers before they are updated.
[[nodiscard]] inline TrainerEstimate update_consistency(TrainerEstimate est, double c_sa,
                                                        double q_score, double h_score) {
  detail::require(std::isfinite(c_sa) && c_sa >= 0.0 && c_sa <= 1.0,
                  "pair consistency must be in [0, 1]");
  detail::require(std::isfinite(q_score) && q_score >= 0.0, "q_score must be >= 0");
  detail::require(std::isfinite(h_score) && h_score >= 0.0, "h_score must be >= 0");
  detail::require(est.q_tilde > 0.0 && est.h_tilde > 0.0, "trackers must be positive");
  const double evidence = q_score * h_score;
  if (!(evidence > 0.0)) return est;
  const double alpha = std::min(1.0, est.alpha0 * evidence / (est.q_tilde * est.h_tilde));
  est.c_avg = clamp_consistency(est.c_avg + alpha * (c_sa - est.c_avg));
  est.q_tilde += alpha * (q_score - est.q_tilde);
  est.h_tilde += alpha * (h_score - est.h_tilde);
  return est;
}

}  // namespace advise
