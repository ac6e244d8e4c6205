#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "advise/action.hpp"
#include "advise/error.hpp"
#include "advise/random.hpp"
#include "advise/state.hpp"

namespace advise {

struct RlHyperParams {
  double gamma = 0.99;  // discount
  double alpha = 0.1;   // Q-learning rate
  double tau = 0.1;     // Boltzmann temperature

  void validate() const {
    detail::require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
    detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must be in (0, 1]");
    detail::require(tau > 0.0 && std::isfinite(tau), "tau must be positive and finite");
  }
};

// State-action values. Pairs that were never written read as the initial
// value, 0 unless constructed otherwise.
template <class StateT, class Hash = DefaultStateHash<StateT>>
class QTable {
public:
  using state_type = StateT;
  using Row = PerAction<double>;

  QTable() = default;
  explicit QTable(double initial_value) : initial_(initial_value) {
    detail::require(std::isfinite(initial_value), "initial Q value must be finite");
  }

  [[nodiscard]] double initial_value() const noexcept { return initial_; }

  [[nodiscard]] double value(const StateT& s, Action a) const {
    const auto it = rows_.find(s);
    return it == rows_.end() ? initial_ : it->second[a];
  }

  [[nodiscard]] Row row(const StateT& s) const {
    const auto it = rows_.find(s);
    return it == rows_.end() ? Row{{initial_, initial_}} : it->second;
  }

  [[nodiscard]] double max_value(const StateT& s) const {
    const Row r = row(s);
    return std::max(r[Action::LowFeatures], r[Action::HighFeatures]);
  }

  // Greedy action; ties go to the lowest action index.
  [[nodiscard]] Action greedy(const StateT& s) const {
    const Row r = row(s);
    return r[Action::HighFeatures] > r[Action::LowFeatures] ? Action::HighFeatures
                                                            : Action::LowFeatures;
  }

  void set(const StateT& s, Action a, double v) {
    detail::require(std::isfinite(v), "Q values must be finite");
    auto [it, inserted] = rows_.try_emplace(s, Row{{initial_, initial_}});
    it->second[a] = v;
  }

  [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }

  [[nodiscard]] const std::unordered_map<StateT, Row, Hash>& rows() const noexcept {
    return rows_;
  }

private:
  std::unordered_map<StateT, Row, Hash> rows_;
  double initial_ = 0.0;
};

// One Watkins Q-learning backup on (s, a). A terminal transition does not
// bootstrap from s_next.
template <class StateT, class Hash>
void q_update(QTable<StateT, Hash>& table, const StateT& s, Action a, double reward,
              const StateT& s_next, bool terminal, const RlHyperParams& hp) {
  detail::require(std::isfinite(reward), "reward must be finite");
  hp.validate();
  const double bootstrap = terminal ? 0.0 : table.max_value(s_next);
  const double q = table.value(s, a);
  table.set(s, a, q + hp.alpha * (reward + hp.gamma * bootstrap - q));
}

// Softmax of Q(s, .) / tau, shifted by the maximum before exponentiation.
inline ActionProbabilities boltzmann_from_values(const PerAction<double>& q, double tau) {
  detail::require(tau > 0.0 && std::isfinite(tau), "temperature must be positive and finite");
  for (const Action a : kAllActions) {
    detail::require(std::isfinite(q[a]), "Q values must be finite");
  }
  const double top = std::max(q[Action::LowFeatures], q[Action::HighFeatures]);
  ActionProbabilities p;
  double total = 0.0;
  for (const Action a : kAllActions) {
    p[a] = std::exp((q[a] - top) / tau);
    total += p[a];
  }
  for (const Action a : kAllActions) p[a] /= total;
  return p;
}

template <class StateT, class Hash>
ActionProbabilities boltzmann_policy(const QTable<StateT, Hash>& table, const StateT& s,
                                     double tau) {
  return boltzmann_from_values(table.row(s), tau);
}

inline void validate_distribution(const ActionProbabilities& p, const char* what) {
  double total = 0.0;
  for (const Action a : kAllActions) {
    if (!std::isfinite(p[a]) || p[a] < 0.0) {
      throw InvalidArgument(std::string(what) + ": probabilities must be finite and non-negative");
    }
    total += p[a];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument(std::string(what) + ": probabilities must sum to 1");
  }
}

inline Action select_action(const ActionProbabilities& policy, RandomStream& rng) {
  validate_distribution(policy, "select_action");
  return rng.uniform() < policy[Action::LowFeatures] ? Action::LowFeatures
                                                     : Action::HighFeatures;
}

}  // namespace advise
