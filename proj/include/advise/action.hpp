#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace advise {

// Which feature set the wearable computes for the next window.
enum class Action : std::size_t { LowFeatures = 0, HighFeatures = 1 };

inline constexpr std::size_t kNumActions = 2;
inline constexpr std::array<Action, kNumActions> kAllActions{Action::LowFeatures,
                                                            Action::HighFeatures};

constexpr std::size_t index(Action a) noexcept { return static_cast<std::size_t>(a); }

constexpr std::string_view to_string(Action a) noexcept {
  return a == Action::LowFeatures ? "LowFeatures" : "HighFeatures";
}

// One value per action, indexed by Action.
template <class T>
struct PerAction {
  std::array<T, kNumActions> values{};

  constexpr T& operator[](Action a) noexcept { return values[index(a)]; }
  constexpr const T& operator[](Action a) const noexcept { return values[index(a)]; }

  friend constexpr bool operator==(const PerAction&, const PerAction&) = default;
};

using ActionProbabilities = PerAction<double>;

}  // namespace advise
