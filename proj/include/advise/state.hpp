#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace advise {

// Discretized observation of the wearable: elapsed minutes and cumulative
// power are both rounded to integers, so the state space is finite.
struct State {
  std::int32_t elapsed_min = 0;
  std::int32_t power_bucket = 0;  // rounded cumulative mC, saturating at the cap
  std::int32_t low_class = 0;     // last low-feature classification

  friend constexpr bool operator==(const State&, const State&) = default;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(s.elapsed_min);
    h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(s.power_bucket);
    h = h * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint32_t>(s.low_class);
    return std::hash<std::uint64_t>{}(h ^ (h >> 29));
  }
};

// Hash lookup for any state type: State uses StateHash, everything else std::hash.
template <class S>
struct DefaultStateHash : std::hash<S> {};

template <>
struct DefaultStateHash<State> : StateHash {};

}  // namespace advise
