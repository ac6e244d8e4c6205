#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>

#include "advise/action.hpp"
#include "advise/environment.hpp"
#include "advise/feedback.hpp"
#include "advise/random.hpp"

namespace advise {

// A host-side sensor classifier (PIR-like, RGB-D-like) acting as a trainer.
struct TrainerModel {
  std::string name;
  double accuracy = 0.9;             // planted reliability of its classification
  double feedback_probability = 1.0; // chance it reports on a given step
};

inline int trainer_classify(const TrainerModel& tm, int true_label, int num_labels,
                            RandomStream& rng) {
  return noisy_label(true_label, tm.accuracy, num_labels, rng);
}

struct FeedbackEvent {
  Action action = Action::LowFeatures;
  FeedbackSign sign = FeedbackSign::Positive;

  friend constexpr bool operator==(const FeedbackEvent&, const FeedbackEvent&) = default;
};

// At most two events per step.
class FeedbackEvents {
public:
  void push(FeedbackEvent e) { events_[size_++] = e; }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
  [[nodiscard]] const FeedbackEvent* begin() const noexcept { return events_.data(); }
  [[nodiscard]] const FeedbackEvent* end() const noexcept { return events_.data() + size_; }
  const FeedbackEvent& operator[](std::size_t i) const { return events_.at(i); }

private:
  std::array<FeedbackEvent, 2> events_{};
  std::size_t size_ = 0;
};

// Host feedback rule:
//  - the low-set label matches the trainer: low is right, high is wrong;
//  - otherwise, if the high set was computed, matches the trainer and the
//    episode is still under its power budget: high is right;
//  - otherwise nothing.
inline FeedbackEvents generate_feedback(int c_trainer, int c_low, std::optional<int> c_high,
                                        double power_so_far, double p_tgt) {
  FeedbackEvents out;
  if (c_low == c_trainer) {
    out.push({Action::LowFeatures, FeedbackSign::Positive});
    out.push({Action::HighFeatures, FeedbackSign::Negative});
  } else if (c_high && *c_high == c_trainer && power_so_far < p_tgt) {
    out.push({Action::HighFeatures, FeedbackSign::Positive});
  }
  return out;
}

}  // namespace advise
