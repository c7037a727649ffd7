#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sgwr/pose.hpp"

namespace sgwr {

enum class JointFlag { Green, Red, Masked };

using JointMask = std::array<bool, kJointCount>;

struct FeedbackFrame {
  std::size_t frame_index = 0;
  std::array<double, kJointCount> error{};
  std::array<JointFlag, kJointCount> flag{};
  double pose_distance = 0.0;

  std::size_t red_count() const;
};

struct RunVerdict {
  JointMask erroneous{};

  friend bool operator==(const RunVerdict&, const RunVerdict&) = default;
};

/// Per-joint 2D error of the actual frame against the expected pose. A joint is red
/// when its error is strictly larger than `pose_threshold`.
FeedbackFrame joint_errors(const KeypointFrame& actual, std::span<const double> expected, double pose_threshold);

/// A joint is erroneous when it is red in more than `flag_fraction` of the frames where it is unmasked.
RunVerdict classify_run(std::span<const FeedbackFrame> frames, double flag_fraction = 0.10);

/// Same aggregation applied to per-frame ground-truth flags.
RunVerdict aggregate_flags(std::span<const JointMask> per_frame, double flag_fraction = 0.10);

/// Fraction of the 25 joints where verdict and truth agree.
double score_against_ground_truth(const RunVerdict& verdict, const JointMask& truth);

/// SVG overlay: expected skeleton in blue, actual skeleton in green with red markers on flagged joints.
std::string render_overlay(const KeypointFrame& actual, std::span<const double> expected,
                           const FeedbackFrame& feedback, ImageDims dims);

}  // namespace sgwr
