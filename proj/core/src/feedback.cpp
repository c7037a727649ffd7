#include "sgwr/feedback.hpp"

#include <cmath>
#include <cstdio>

#include "sgwr/error.hpp"

namespace sgwr {

std::size_t FeedbackFrame::red_count() const {
  std::size_t n = 0;
  for (auto f : flag) n += f == JointFlag::Red ? 1 : 0;
  return n;
}

FeedbackFrame joint_errors(const KeypointFrame& actual, std::span<const double> expected, double pose_threshold) {
  if (expected.size() != kSampleDim) {
    throw DimensionError("joint_errors: expected pose must have " + std::to_string(kSampleDim) + " components");
  }
  FeedbackFrame out;
  out.frame_index = actual.frame_index;
  double sum = 0.0;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (actual.masked(j)) {
      out.error[j] = 0.0;
      out.flag[j] = JointFlag::Masked;
      continue;
    }
    const double dx = actual.joints[j].x - expected[2 * j];
    const double dy = actual.joints[j].y - expected[2 * j + 1];
    const double sq = dx * dx + dy * dy;
    sum += sq;
    out.error[j] = std::sqrt(sq);
    out.flag[j] = out.error[j] > pose_threshold ? JointFlag::Red : JointFlag::Green;
  }
  out.pose_distance = std::sqrt(sum);
  return out;
}

RunVerdict classify_run(std::span<const FeedbackFrame> frames, double flag_fraction) {
  if (frames.empty()) throw Error("classify_run: no frames");
  std::array<std::size_t, kJointCount> red{};
  std::array<std::size_t, kJointCount> seen{};
  for (const auto& f : frames) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      if (f.flag[j] == JointFlag::Masked) continue;
      ++seen[j];
      if (f.flag[j] == JointFlag::Red) ++red[j];
    }
  }
  RunVerdict v;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    v.erroneous[j] = seen[j] > 0 && static_cast<double>(red[j]) > flag_fraction * static_cast<double>(seen[j]);
  }
  return v;
}

RunVerdict aggregate_flags(std::span<const JointMask> per_frame, double flag_fraction) {
  if (per_frame.empty()) throw Error("aggregate_flags: no frames");
  std::array<std::size_t, kJointCount> red{};
  for (const auto& f : per_frame) {
    for (std::size_t j = 0; j < kJointCount; ++j) red[j] += f[j] ? 1 : 0;
  }
  RunVerdict v;
  const double n = static_cast<double>(per_frame.size());
  for (std::size_t j = 0; j < kJointCount; ++j) v.erroneous[j] = static_cast<double>(red[j]) > flag_fraction * n;
  return v;
}

double score_against_ground_truth(const RunVerdict& verdict, const JointMask& truth) {
  std::size_t agree = 0;
  for (std::size_t j = 0; j < kJointCount; ++j) agree += verdict.erroneous[j] == truth[j] ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(kJointCount);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_overlay(const KeypointFrame& actual, std::span<const double> expected,
                           const FeedbackFrame& feedback, ImageDims dims) {
  if (expected.size() != kSampleDim) throw DimensionError("render_overlay: bad expected pose");
  const double w = dims.width;
  const double h = dims.height;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  svg += "<g id=\"expected\" stroke=\"#0000ff\" stroke-width=\"2\" fill=\"#0000ff\">\n";
  for (const auto& [a, b] : body25_bones()) {
    svg += "<line x1=\"" + fmt(expected[2 * a] * w) + "\" y1=\"" + fmt(expected[2 * a + 1] * h) + "\" x2=\"" +
           fmt(expected[2 * b] * w) + "\" y2=\"" + fmt(expected[2 * b + 1] * h) + "\"/>\n";
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    svg += "<circle cx=\"" + fmt(expected[2 * j] * w) + "\" cy=\"" + fmt(expected[2 * j + 1] * h) + "\" r=\"2\"/>\n";
  }
  svg += "</g>\n";

  svg += "<g id=\"actual\" stroke=\"#00a000\" stroke-width=\"2\">\n";
  for (const auto& [a, b] : body25_bones()) {
    if (actual.masked(a) || actual.masked(b)) continue;
    svg += "<line x1=\"" + fmt(actual.joints[a].x * w) + "\" y1=\"" + fmt(actual.joints[a].y * h) + "\" x2=\"" +
           fmt(actual.joints[b].x * w) + "\" y2=\"" + fmt(actual.joints[b].y * h) + "\"/>\n";
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (feedback.flag[j] == JointFlag::Masked) continue;
    const bool red = feedback.flag[j] == JointFlag::Red;
    svg += "<circle class=\"" + std::string(red ? "joint-red" : "joint-green") + "\" data-joint=\"" +
           std::string(joint_name(j)) + "\" cx=\"" + fmt(actual.joints[j].x * w) + "\" cy=\"" +
           fmt(actual.joints[j].y * h) + "\" r=\"" + (red ? "4" : "3") + "\" fill=\"" +
           (red ? "#ff0000" : "#00a000") + "\"/>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace sgwr
