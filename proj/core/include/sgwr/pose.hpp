#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgwr {

inline constexpr std::size_t kJointCount = 25;
inline constexpr std::size_t kSampleDim = 2 * kJointCount;

// BODY_25 ordering.
enum class Joint : std::size_t {
  Nose = 0,
  Neck,
  RShoulder,
  RElbow,
  RWrist,
  LShoulder,
  LElbow,
  LWrist,
  MidHip,
  RHip,
  RKnee,
  RAnkle,
  LHip,
  LKnee,
  LAnkle,
  REye,
  LEye,
  REar,
  LEar,
  LBigToe,
  LSmallToe,
  LHeel,
  RBigToe,
  RSmallToe,
  RHeel,
};

constexpr std::size_t index(Joint j) { return static_cast<std::size_t>(j); }

std::string_view joint_name(std::size_t joint);

/// Bone list used for drawing skeletons.
std::span<const std::array<std::size_t, 2>> body25_bones();

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct ImageDims {
  double width = 480.0;
  double height = 320.0;

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

/// One timestamped pose with coordinates normalized to [0,1].
/// A joint with confidence 0 is masked and excluded from every distance.
struct KeypointFrame {
  std::array<Keypoint, kJointCount> joints{};
  std::size_t frame_index = 0;

  bool masked(std::size_t joint) const { return joints[joint].confidence <= 0.0; }

  friend bool operator==(const KeypointFrame&, const KeypointFrame&) = default;
};

struct PoseSequence {
  std::vector<KeypointFrame> frames;
  ImageDims source_dims;
  std::string label;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }

  friend bool operator==(const PoseSequence&, const PoseSequence&) = default;
};

/// Flat input vector (x0,y0,...,xn,yn) with one mask bit per joint.
/// An empty mask means nothing is masked. Otherwise values.size() == 2 * mask.size().
struct SampleVector {
  std::vector<double> values;
  std::vector<bool> mask;

  SampleVector() = default;
  explicit SampleVector(std::vector<double> v) : values(std::move(v)) {}
  SampleVector(std::vector<double> v, std::vector<bool> m) : values(std::move(v)), mask(std::move(m)) {}

  std::size_t size() const { return values.size(); }
  bool masked(std::size_t joint) const { return !mask.empty() && mask[joint]; }
  bool component_masked(std::size_t component) const { return masked(component / 2); }

  friend bool operator==(const SampleVector&, const SampleVector&) = default;
};

/// Divides x by width and y by height. Masked joints become (0,0,0).
/// Throws MalformedFrameError when raw does not hold exactly 25 joints.
KeypointFrame normalize_frame(std::span<const Keypoint> raw, ImageDims dims, std::size_t frame_index = 0);

SampleVector flatten(const KeypointFrame& frame);

/// Inverse of flatten. Unmasked joints get confidence 1 unless a template frame supplies them.
KeypointFrame unflatten(const SampleVector& sample, std::size_t frame_index = 0);
KeypointFrame unflatten(const SampleVector& sample, const KeypointFrame& confidences);

std::vector<SampleVector> flatten(const PoseSequence& seq);

/// Reads a directory of OpenPose per-frame JSON files (people[0].pose_keypoints_2d).
/// Frames are ordered by the last number embedded in each filename.
PoseSequence ingest_openpose_dir(const std::string& path, ImageDims dims, std::string label = {});

/// Parses one OpenPose keypoint document. Zero people yields a fully masked frame.
KeypointFrame parse_openpose_frame(std::string_view text, ImageDims dims, std::size_t frame_index);

// Versioned sequence file (JSON text).
inline constexpr int kSequenceFormatVersion = 1;
std::string write_sequence(const PoseSequence& seq);
PoseSequence read_sequence(std::string_view text);
void save_sequence_file(const std::string& path, const PoseSequence& seq);
PoseSequence load_sequence_file(const std::string& path);

}  // namespace sgwr
