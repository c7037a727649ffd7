#include "sgwr/pose.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgwr/error.hpp"

namespace sgwr {
namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "Nose",   "Neck",   "RShoulder", "RElbow",  "RWrist",    "LShoulder", "LElbow",
    "LWrist", "MidHip", "RHip",      "RKnee",   "RAnkle",    "LHip",      "LKnee",
    "LAnkle", "REye",   "LEye",      "REar",    "LEar",      "LBigToe",   "LSmallToe",
    "LHeel",  "RBigToe", "RSmallToe", "RHeel"};

constexpr std::array<std::array<std::size_t, 2>, 24> kBones = {{
    {1, 8},   {1, 2},   {1, 5},   {2, 3},   {3, 4},   {5, 6},   {6, 7},   {8, 9},
    {9, 10},  {10, 11}, {8, 12},  {12, 13}, {13, 14}, {1, 0},   {0, 15},  {15, 17},
    {0, 16},  {16, 18}, {14, 19}, {19, 20}, {14, 21}, {11, 22}, {22, 23}, {11, 24},
}};

// Last run of digits in a filename, e.g. "video_000000000042_keypoints.json" -> 42.
std::optional<std::uint64_t> embedded_frame_number(const std::string& name) {
  std::optional<std::uint64_t> found;
  std::size_t i = 0;
  while (i < name.size()) {
    if (std::isdigit(static_cast<unsigned char>(name[i]))) {
      std::size_t j = i;
      while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) ++j;
      std::uint64_t value = 0;
      auto [ptr, ec] = std::from_chars(name.data() + i, name.data() + j, value);
      if (ec == std::errc{}) found = value;
      i = j;
    } else {
      ++i;
    }
  }
  return found;
}

}  // namespace

std::string_view joint_name(std::size_t joint) {
  if (joint >= kJointCount) return "Unknown";
  return kJointNames[joint];
}

std::span<const std::array<std::size_t, 2>> body25_bones() { return kBones; }

KeypointFrame normalize_frame(std::span<const Keypoint> raw, ImageDims dims, std::size_t frame_index) {
  if (raw.size() != kJointCount) {
    throw MalformedFrameError("malformed frame: expected " + std::to_string(kJointCount) +
                              " joints, got " + std::to_string(raw.size()));
  }
  if (!(dims.width > 0.0) || !(dims.height > 0.0)) {
    throw MalformedFrameError("malformed frame: image dimensions must be positive");
  }
  KeypointFrame out;
  out.frame_index = frame_index;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const Keypoint& k = raw[j];
    if (k.confidence <= 0.0) {
      out.joints[j] = Keypoint{0.0, 0.0, 0.0};
      continue;
    }
    out.joints[j] = Keypoint{std::clamp(k.x / dims.width, 0.0, 1.0),
                             std::clamp(k.y / dims.height, 0.0, 1.0),
                             std::clamp(k.confidence, 0.0, 1.0)};
  }
  return out;
}

SampleVector flatten(const KeypointFrame& frame) {
  SampleVector s;
  s.values.resize(kSampleDim);
  s.mask.resize(kJointCount);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const bool m = frame.masked(j);
    s.mask[j] = m;
    s.values[2 * j] = m ? 0.0 : frame.joints[j].x;
    s.values[2 * j + 1] = m ? 0.0 : frame.joints[j].y;
  }
  return s;
}

KeypointFrame unflatten(const SampleVector& sample, std::size_t frame_index) {
  if (sample.size() != kSampleDim) {
    throw DimensionError("unflatten: expected " + std::to_string(kSampleDim) + " components");
  }
  KeypointFrame f;
  f.frame_index = frame_index;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (sample.masked(j)) {
      f.joints[j] = Keypoint{0.0, 0.0, 0.0};
    } else {
      f.joints[j] = Keypoint{sample.values[2 * j], sample.values[2 * j + 1], 1.0};
    }
  }
  return f;
}

KeypointFrame unflatten(const SampleVector& sample, const KeypointFrame& confidences) {
  KeypointFrame f = unflatten(sample, confidences.frame_index);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (!sample.masked(j)) f.joints[j].confidence = confidences.joints[j].confidence;
  }
  return f;
}

std::vector<SampleVector> flatten(const PoseSequence& seq) {
  std::vector<SampleVector> out;
  out.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.push_back(flatten(f));
  return out;
}

KeypointFrame parse_openpose_frame(std::string_view text, ImageDims dims, std::size_t frame_index) {
  const auto doc = nlohmann::json::parse(text);
  std::array<Keypoint, kJointCount> raw{};
  const auto people = doc.find("people");
  if (people == doc.end() || !people->is_array()) {
    throw MalformedFrameError("missing \"people\" array");
  }
  if (people->empty()) {
    return normalize_frame(raw, dims, frame_index);
  }
  const auto& kp = people->at(0).at("pose_keypoints_2d");
  if (!kp.is_array() || kp.size() != 3 * kJointCount) {
    throw MalformedFrameError("pose_keypoints_2d must hold " + std::to_string(3 * kJointCount) +
                              " values, got " + std::to_string(kp.size()));
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    raw[j] = Keypoint{kp[3 * j].get<double>(), kp[3 * j + 1].get<double>(), kp[3 * j + 2].get<double>()};
  }
  return normalize_frame(raw, dims, frame_index);
}

PoseSequence ingest_openpose_dir(const std::string& path, ImageDims dims, std::string label) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(path, ec)) {
    throw IngestError("ingest: not a directory: " + path);
  }
  struct Entry {
    std::uint64_t number;
    std::string name;
    fs::path path;
  };
  std::vector<Entry> entries;
  for (const auto& de : fs::directory_iterator(path)) {
    if (!de.is_regular_file()) continue;
    if (de.path().extension() != ".json") continue;
    const std::string name = de.path().filename().string();
    entries.push_back({embedded_frame_number(name).value_or(0), name, de.path()});
  }
  if (entries.empty()) {
    throw IngestError("ingest: no frames found in " + path);
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.number != b.number ? a.number < b.number : a.name < b.name;
  });

  PoseSequence seq;
  seq.source_dims = dims;
  seq.label = label.empty() ? fs::path(path).filename().string() : std::move(label);
  seq.frames.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::ifstream in(entries[i].path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      seq.frames.push_back(parse_openpose_frame(buf.str(), dims, i));
    } catch (const std::exception& e) {
      throw IngestError("ingest: cannot parse " + entries[i].path.string() + ": " + e.what());
    }
  }
  return seq;
}

}  // namespace sgwr
