#include "sgwr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "sgwr/error.hpp"

namespace sgwr {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct P3 {
  double x = 0.0;  // lateral, +x = image right
  double y = 0.0;  // up
  double z = 0.0;  // toward the camera
};

P3 operator+(P3 a, P3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
P3 operator*(double s, P3 a) { return {s * a.x, s * a.y, s * a.z}; }

// Forward pitch about the lateral axis: points above the pivot move toward the camera and down.
P3 pitch(P3 p, double rad) {
  return {p.x, p.y * std::cos(rad) - p.z * std::sin(rad), p.y * std::sin(rad) + p.z * std::cos(rad)};
}

// Lateral tilt in the image plane, positive toward image right.
P3 tilt(P3 p, double rad) {
  return {p.x * std::cos(rad) + p.y * std::sin(rad), -p.x * std::sin(rad) + p.y * std::cos(rad), p.z};
}

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

std::string_view variant_name(ExerciseVariant v) {
  switch (v) {
    case ExerciseVariant::Correct: return "Correct";
    case ExerciseVariant::Arms: return "Arms";
    case ExerciseVariant::Head: return "Head";
    case ExerciseVariant::Legs: return "Legs";
    case ExerciseVariant::Side: return "Side";
    case ExerciseVariant::Speed: return "Speed";
  }
  return "Correct";
}

std::optional<ExerciseVariant> parse_variant(std::string_view name) {
  for (auto v : kAllVariants) {
    std::string a(variant_name(v));
    std::string b(name);
    std::transform(a.begin(), a.end(), a.begin(), ::tolower);
    std::transform(b.begin(), b.end(), b.begin(), ::tolower);
    if (a == b) return v;
  }
  return std::nullopt;
}

VariantKinematics VariantKinematics::of(ExerciseVariant v) {
  VariantKinematics k;
  switch (v) {
    case ExerciseVariant::Correct: break;
    case ExerciseVariant::Arms: k.max_arm_abduction_deg = 15.0; break;
    case ExerciseVariant::Head: k.head_pitch_deg = 60.0; break;
    case ExerciseVariant::Legs: k.max_knee_flexion_deg = 15.0; break;
    case ExerciseVariant::Side: k.torso_tilt_deg = 15.0; break;
    case ExerciseVariant::Speed: k.speed = 2.0; break;
  }
  return k;
}

std::array<NamedPerturbation, 4> standard_perturbations(double cm_to_px) {
  return {{{"centered", {0.0, 0.0, cm_to_px}},
           {"rotation", {5.0, 0.0, cm_to_px}},
           {"translation", {0.0, 5.0, cm_to_px}},
           {"rotation_translation", {5.0, 5.0, cm_to_px}}}};
}

JointMask variant_affected_joints(ExerciseVariant v) {
  using J = Joint;
  JointMask m{};
  auto set = [&](std::initializer_list<J> js) {
    for (J j : js) m[index(j)] = true;
  };
  const std::initializer_list<J> head = {J::Nose, J::REye, J::LEye, J::REar, J::LEar};
  const std::initializer_list<J> arms = {J::RElbow, J::RWrist, J::LElbow, J::LWrist};
  const std::initializer_list<J> trunk = {J::Neck, J::RShoulder, J::LShoulder};
  const std::initializer_list<J> legs = {J::MidHip, J::RHip, J::LHip, J::RKnee, J::LKnee};
  switch (v) {
    case ExerciseVariant::Correct: break;
    case ExerciseVariant::Arms: set(arms); break;
    case ExerciseVariant::Head: set(head); break;
    case ExerciseVariant::Side:
      set(head);
      set(arms);
      set(trunk);
      break;
    case ExerciseVariant::Legs:
    case ExerciseVariant::Speed:
      set(head);
      set(arms);
      set(trunk);
      set(legs);
      break;
  }
  return m;
}

AvatarSpec make_avatar(std::uint64_t seed, int avatar_id) {
  AvatarSpec a;
  a.avatar_id = avatar_id;
  a.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> factor(0.8, 1.2);
  a.torso *= factor(rng);
  a.upper_arm *= factor(rng);
  a.forearm *= factor(rng);
  a.thigh *= factor(rng);
  a.shin *= factor(rng);
  a.shoulder_width *= factor(rng);
  a.hip_width *= factor(rng);
  a.head *= factor(rng);
  return a;
}

double squat_phase(std::size_t t, std::size_t n) {
  auto at = [n](double f) { return static_cast<std::size_t>(std::lround(f * static_cast<double>(n))); };
  const std::size_t descend = at(0.10);
  const std::size_t bottom = at(0.46);
  const std::size_t ascend = at(0.56);
  const std::size_t stand = at(0.91);
  if (t < descend || t >= stand) return 0.0;
  if (t < bottom) return smoothstep(static_cast<double>(t - descend + 1) / static_cast<double>(bottom - descend));
  if (t < ascend) return 1.0;
  return 1.0 - smoothstep(static_cast<double>(t - ascend + 1) / static_cast<double>(stand - ascend));
}

KeypointFrame pose_at(const AvatarSpec& a, double knee_flexion_deg, double arm_abduction_deg, double torso_lean_deg,
                      double torso_tilt_deg, double head_pitch_deg, ImageDims dims) {
  const double s = a.scale;
  const double phi = knee_flexion_deg * kDeg;
  const double shin_angle = phi / 3.0;
  const double thigh_angle = 2.0 * phi / 3.0;
  const double theta = arm_abduction_deg * kDeg;

  std::array<P3, kJointCount> p{};

  // Legs; side = -1 is the performer's right, which faces image left.
  double hip_y = 0.0;
  double hip_z = 0.0;
  for (int side : {-1, 1}) {
    const double sd = static_cast<double>(side);
    const P3 ankle{sd * 0.5 * a.hip_width * s, 0.0, 0.0};
    const P3 knee = ankle + P3{sd * 0.5 * a.shin * s * std::sin(phi), a.shin * s * std::cos(shin_angle),
                               a.shin * s * std::sin(shin_angle)};
    const P3 hip{sd * 0.5 * a.hip_width * s, knee.y + a.thigh * s * std::cos(thigh_angle),
                 knee.z - a.thigh * s * std::sin(thigh_angle)};
    const P3 heel = ankle + s * P3{0.0, -0.015, -0.03};
    const P3 big_toe = ankle + s * P3{-sd * 0.01, -0.03, 0.12};
    const P3 small_toe = ankle + s * P3{sd * 0.025, -0.025, 0.10};
    hip_y = hip.y;
    hip_z = hip.z;
    if (side < 0) {
      p[index(Joint::RAnkle)] = ankle;
      p[index(Joint::RKnee)] = knee;
      p[index(Joint::RHip)] = hip;
      p[index(Joint::RHeel)] = heel;
      p[index(Joint::RBigToe)] = big_toe;
      p[index(Joint::RSmallToe)] = small_toe;
    } else {
      p[index(Joint::LAnkle)] = ankle;
      p[index(Joint::LKnee)] = knee;
      p[index(Joint::LHip)] = hip;
      p[index(Joint::LHeel)] = heel;
      p[index(Joint::LBigToe)] = big_toe;
      p[index(Joint::LSmallToe)] = small_toe;
    }
  }
  const P3 mid_hip{0.0, hip_y, hip_z};
  p[index(Joint::MidHip)] = mid_hip;

  // Upper body in a frame rooted at the mid hip, then leaned forward and tilted sideways.
  const double lean = torso_lean_deg * kDeg;
  const double side_tilt = torso_tilt_deg * kDeg;
  auto upper = [&](P3 local) { return mid_hip + tilt(pitch(local, lean), side_tilt); };

  const P3 neck_l{0.0, a.torso * s, 0.0};
  p[index(Joint::Neck)] = upper(neck_l);
  for (int side : {-1, 1}) {
    const double sd = static_cast<double>(side);
    const P3 shoulder{sd * 0.5 * a.shoulder_width * s, 0.95 * a.torso * s, 0.0};
    const P3 dir{sd * std::sin(theta), -std::cos(theta), 0.0};
    const P3 elbow = shoulder + (a.upper_arm * s) * dir;
    const P3 wrist = elbow + (a.forearm * s) * dir;
    const bool right = side < 0;
    p[index(right ? Joint::RShoulder : Joint::LShoulder)] = upper(shoulder);
    p[index(right ? Joint::RElbow : Joint::LElbow)] = upper(elbow);
    p[index(right ? Joint::RWrist : Joint::LWrist)] = upper(wrist);
  }

  const double hp = head_pitch_deg * kDeg;
  const double h = a.head * s;
  auto head = [&](P3 offset) { return upper(neck_l + pitch(h * offset, hp)); };
  p[index(Joint::Nose)] = head({0.0, 1.0, 0.35});
  p[index(Joint::REye)] = head({-0.2, 1.2, 0.3});
  p[index(Joint::LEye)] = head({0.2, 1.2, 0.3});
  p[index(Joint::REar)] = head({-0.4, 1.05, 0.0});
  p[index(Joint::LEar)] = head({0.4, 1.05, 0.0});

  // Orthographic projection; x is measured in height units, hence the aspect factor.
  KeypointFrame f;
  const double aspect = dims.height / dims.width;
  for (std::size_t j = 0; j < kJointCount; ++j) {
    f.joints[j] = Keypoint{a.root_x + p[j].x * aspect, a.root_y - p[j].y, 1.0};
  }
  return f;
}

namespace {

KeypointFrame variant_frame(const AvatarSpec& a, const VariantKinematics& k, std::size_t t, std::size_t n,
                            ImageDims dims) {
  std::size_t phase_t = t;
  if (k.speed != 1.0) {
    phase_t = std::min(static_cast<std::size_t>(std::lround(k.speed * static_cast<double>(t))), n - 1);
  }
  const double phase = squat_phase(phase_t, n);
  constexpr VariantKinematics ref{};
  KeypointFrame f = pose_at(a, std::min(ref.max_knee_flexion_deg * phase, k.max_knee_flexion_deg),
                            std::min(ref.max_arm_abduction_deg * phase, k.max_arm_abduction_deg),
                            k.max_torso_lean_deg * phase * std::min(1.0, k.max_knee_flexion_deg / 90.0),
                            k.torso_tilt_deg, k.head_pitch_deg, dims);
  f.frame_index = t;
  return f;
}

}  // namespace

GeneratedExercise generate_exercise(const AvatarSpec& avatar, ExerciseVariant variant, std::size_t frames,
                                    double pose_threshold, ImageDims dims) {
  if (frames < 10) throw Error("generate_exercise: need at least 10 frames");
  GeneratedExercise ex;
  ex.avatar = avatar;
  ex.variant = variant;
  ex.sequence.source_dims = dims;
  ex.sequence.label = exercise_name(avatar, variant, "centered");
  const VariantKinematics kin = VariantKinematics::of(variant);
  const VariantKinematics ref = VariantKinematics::of(ExerciseVariant::Correct);
  ex.sequence.frames.reserve(frames);
  ex.truth.reserve(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    KeypointFrame f = variant_frame(avatar, kin, t, frames, dims);
    const KeypointFrame c = variant_frame(avatar, ref, t, frames, dims);
    JointMask flags{};
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const double dx = f.joints[j].x - c.joints[j].x;
      const double dy = f.joints[j].y - c.joints[j].y;
      flags[j] = std::sqrt(dx * dx + dy * dy) > pose_threshold;
    }
    ex.sequence.frames.push_back(f);
    ex.truth.push_back(flags);
  }
  return ex;
}

PerturbResult perturb(const PoseSequence& seq, const Perturbation& p, double root_x) {
  PerturbResult out;
  out.sequence = seq;
  if (p.identity()) return out;
  const double c = std::cos(p.yaw_deg * kDeg);
  const double shift = p.translate_cm * p.cm_to_px / seq.source_dims.width;
  for (auto& f : out.sequence.frames) {
    for (std::size_t j = 0; j < kJointCount; ++j) {
      if (f.masked(j)) continue;
      Keypoint& k = f.joints[j];
      k.x = root_x + (k.x - root_x) * c - shift;
      for (double* v : {&k.x, &k.y}) {
        if (*v < 0.0 || *v > 1.0) {
          out.warnings.push_back("frame " + std::to_string(f.frame_index) + " joint " +
                                 std::string(joint_name(j)) + " clamped");
          *v = std::clamp(*v, 0.0, 1.0);
        }
      }
    }
  }
  return out;
}

GeneratedExercise perturb(const GeneratedExercise& ex, const Perturbation& p) {
  GeneratedExercise out = ex;
  out.perturbation = p;
  out.sequence = perturb(ex.sequence, p, ex.avatar.root_x).sequence;
  return out;
}

std::string exercise_name(const AvatarSpec& avatar, ExerciseVariant v, std::string_view perturbation_name) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "avatar%02d", avatar.avatar_id);
  std::string name = buf;
  std::string var(variant_name(v));
  std::transform(var.begin(), var.end(), var.begin(), ::tolower);
  return name + "_" + var + "_" + std::string(perturbation_name);
}

std::string write_truth(const GeneratedExercise& ex) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["avatar_id"] = ex.avatar.avatar_id;
  doc["variant"] = variant_name(ex.variant);
  doc["perturbation"] = {{"yaw_deg", ex.perturbation.yaw_deg},
                         {"translate_cm", ex.perturbation.translate_cm},
                         {"cm_to_px", ex.perturbation.cm_to_px}};
  auto flags = nlohmann::ordered_json::array();
  for (const auto& m : ex.truth) {
    std::string row;
    for (bool b : m) row += b ? '1' : '0';
    flags.push_back(row);
  }
  doc["flags"] = flags;
  return doc.dump(1) + "\n";
}

TruthFile read_truth(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("version").get<int>() != 1) throw VersionError("truth file: unsupported version");
    TruthFile t;
    t.avatar_id = doc.at("avatar_id").get<int>();
    const auto v = parse_variant(doc.at("variant").get<std::string>());
    if (!v) throw FormatError("truth file: unknown variant");
    t.variant = *v;
    const auto& p = doc.at("perturbation");
    t.perturbation = Perturbation{p.at("yaw_deg").get<double>(), p.at("translate_cm").get<double>(),
                                  p.at("cm_to_px").get<double>()};
    for (const auto& row : doc.at("flags")) {
      const std::string r = row.get<std::string>();
      if (r.size() != kJointCount) throw FormatError("truth file: flag row must have 25 entries");
      JointMask m{};
      for (std::size_t j = 0; j < kJointCount; ++j) m[j] = r[j] == '1';
      t.flags.push_back(m);
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("truth file: ") + e.what());
  }
}

}  // namespace sgwr
