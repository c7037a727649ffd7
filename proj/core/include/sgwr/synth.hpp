#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgwr/feedback.hpp"
#include "sgwr/pose.hpp"

namespace sgwr {

/// Stick-figure proportions. Lengths are in image-height units; root is the
/// mid-ankle point in normalized image coordinates.
struct AvatarSpec {
  int avatar_id = 1;
  double torso = 0.20;
  double upper_arm = 0.12;
  double forearm = 0.115;
  double thigh = 0.19;
  double shin = 0.18;
  double shoulder_width = 0.16;
  double hip_width = 0.10;
  double head = 0.085;
  double root_x = 0.5;
  double root_y = 0.9;
  double scale = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const AvatarSpec&, const AvatarSpec&) = default;
};

enum class ExerciseVariant { Correct, Arms, Head, Legs, Side, Speed };

inline constexpr std::array<ExerciseVariant, 6> kAllVariants = {
    ExerciseVariant::Correct, ExerciseVariant::Arms, ExerciseVariant::Head,
    ExerciseVariant::Legs,    ExerciseVariant::Side, ExerciseVariant::Speed};

std::string_view variant_name(ExerciseVariant v);
std::optional<ExerciseVariant> parse_variant(std::string_view name);

/// Kinematic targets of one execution. Correct is the reference every other variant deviates from.
struct VariantKinematics {
  double max_knee_flexion_deg = 90.0;
  double max_arm_abduction_deg = 90.0;
  double head_pitch_deg = 0.0;
  double torso_tilt_deg = 0.0;
  double max_torso_lean_deg = 25.0;
  double speed = 1.0;

  static VariantKinematics of(ExerciseVariant v);
};

struct Perturbation {
  double yaw_deg = 0.0;
  double translate_cm = 0.0;  // positive = to the left of the image
  double cm_to_px = 3.0;

  bool identity() const { return yaw_deg == 0.0 && translate_cm == 0.0; }
  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

struct NamedPerturbation {
  std::string_view name;
  Perturbation perturbation;
};

/// centered, rotation (5 deg), translation (5 cm left), rotation_translation.
std::array<NamedPerturbation, 4> standard_perturbations(double cm_to_px = 3.0);

/// Joints whose motion a variant overrides (directly or through the kinematic chain).
JointMask variant_affected_joints(ExerciseVariant v);

/// Proportions drawn uniformly within +-20% of the canonical figure. Deterministic per seed.
AvatarSpec make_avatar(std::uint64_t seed, int avatar_id);
inline AvatarSpec make_avatar(std::uint64_t seed) { return make_avatar(seed, static_cast<int>(seed)); }

/// Squat phase in [0,1] (0 standing, 1 bottom) at frame t of an n-frame cycle.
double squat_phase(std::size_t t, std::size_t n);

/// Pose for explicit joint angles (degrees).
KeypointFrame pose_at(const AvatarSpec& avatar, double knee_flexion_deg, double arm_abduction_deg,
                      double torso_lean_deg, double torso_tilt_deg, double head_pitch_deg, ImageDims dims);

struct GeneratedExercise {
  PoseSequence sequence;
  std::vector<JointMask> truth;  // per frame
  AvatarSpec avatar;
  ExerciseVariant variant = ExerciseVariant::Correct;
  Perturbation perturbation;
};

/// n >= 10. Ground truth flags joints deviating from the Correct execution by more than pose_threshold.
GeneratedExercise generate_exercise(const AvatarSpec& avatar, ExerciseVariant variant, std::size_t frames,
                                    double pose_threshold = 0.04, ImageDims dims = {});

struct PerturbResult {
  PoseSequence sequence;
  std::vector<std::string> warnings;  // one per clamped joint coordinate
};

/// Yaw scales x offsets from root_x by cos(yaw); translation shifts every x by -cm*cm_to_px/width.
PerturbResult perturb(const PoseSequence& seq, const Perturbation& p, double root_x);

GeneratedExercise perturb(const GeneratedExercise& ex, const Perturbation& p);

std::string exercise_name(const AvatarSpec& avatar, ExerciseVariant v, std::string_view perturbation_name);

std::string write_truth(const GeneratedExercise& ex);

struct TruthFile {
  int avatar_id = 0;
  ExerciseVariant variant = ExerciseVariant::Correct;
  Perturbation perturbation;
  std::vector<JointMask> flags;
};
TruthFile read_truth(std::string_view text);

}  // namespace sgwr
