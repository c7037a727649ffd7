#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sgwr/gwr.hpp"

namespace sgwr {

/// BMU ids of one exercise in the order they fired during the final training epoch.
/// Consecutive duplicates are kept: they are how held poses are represented.
struct ExerciseTrajectory {
  int exercise_id = 0;
  std::vector<NodeId> bmus;

  std::size_t size() const { return bmus.size(); }
  friend bool operator==(const ExerciseTrajectory&, const ExerciseTrajectory&) = default;
};

/// One adapted body shape: one subnode per trajectory position.
/// Contexts are copies of the parent contexts.
struct SubnodeLineage {
  int id = 1;
  std::vector<Vec> weights;
  std::vector<std::vector<Vec>> contexts;

  friend bool operator==(const SubnodeLineage&, const SubnodeLineage&) = default;
};

struct AdaptationCheck {
  bool needed = false;
  int lineage = 0;  // 0 = parent nodes
  double pose_distance = 0.0;
};

/// Linear resampling of a sample sequence to `length` entries.
std::vector<SampleVector> resample(std::span<const SampleVector> seq, std::size_t length);

class ExerciseStore {
 public:
  explicit ExerciseStore(double learning_threshold = 0.15) : learning_threshold_(learning_threshold) {}

  double learning_threshold() const { return learning_threshold_; }

  /// Stores the trajectory verbatim. Replacing an existing exercise appends a warning.
  const ExerciseTrajectory& record_trajectory(int exercise_id, std::vector<NodeId> bmus, const GwrNetwork& net,
                                              std::vector<std::string>* warnings = nullptr);

  bool has_exercise(int exercise_id) const { return trajectories_.count(exercise_id) != 0; }
  const ExerciseTrajectory& trajectory(int exercise_id) const;
  const std::vector<SubnodeLineage>& lineages(int exercise_id) const;

  /// Compares the first frame to position 0 of the parent and of every lineage.
  /// Returns the nearest (lowest id on ties); adaptation is needed iff that distance exceeds the threshold.
  AdaptationCheck needs_adaptation(const GwrNetwork& net, int exercise_id, const SampleVector& first_frame) const;

  /// Adds a lineage whose subnode j is w_j + (x_j - w_j) for baseline frame x_j. Returns its id.
  /// The network and existing lineages are not modified.
  int adapt_baseline(const GwrNetwork& net, int exercise_id, std::span<const SampleVector> baseline);

  /// One expected pose per trajectory position.
  std::vector<Vec> replay(const GwrNetwork& net, int exercise_id, int lineage) const;

  const std::map<int, ExerciseTrajectory>& trajectories() const { return trajectories_; }
  const std::map<int, std::vector<SubnodeLineage>>& all_lineages() const { return lineages_; }

  static ExerciseStore from_parts(double learning_threshold, std::map<int, ExerciseTrajectory> trajectories,
                                  std::map<int, std::vector<SubnodeLineage>> lineages);

  friend bool operator==(const ExerciseStore&, const ExerciseStore&) = default;

 private:
  const Vec& lineage_weight(const GwrNetwork& net, const ExerciseTrajectory& traj, int lineage,
                            std::size_t position) const;

  double learning_threshold_ = 0.15;
  std::map<int, ExerciseTrajectory> trajectories_;
  std::map<int, std::vector<SubnodeLineage>> lineages_;
};

}  // namespace sgwr
