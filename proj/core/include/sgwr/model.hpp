#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sgwr/episodic.hpp"
#include "sgwr/gwr.hpp"
#include "sgwr/subnode.hpp"

namespace sgwr {

enum class ModelVariant { Gamma, Episodic, Subnode };

std::string_view model_variant_name(ModelVariant v);
std::optional<ModelVariant> parse_model_variant(std::string_view name);

/// Default hyperparameters: K = 5 for Gamma-GWR, K = 1 otherwise.
GwrConfig default_config(ModelVariant v);

/// A trained network plus the variant's successor memory.
struct Model {
  ModelVariant variant = ModelVariant::Subnode;
  GwrNetwork network;
  TransitionMatrix transitions;  // Episodic-GWR
  ExerciseStore exercises;       // Subnode-GWR

  friend bool operator==(const Model&, const Model&) = default;
};

struct TrainedModel {
  Model model;
  TrainLog log;
};

/// Trains the shared network, then fills the variant payload: transitions from every epoch
/// (Episodic) or the final-epoch trajectory as exercise `exercise_id` (Subnode).
TrainedModel train_model(ModelVariant variant, std::span<const SampleVector> samples, const GwrConfig& config,
                         std::uint64_t seed = 0, int exercise_id = 0, double learning_threshold = 0.15);

struct ExpectedPoses {
  std::vector<Vec> poses;  // one per input frame
  std::vector<NodeId> nodes;
  int lineage = 0;              // Subnode only
  double first_frame_distance = 0.0;
  std::size_t emitted = 0;      // frames with a genuine prediction (Episodic dead ends hold the BMU)
};

/// Frame-synchronous expected poses for a performance, as each variant recalls the exercise:
/// Subnode replays the lineage nearest to the first frame; Episodic predicts each frame as the successor
/// of the previous frame's tracked BMU; Gamma rolls forward from the tracked BMU, re-synchronizing every
/// `gamma_horizon` frames. Frame 0 is the tracked BMU for Episodic and Gamma.
ExpectedPoses expected_poses(const Model& model, std::span<const SampleVector> performance, int exercise_id = 0,
                             std::size_t gamma_horizon = 5);

/// Gamma rollout predictions: frames 1.. are predicted from the BMU of the last sync frame
/// (0, h, 2h, ...); rollouts stop at the sequence end. Entry 0 is the first tracked BMU.
std::vector<NodeId> gamma_block_rollout(const GwrNetwork& net, std::span<const NodeId> tracked, std::size_t horizon);

}  // namespace sgwr
