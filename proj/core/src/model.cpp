#include "sgwr/model.hpp"

#include <algorithm>
#include <cmath>

#include "sgwr/error.hpp"

namespace sgwr {

std::string_view model_variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::Gamma: return "gamma";
    case ModelVariant::Episodic: return "episodic";
    case ModelVariant::Subnode: return "subnode";
  }
  return "subnode";
}

std::optional<ModelVariant> parse_model_variant(std::string_view name) {
  for (auto v : {ModelVariant::Gamma, ModelVariant::Episodic, ModelVariant::Subnode}) {
    if (name == model_variant_name(v)) return v;
  }
  return std::nullopt;
}

GwrConfig default_config(ModelVariant v) { return GwrConfig::with_depth(v == ModelVariant::Gamma ? 5 : 1); }

TrainedModel train_model(ModelVariant variant, std::span<const SampleVector> samples, const GwrConfig& config,
                         std::uint64_t seed, int exercise_id, double learning_threshold) {
  if (samples.size() < 2) throw Error("train: need at least two samples");
  GwrNetwork net = init_network(samples, config, seed);
  TrainLog log = train(net, samples, config.epochs);
  TrainedModel out{Model{variant, std::move(net), {}, ExerciseStore(learning_threshold)}, std::move(log)};
  switch (variant) {
    case ModelVariant::Gamma: break;
    case ModelVariant::Episodic:
      for (const auto& epoch : out.log.epoch_bmus) out.model.transitions.record_sequence(epoch);
      break;
    case ModelVariant::Subnode:
      out.model.exercises.record_trajectory(exercise_id, out.log.final_epoch(), out.model.network);
      break;
  }
  return out;
}

std::vector<NodeId> gamma_block_rollout(const GwrNetwork& net, std::span<const NodeId> tracked, std::size_t horizon) {
  if (horizon == 0) throw Error("gamma rollout: horizon must be >= 1");
  std::vector<NodeId> out(tracked.size());
  if (tracked.empty()) return out;
  out[0] = tracked[0];
  for (std::size_t sync = 0; sync + 1 < tracked.size(); sync += horizon) {
    const std::size_t steps = std::min(horizon, tracked.size() - 1 - sync);
    const std::vector<NodeId> rollout = gamma_predict(net, tracked[sync], steps);
    for (std::size_t i = 0; i < steps; ++i) out[sync + 1 + i] = rollout[i];
  }
  return out;
}

ExpectedPoses expected_poses(const Model& model, std::span<const SampleVector> performance, int exercise_id,
                             std::size_t gamma_horizon) {
  if (performance.empty()) throw Error("expected_poses: empty performance");
  const GwrNetwork& net = model.network;
  const std::size_t n = performance.size();
  ExpectedPoses out;
  switch (model.variant) {
    case ModelVariant::Subnode: {
      const AdaptationCheck check = model.exercises.needs_adaptation(net, exercise_id, performance.front());
      out.lineage = check.lineage;
      out.first_frame_distance = check.pose_distance;
      const std::vector<Vec> replay = model.exercises.replay(net, exercise_id, check.lineage);
      const auto& traj = model.exercises.trajectory(exercise_id);
      const std::size_t t = replay.size();
      out.emitted = t;
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t pos = j;
        if (t != n) {
          pos = n > 1 ? static_cast<std::size_t>(std::lround(static_cast<double>(j) * static_cast<double>(t - 1) /
                                                              static_cast<double>(n - 1)))
                      : 0;
        }
        out.poses.push_back(replay[pos]);
        out.nodes.push_back(traj.bmus[pos]);
      }
      break;
    }
    case ModelVariant::Episodic: {
      const std::vector<NodeId> tracked = track_bmus(net, performance);
      out.nodes.push_back(tracked[0]);
      out.emitted = 1;
      for (std::size_t t = 1; t < n; ++t) {
        try {
          out.nodes.push_back(episodic_predict(model.transitions, tracked[t - 1], net));
          ++out.emitted;
        } catch (const NoSuccessorError&) {
          out.nodes.push_back(tracked[t - 1]);
        }
      }
      out.first_frame_distance = masked_distance(performance.front().values, net.node(out.nodes[0]).weight,
                                                 performance.front().mask);
      for (NodeId id : out.nodes) out.poses.push_back(net.node(id).weight);
      break;
    }
    case ModelVariant::Gamma: {
      const std::vector<NodeId> tracked = track_bmus(net, performance);
      out.nodes = gamma_block_rollout(net, tracked, gamma_horizon);
      out.first_frame_distance = masked_distance(performance.front().values, net.node(out.nodes[0]).weight,
                                                 performance.front().mask);
      out.emitted = n;
      for (NodeId id : out.nodes) out.poses.push_back(net.node(id).weight);
      break;
    }
  }
  return out;
}

}  // namespace sgwr
