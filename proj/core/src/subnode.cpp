#include "sgwr/subnode.hpp"

#include <cmath>
#include <limits>

#include "sgwr/error.hpp"

namespace sgwr {

std::vector<SampleVector> resample(std::span<const SampleVector> seq, std::size_t length) {
  if (seq.empty()) throw Error("resample: empty sequence");
  if (seq.size() == length) return {seq.begin(), seq.end()};
  std::vector<SampleVector> out;
  out.reserve(length);
  const double scale = length > 1 ? static_cast<double>(seq.size() - 1) / static_cast<double>(length - 1) : 0.0;
  for (std::size_t j = 0; j < length; ++j) {
    const double pos = scale * static_cast<double>(j);
    const std::size_t lo = std::min(static_cast<std::size_t>(std::floor(pos)), seq.size() - 1);
    const std::size_t hi = std::min(lo + 1, seq.size() - 1);
    const double f = pos - static_cast<double>(lo);
    const SampleVector& a = seq[lo];
    const SampleVector& b = seq[hi];
    if (f == 0.0) {
      out.push_back(a);
      continue;
    }
    SampleVector s;
    s.values.resize(a.size());
    s.mask = a.mask;
    const std::size_t joints = a.size() / 2;
    if (!s.mask.empty()) s.mask.resize(joints);
    for (std::size_t jt = 0; jt < joints; ++jt) {
      const bool ma = a.masked(jt);
      const bool mb = b.masked(jt);
      for (std::size_t c = 2 * jt; c < 2 * jt + 2; ++c) {
        if (ma && mb) s.values[c] = 0.0;
        else if (ma) s.values[c] = b.values[c];
        else if (mb) s.values[c] = a.values[c];
        else s.values[c] = (1.0 - f) * a.values[c] + f * b.values[c];
      }
      if (!s.mask.empty()) s.mask[jt] = ma && mb;
    }
    out.push_back(std::move(s));
  }
  return out;
}

const ExerciseTrajectory& ExerciseStore::record_trajectory(int exercise_id, std::vector<NodeId> bmus,
                                                           const GwrNetwork& net, std::vector<std::string>* warnings) {
  if (bmus.empty()) throw Error("record_trajectory: empty BMU list");
  for (NodeId id : bmus) {
    if (!net.contains(id)) {
      throw Error("record_trajectory: node " + std::to_string(id) + " is not in the network");
    }
  }
  if (has_exercise(exercise_id)) {
    if (warnings) warnings->push_back("exercise " + std::to_string(exercise_id) + " replaced");
    lineages_.erase(exercise_id);
  }
  auto& t = trajectories_[exercise_id];
  t.exercise_id = exercise_id;
  t.bmus = std::move(bmus);
  lineages_[exercise_id];
  return t;
}

const ExerciseTrajectory& ExerciseStore::trajectory(int exercise_id) const {
  auto it = trajectories_.find(exercise_id);
  if (it == trajectories_.end()) throw Error("unknown exercise " + std::to_string(exercise_id));
  return it->second;
}

const std::vector<SubnodeLineage>& ExerciseStore::lineages(int exercise_id) const {
  static const std::vector<SubnodeLineage> none;
  auto it = lineages_.find(exercise_id);
  return it == lineages_.end() ? none : it->second;
}

const Vec& ExerciseStore::lineage_weight(const GwrNetwork& net, const ExerciseTrajectory& traj, int lineage,
                                         std::size_t position) const {
  if (lineage == 0) return net.node(traj.bmus[position]).weight;
  const auto& ls = lineages(traj.exercise_id);
  if (lineage < 0 || static_cast<std::size_t>(lineage) > ls.size()) {
    throw Error("unknown lineage " + std::to_string(lineage) + " for exercise " + std::to_string(traj.exercise_id));
  }
  return ls[static_cast<std::size_t>(lineage - 1)].weights[position];
}

AdaptationCheck ExerciseStore::needs_adaptation(const GwrNetwork& net, int exercise_id,
                                                const SampleVector& first_frame) const {
  const ExerciseTrajectory& traj = trajectory(exercise_id);
  AdaptationCheck best{false, 0, std::numeric_limits<double>::infinity()};
  const int count = static_cast<int>(lineages(exercise_id).size());
  for (int l = 0; l <= count; ++l) {
    const double d = masked_distance(first_frame.values, lineage_weight(net, traj, l, 0), first_frame.mask);
    if (d < best.pose_distance) {
      best.pose_distance = d;
      best.lineage = l;
    }
  }
  best.needed = best.pose_distance > learning_threshold_;
  return best;
}

int ExerciseStore::adapt_baseline(const GwrNetwork& net, int exercise_id, std::span<const SampleVector> baseline) {
  if (baseline.empty()) throw Error("adapt_baseline: empty baseline");
  const ExerciseTrajectory& traj = trajectory(exercise_id);
  const std::vector<SampleVector> frames = resample(baseline, traj.size());

  auto& ls = lineages_[exercise_id];
  SubnodeLineage lineage;
  lineage.id = static_cast<int>(ls.size()) + 1;
  lineage.weights.reserve(traj.size());
  lineage.contexts.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const GwrNode& parent = net.node(traj.bmus[j]);
    const SampleVector& x = frames[j];
    if (x.size() != parent.weight.size()) throw DimensionError("adapt_baseline: baseline dimension mismatch");
    Vec w = parent.weight;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (x.component_masked(i)) continue;
      w[i] = parent.weight[i] + (x.values[i] - parent.weight[i]);
    }
    lineage.weights.push_back(std::move(w));
    lineage.contexts.push_back(parent.context);
  }
  ls.push_back(std::move(lineage));
  return ls.back().id;
}

std::vector<Vec> ExerciseStore::replay(const GwrNetwork& net, int exercise_id, int lineage) const {
  const ExerciseTrajectory& traj = trajectory(exercise_id);
  std::vector<Vec> out;
  out.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) out.push_back(lineage_weight(net, traj, lineage, j));
  return out;
}

ExerciseStore ExerciseStore::from_parts(double learning_threshold, std::map<int, ExerciseTrajectory> trajectories,
                                        std::map<int, std::vector<SubnodeLineage>> lineages) {
  ExerciseStore s(learning_threshold);
  s.trajectories_ = std::move(trajectories);
  s.lineages_ = std::move(lineages);
  return s;
}

}  // namespace sgwr
