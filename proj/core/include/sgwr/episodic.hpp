#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "sgwr/gwr.hpp"

namespace sgwr {

/// Sparse counts of consecutive BMU activations (from, to).
class TransitionMatrix {
 public:
  void record(NodeId from, NodeId to, std::uint64_t times = 1);

  /// Records every consecutive pair of one epoch's BMU list.
  void record_sequence(std::span<const NodeId> bmus);

  std::uint64_t count(NodeId from, NodeId to) const;
  const std::map<EdgeKey, std::uint64_t>& counts() const { return counts_; }
  bool empty() const { return counts_.empty(); }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  // Keys are ordered (from, to), not normalized like edge keys.
  std::map<EdgeKey, std::uint64_t> counts_;
};

/// Most frequent successor of `from`, never `from` itself; ties go to the lower id.
/// Throws NoSuccessorError when the row has no off-diagonal entry.
NodeId episodic_predict(const TransitionMatrix& m, NodeId from);

/// As above, skipping node ids no longer present in the network.
NodeId episodic_predict(const TransitionMatrix& m, NodeId from, const GwrNetwork& net);

struct EpisodicReplay {
  std::vector<NodeId> nodes;
  std::vector<Vec> poses;
  bool truncated = false;  // chain hit a node without successor before `steps`
};

/// Chains episodic_predict up to `steps` times from `start` (start itself not emitted).
EpisodicReplay episodic_replay(const GwrNetwork& net, const TransitionMatrix& m, NodeId start, std::size_t steps);

}  // namespace sgwr
