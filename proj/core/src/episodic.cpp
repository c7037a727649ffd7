#include "sgwr/episodic.hpp"

#include <limits>
#include <string>

#include "sgwr/error.hpp"

namespace sgwr {

void TransitionMatrix::record(NodeId from, NodeId to, std::uint64_t times) { counts_[{from, to}] += times; }

void TransitionMatrix::record_sequence(std::span<const NodeId> bmus) {
  for (std::size_t t = 1; t < bmus.size(); ++t) record(bmus[t - 1], bmus[t]);
}

std::uint64_t TransitionMatrix::count(NodeId from, NodeId to) const {
  auto it = counts_.find({from, to});
  return it == counts_.end() ? 0 : it->second;
}

namespace {

template <typename Alive>
NodeId predict_impl(const TransitionMatrix& m, NodeId from, Alive alive) {
  const auto& c = m.counts();
  std::uint64_t best_count = 0;
  NodeId best = from;
  // Row entries are contiguous and ascending in `to`, so '>' keeps the lowest id on ties.
  for (auto it = c.lower_bound({from, std::numeric_limits<NodeId>::min()}); it != c.end() && it->first.first == from;
       ++it) {
    const NodeId to = it->first.second;
    if (to == from || it->second == 0 || !alive(to)) continue;
    if (it->second > best_count) {
      best_count = it->second;
      best = to;
    }
  }
  if (best_count == 0) throw NoSuccessorError("no successor recorded for node " + std::to_string(from));
  return best;
}

}  // namespace

NodeId episodic_predict(const TransitionMatrix& m, NodeId from) {
  return predict_impl(m, from, [](NodeId) { return true; });
}

NodeId episodic_predict(const TransitionMatrix& m, NodeId from, const GwrNetwork& net) {
  return predict_impl(m, from, [&](NodeId id) { return net.contains(id); });
}

EpisodicReplay episodic_replay(const GwrNetwork& net, const TransitionMatrix& m, NodeId start, std::size_t steps) {
  if (!net.contains(start)) throw Error("episodic_replay: unknown start node " + std::to_string(start));
  EpisodicReplay out;
  NodeId u = start;
  for (std::size_t i = 0; i < steps; ++i) {
    try {
      u = episodic_predict(m, u, net);
    } catch (const NoSuccessorError&) {
      out.truncated = true;
      break;
    }
    out.nodes.push_back(u);
    out.poses.push_back(net.node(u).weight);
  }
  return out;
}

}  // namespace sgwr
