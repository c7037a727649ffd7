#include <doctest.h>

#include <random>

#include "sgwr/episodic.hpp"
#include "sgwr/error.hpp"
#include "support.hpp"

using namespace sgwr;

namespace {

GwrNetwork line_net(NodeId count) {
  GwrConfig cfg;
  std::map<NodeId, GwrNode> nodes;
  std::map<EdgeKey, int> edges;
  for (NodeId i = 0; i < count; ++i) {
    GwrNode n;
    n.id = i;
    n.weight = {0.1 * static_cast<double>(i), 0.5};
    n.context = {Vec(2, 0.0)};
    nodes.emplace(i, n);
    if (i > 0) edges[{i - 1, i}] = 0;
  }
  return GwrNetwork::from_parts(cfg, 0, 2, nodes, edges, {Vec(2, 0.0)}, std::nullopt, count);
}

}  // namespace

TEST_SUITE("episodic") {
  TEST_CASE("consecutive activations are counted") {
    TransitionMatrix m;
    const std::vector<NodeId> bmus{1, 2, 2, 3, 1, 2};
    m.record_sequence(bmus);
    CHECK(m.count(1, 2) == 2);
    CHECK(m.count(2, 2) == 1);
    CHECK(m.count(2, 3) == 1);
    CHECK(m.count(3, 1) == 1);
    CHECK(m.count(2, 1) == 0);
    CHECK(m.counts().size() == 4);
  }

  TEST_CASE("self transitions are stored but never predicted") {
    TransitionMatrix m;
    m.record(4, 4, 50);
    CHECK(m.count(4, 4) == 50);
    CHECK_THROWS_AS(episodic_predict(m, 4), NoSuccessorError);
    m.record(4, 6);
    CHECK(episodic_predict(m, 4) == 6);
  }

  TEST_CASE("the most frequent other successor wins") {
    TransitionMatrix m;
    m.record(1, 1, 9);
    m.record(1, 2, 5);
    m.record(1, 3, 2);
    CHECK(episodic_predict(m, 1) == 2);

    TransitionMatrix tie;
    tie.record(5, 8, 3);
    tie.record(5, 2, 3);
    tie.record(5, 9, 1);
    CHECK(episodic_predict(tie, 5) == 2);
    CHECK_THROWS_AS(episodic_predict(tie, 77), NoSuccessorError);
  }

  TEST_CASE("prediction matches a brute-force row scan") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<NodeId> node(0, 9);
    std::uniform_int_distribution<std::uint64_t> times(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
      TransitionMatrix m;
      std::uint64_t dense[10][10] = {};
      for (int e = 0; e < 30; ++e) {
        const NodeId a = node(rng);
        const NodeId b = node(rng);
        const std::uint64_t t = times(rng);
        m.record(a, b, t);
        dense[a][b] += t;
      }
      for (NodeId from = 0; from < 10; ++from) {
        NodeId want = -1;
        std::uint64_t best = 0;
        for (NodeId to = 0; to < 10; ++to) {
          if (to != from && dense[from][to] > best) {
            best = dense[from][to];
            want = to;
          }
        }
        if (want < 0) {
          CHECK_THROWS_AS(episodic_predict(m, from), NoSuccessorError);
        } else {
          CHECK(episodic_predict(m, from) == want);
        }
      }
    }
  }

  TEST_CASE("a held pose is skipped over") {
    const GwrNetwork net = line_net(3);
    TransitionMatrix m;
    m.record_sequence(std::vector<NodeId>{0, 1, 1, 1, 1, 1, 2});
    const EpisodicReplay r = episodic_replay(net, m, 0, 5);
    REQUIRE(r.nodes.size() == 2);
    CHECK(r.nodes == std::vector<NodeId>{1, 2});
    CHECK(r.truncated);
    CHECK(r.poses[1] == net.node(2).weight);
  }

  TEST_CASE("a two-cycle alternates for the full length") {
    const GwrNetwork net = line_net(2);
    TransitionMatrix m;
    m.record_sequence(std::vector<NodeId>{0, 1, 0, 1});
    const EpisodicReplay r = episodic_replay(net, m, 0, 7);
    CHECK_FALSE(r.truncated);
    CHECK(r.nodes == std::vector<NodeId>{1, 0, 1, 0, 1, 0, 1});
    for (std::size_t i = 1; i < r.nodes.size(); ++i) CHECK(r.nodes[i] != r.nodes[i - 1]);
  }

  TEST_CASE("replays never exceed the requested length and skip removed nodes") {
    std::mt19937_64 rng(29);
    const GwrNetwork net = line_net(6);
    std::uniform_int_distribution<NodeId> node(0, 7);  // ids 6 and 7 are not in the network
    for (int trial = 0; trial < 100; ++trial) {
      TransitionMatrix m;
      for (int e = 0; e < 15; ++e) m.record(node(rng), node(rng));
      const std::size_t steps = static_cast<std::size_t>(trial % 12);
      const NodeId start = static_cast<NodeId>(trial % 6);
      const EpisodicReplay r = episodic_replay(net, m, start, steps);
      CHECK(r.nodes.size() <= steps);
      CHECK(r.nodes.size() == r.poses.size());
      CHECK((r.truncated || r.nodes.size() == steps));
      NodeId prev = start;
      for (NodeId id : r.nodes) {
        CHECK(net.contains(id));
        CHECK(id != prev);
        prev = id;
      }
    }

    TransitionMatrix dead;
    dead.record(0, 9, 10);
    dead.record(0, 1, 1);
    CHECK(episodic_predict(dead, 0) == 9);
    CHECK(episodic_predict(dead, 0, net) == 1);
    CHECK_THROWS(episodic_replay(net, dead, 42, 1));
  }

  TEST_CASE("a trained squat replays through its recorded transitions") {
    const auto xs = testing::squat_samples();
    GwrNetwork net = init_network(xs, GwrConfig{});
    const TrainLog log = train(net, xs, 3);
    TransitionMatrix m;
    for (const auto& epoch : log.epoch_bmus) m.record_sequence(epoch);
    const EpisodicReplay r = episodic_replay(net, m, log.final_epoch().front(), xs.size() - 1);
    CHECK_FALSE(r.nodes.empty());
    NodeId prev = log.final_epoch().front();
    for (NodeId id : r.nodes) {
      CHECK(m.count(prev, id) > 0);
      prev = id;
    }
  }
}
