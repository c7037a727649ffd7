#include <doctest.h>

#include <json.hpp>
#include <random>

#include "sgwr/error.hpp"
#include "sgwr/snapshot.hpp"
#include "support.hpp"

using namespace sgwr;
using nlohmann::json;

namespace {

Model trained(ModelVariant v, std::uint64_t seed, std::size_t frames = 80) {
  std::mt19937_64 rng(seed);
  const auto xs = testing::random_walk(rng, frames, kSampleDim, 0.02);
  GwrConfig cfg = default_config(v);
  cfg.epochs = 2;
  return train_model(v, xs, cfg, seed).model;
}

std::string tampered(const Model& m, const std::function<void(json&)>& edit) {
  json doc = json::parse(save_snapshot(m));
  edit(doc);
  return doc.dump();
}

template <typename E>
void check_rejects(const std::string& text, const std::string& needle) {
  try {
    load_snapshot(text);
    FAIL("snapshot was accepted");
  } catch (const E& e) {
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
  }
}

}  // namespace

TEST_SUITE("snapshot") {
  TEST_CASE("save and load are inverse for every variant") {
    for (auto v : {ModelVariant::Gamma, ModelVariant::Episodic, ModelVariant::Subnode}) {
      const Model m = trained(v, 3);
      const std::string text = save_snapshot(m);
      const Model back = load_snapshot(text);
      CHECK(back == m);
      CHECK(save_snapshot(back) == text);
    }
  }

  TEST_CASE("equal models produce identical bytes") {
    CHECK(save_snapshot(trained(ModelVariant::Episodic, 8)) == save_snapshot(trained(ModelVariant::Episodic, 8)));
    CHECK(save_snapshot(trained(ModelVariant::Episodic, 8)) != save_snapshot(trained(ModelVariant::Episodic, 9)));
  }

  TEST_CASE("a fresh two-node network round-trips") {
    const auto xs = testing::squat_samples();
    Model m{ModelVariant::Gamma, init_network(xs, GwrConfig::with_depth(5)), {}, ExerciseStore{}};
    CHECK(load_snapshot(save_snapshot(m)) == m);
  }

  TEST_CASE("a full network with several lineages round-trips") {
    std::mt19937_64 rng(77);
    const auto xs = testing::random_walk(rng, 400, kSampleDim, 0.05);
    GwrConfig cfg = GwrConfig::with_depth(1);
    cfg.epochs = 20;
    TrainedModel t = train_model(ModelVariant::Subnode, xs, cfg, 77);
    CHECK(t.model.network.size() == 200);
    for (int i = 0; i < 3; ++i) {
      t.model.exercises.adapt_baseline(t.model.network, 0, testing::random_walk(rng, 120, kSampleDim, 0.01));
    }
    const Model back = load_snapshot(save_snapshot(t.model));
    CHECK(back == t.model);
    CHECK(back.exercises.lineages(0).size() == 3);
  }

  TEST_CASE("files round-trip") {
    testing::TempDir dir("snap");
    const Model m = trained(ModelVariant::Subnode, 4);
    const std::string path = (dir.path() / "m.gwr").string();
    save_snapshot_file(path, m);
    CHECK(load_snapshot_file(path) == m);
    CHECK_THROWS(load_snapshot_file((dir.path() / "missing.gwr").string()));
  }

  TEST_CASE("unsupported versions and corrupt documents are rejected") {
    const Model m = trained(ModelVariant::Gamma, 5);
    check_rejects<VersionError>(tampered(m, [](json& d) { d["format_version"] = 999; }), "unsupported format version");
    const std::string text = save_snapshot(m);
    check_rejects<FormatError>(text.substr(0, text.size() / 3), "corrupt");
    check_rejects<FormatError>(tampered(m, [](json& d) { d.erase("network"); }), "malformed");
  }

  TEST_CASE("structural invariants are enforced on load") {
    const Model m = trained(ModelVariant::Subnode, 6);
    check_rejects<InvariantError>(tampered(m, [](json& d) { d["network"]["edges"].push_back({0, 987654, 0}); }),
                                  "missing node");
    check_rejects<InvariantError>(tampered(m, [](json& d) { d["network"]["nodes"][0]["habituation"] = 1.5; }),
                                  "invariant");
    check_rejects<InvariantError>(tampered(m, [](json& d) {
                                    auto& e = d["network"]["edges"][0];
                                    e[1] = e[0];
                                  }),
                                  "invariant");
    check_rejects<InvariantError>(tampered(m, [](json& d) {
                                    auto n = d["network"]["nodes"][0];
                                    n["id"] = d["network"]["next_id"];
                                    d["network"]["next_id"] = d["network"]["next_id"].get<int>() + 1;
                                    d["network"]["nodes"].push_back(n);
                                  }),
                                  "isolated");
    check_rejects<InvariantError>(tampered(m, [](json& d) { d["network"]["edges"][0][2] = -1; }), "invariant");
    check_rejects<InvariantError>(
        tampered(m, [](json& d) { d["exercise_store"]["exercises"][0]["bmus"].push_back(987654); }), "invariant");
  }

  TEST_CASE("lineage contexts must match their parents") {
    Model m = trained(ModelVariant::Subnode, 7);
    const auto replay = m.exercises.replay(m.network, 0, 0);
    std::vector<SampleVector> base;
    for (const auto& w : replay) base.emplace_back(w);
    m.exercises.adapt_baseline(m.network, 0, base);
    CHECK_NOTHROW(load_snapshot(save_snapshot(m)));
    check_rejects<InvariantError>(tampered(m, [](json& d) {
                                    auto& c = d["exercise_store"]["exercises"][0]["lineages"][0]["contexts"][0][0][0];
                                    c = c.get<double>() + 0.5;
                                  }),
                                  "invariant");
  }

  TEST_CASE("randomized trained states round-trip") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
      const auto v = static_cast<ModelVariant>(trial % 3);
      const Model m = trained(v, rng(), 30 + static_cast<std::size_t>(trial) * 7);
      const std::string text = save_snapshot(m);
      CHECK(load_snapshot(text) == m);
      CHECK(save_snapshot(m) == text);
    }
  }
}
