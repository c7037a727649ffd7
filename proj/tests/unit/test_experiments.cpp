#include <doctest.h>

#include <sstream>

#include "sgwr/error.hpp"
#include "sgwr/experiments.hpp"
#include "support.hpp"

using namespace sgwr;

namespace {

RunConfig small_config(int avatars = 2) {
  RunConfig rc = resolve_config({});
  rc.avatars = avatars;
  return rc;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("metric tables append average and population deviation rows") {
    MetricTable t("demo", "row", {"a", "b"});
    t.add_row("x", {1.0, 2.0});
    t.add_row("y", {3.0, 6.0});
    CHECK(t.column_mean("a") == 2.0);
    CHECK(t.column_stddevs()[1] == doctest::Approx(2.0));
    CHECK(t.at("y", "b") == 6.0);
    CHECK_THROWS(t.add_row("z", {1.0}));
    CHECK_THROWS(t.at("q", "a"));
    const auto lines = lines_of(t.to_csv());
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "row,a,b");
    CHECK(lines[1] == "x,1.000000,2.000000");
    CHECK(lines[3] == "Average,2.000000,4.000000");
    CHECK(lines[4] == "Std. Dev.,1.000000,2.000000");
  }

  TEST_CASE("the synthetic grid covers every avatar, variant and setting") {
    const Dataset ds = synthesize_dataset(small_config());
    CHECK(ds.items.size() == 2 * 6 * 4);
    CHECK(ds.avatar_ids() == std::vector<int>{1, 2});
    const auto& item = ds.get(2, ExerciseVariant::Legs, "rotation_translation");
    CHECK(item.name == "avatar02_legs_rotation_translation");
    CHECK(item.exercise.sequence.label == item.name);
    CHECK_THROWS(ds.get(3, ExerciseVariant::Legs, "centered"));
    CHECK(synthesize_dataset(small_config()).digest() == ds.digest());
  }

  TEST_CASE("datasets round-trip through files") {
    testing::TempDir dir("ds");
    const Dataset ds = synthesize_dataset(small_config());
    save_dataset(ds, dir.str());
    const Dataset back = load_dataset(dir.str());
    REQUIRE(back.items.size() == ds.items.size());
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
      CHECK(back.items[i].name == ds.items[i].name);
      CHECK(back.items[i].perturbation == ds.items[i].perturbation);
      CHECK(back.items[i].exercise.sequence == ds.items[i].exercise.sequence);
      CHECK(back.items[i].exercise.truth == ds.items[i].exercise.truth);
    }
    CHECK(back.digest() == ds.digest());
    testing::TempDir empty("ds_empty");
    CHECK_THROWS_AS(load_dataset(empty.str()), IngestError);
  }

  TEST_CASE("variant configs share the context weight") {
    const RunConfig rc = small_config();
    const GwrConfig g = variant_config(rc, ModelVariant::Gamma);
    CHECK(g.context_depth == 5);
    for (double a : g.alpha_k) CHECK(a == doctest::Approx(0.1));
    CHECK(variant_config(rc, ModelVariant::Subnode) == rc.gwr);
  }

  TEST_CASE("multi-step prediction validates horizons and is order independent") {
    const auto ex = generate_exercise(make_avatar(1), ExerciseVariant::Correct, 100);
    const auto xs = flatten(ex.sequence);
    const Model m = train_model(ModelVariant::Gamma, xs, GwrConfig::with_depth(5)).model;
    const std::vector<std::size_t> bad{1, 101};
    CHECK_THROWS(exp1_multistep(m.network, ex.sequence, bad));
    const std::vector<std::size_t> zero{0};
    CHECK_THROWS(exp1_multistep(m.network, ex.sequence, zero));

    const Exp1Result a = exp1_multistep(m.network, ex.sequence);
    const std::vector<std::size_t> reversed{100, 50, 25, 10, 5, 1};
    const Exp1Result b = exp1_multistep(m.network, ex.sequence, reversed);
    for (std::size_t h : kExp1Horizons) {
      const std::string c = std::to_string(h);
      CHECK(a.table.column_mean(c) == b.table.column_mean(c));
    }
    CHECK(a.table.columns().size() == 12);
    CHECK(a.table.row_names().size() == kJointCount);
    CHECK(a.rollout_from_start.size() == 99);
    CHECK(a.tracked.size() == 100);
    // Horizon 1 re-synchronizes on every frame.
    CHECK(a.table.column_mean("1") <= a.table.column_mean("100"));
  }

  TEST_CASE("the block rollout restarts at every sync point") {
    const auto xs = testing::squat_samples();
    const Model m = train_model(ModelVariant::Gamma, xs, GwrConfig::with_depth(5)).model;
    const auto tracked = track_bmus(m.network, xs);
    const auto out = gamma_block_rollout(m.network, tracked, 10);
    REQUIRE(out.size() == tracked.size());
    CHECK(out[0] == tracked[0]);
    for (std::size_t sync = 0; sync + 1 < tracked.size(); sync += 10) {
      CHECK(out[sync + 1] == gamma_successor(m.network, tracked[sync]));
    }
    CHECK_THROWS(gamma_block_rollout(m.network, tracked, 0));
  }

  TEST_CASE("the three variants are compared on one sequence") {
    const RunConfig rc = small_config();
    const auto ex = generate_exercise(make_avatar(1), ExerciseVariant::Correct, 100);
    const Exp2Result r = exp2_compare(ex.sequence, rc);
    CHECK(r.subnode_red_flags == 0);
    CHECK(r.table.column_mean("subnode") < r.table.column_mean("gamma5"));
    CHECK(r.subnode_trajectory.size() == 100);
    CHECK(r.episodic_replay.size() <= 100);
    CHECK(r.table.metadata().at("subnode_red_flags") == "0");
    const Exp2Result again = exp2_compare(ex.sequence, rc);
    CHECK(again.table.to_csv() == r.table.to_csv());
  }

  TEST_CASE("continual adaptation keeps the first avatar's verdicts") {
    const RunConfig rc = small_config(3);
    const Dataset ds = synthesize_dataset(rc);
    const Exp3Result r = exp3_continual(ds, rc);
    CHECK(r.table.row_names() == std::vector<std::string>{"Avatar 01", "Avatar 02", "Avatar 03"});
    CHECK(r.table.columns().size() == 6);
    CHECK(r.run.verdicts.size() == 18);
    CHECK(r.run.adaptations.size() == 3);
    CHECK(r.forgetting_check_passed);
    CHECK(r.table.at("Avatar 01", "Correct") == 1.0);
    for (const auto& v : r.run.verdicts) {
      CHECK(v.accuracy >= 0.0);
      CHECK(v.accuracy <= 1.0);
      CHECK(v.csv().rfind("avatar0", 0) == 0);
    }
    CHECK(exp3_continual(ds, rc).table.to_csv() == r.table.to_csv());
  }

  TEST_CASE("robustness runs one column per perturbation setting") {
    const RunConfig rc = small_config();
    const Dataset ds = synthesize_dataset(rc);
    const Exp4Result r = exp4_robustness(ds, rc);
    CHECK(r.table.columns() ==
          std::vector<std::string>{"centered", "rotation", "translation", "rotation_translation"});
    CHECK(r.table.row_names().size() == 6);
    CHECK(r.runs.size() == 4);
    for (const auto& run : r.runs) CHECK(run.verdicts.size() == 12);
    const auto lines = lines_of(r.table.to_csv());
    CHECK(lines.size() == 1 + 6 + 2);
  }

  TEST_CASE("manifests name the digests and outputs") {
    const RunConfig rc = small_config();
    const std::vector<std::string> outs{"exp4.csv"};
    const std::string m = run_manifest("4", rc, "abc", outs);
    CHECK(m.find("config_digest=" + config_digest(rc)) != std::string::npos);
    CHECK(m.find("dataset_digest=abc") != std::string::npos);
    CHECK(m.find("output=exp4.csv") != std::string::npos);
    const Vec a(kSampleDim, 0.0);
    Vec b(kSampleDim, 0.0);
    b[0] = 0.01;
    b[1] = 0.01;
    CHECK(pixel_error(a, b, 0, ImageDims{}) == doctest::Approx(std::hypot(4.8, 3.2)));
  }
}
