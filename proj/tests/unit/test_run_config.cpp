#include <doctest.h>

#include <charconv>
#include <cstring>
#include <cstdlib>
#include <fstream>
#include <random>

#include "sgwr/error.hpp"
#include "sgwr/run_config.hpp"
#include "support.hpp"

using namespace sgwr;

TEST_SUITE("run_config") {
  TEST_CASE("defaults match the reference hyperparameters") {
    const RunConfig rc = resolve_config({});
    const GwrConfig& g = rc.gwr;
    CHECK(rc.variant == ModelVariant::Subnode);
    CHECK(g.alpha0 == 0.5);
    CHECK(g.alpha_k == std::vector<double>{0.5});
    CHECK(g.beta == 0.5);
    CHECK(g.context_depth == 1);
    CHECK(g.eps_b == 0.2);
    CHECK(g.eps_n == 0.001);
    CHECK(g.kappa == 1.05);
    CHECK(g.tau_b == 0.3);
    CHECK(g.tau_n == 0.1);
    CHECK(g.activity_threshold == 0.99);
    CHECK(g.habituation_threshold == 0.3);
    CHECK(g.max_edge_age == 20);
    CHECK(g.max_nodes == 200);
    CHECK(g.epochs == 3);
    CHECK(rc.d_t_pose == 0.04);
    CHECK(rc.d_t_learning == 0.15);
    CHECK(rc.flag_fraction == 0.10);
    CHECK(rc.cm_to_px == 3.0);
    CHECK(rc.avatars == 10);
    CHECK(rc.frames == 100);
  }

  TEST_CASE("gamma defaults to five context terms") {
    const RunConfig rc = resolve_config({{"variant", "gamma"}});
    CHECK(rc.gwr.context_depth == 5);
    REQUIRE(rc.gwr.alpha_k.size() == 5);
    for (double a : rc.gwr.alpha_k) CHECK(a == doctest::Approx(0.1));
    const RunConfig deep = resolve_config({{"variant", "episodic"}, {"context_depth", "4"}, {"alpha_total", "0.8"}});
    CHECK(deep.gwr.alpha_k == std::vector<double>(4, 0.2));
  }

  TEST_CASE("config text parses and overrides win") {
    const ConfigValues file = parse_config_text(
        "# tuning\n"
        "epochs = 5\n"
        "\n"
        "  beta=0.25   # inline comment\r\n"
        "seed = 9\n");
    CHECK(file.at("epochs") == "5");
    CHECK(file.at("beta") == "0.25");
    const RunConfig rc = resolve_config(file, {{"epochs", "7"}});
    CHECK(rc.gwr.epochs == 7);
    CHECK(rc.gwr.beta == 0.25);
    CHECK(rc.seed == 9);
    const RunConfig list = resolve_config({{"context_depth", "2"}, {"alpha_k", "0.1, 0.3"}});
    CHECK(list.gwr.alpha_k == std::vector<double>{0.1, 0.3});
  }

  TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS_AS(parse_config_text("epochs 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("epochs = 5\nepochs = 6\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text(" = 5\n"), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"epoch", "5"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"epochs", "five"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"epochs", "0"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"beta", "2"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"variant", "delta"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"alpha_k", "0.1,0.2"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config({{"context_rule", "sideways"}}), ConfigError);
    CHECK_THROWS_AS(read_config_file("/nonexistent/sgwr.cfg"), ConfigError);
  }

  TEST_CASE("the config path can come from the environment") {
    testing::TempDir dir("cfg");
    const std::string path = (dir.path() / "run.cfg").string();
    std::ofstream(path) << "frames = 40\n";
    ::setenv("SGWR_CONFIG", path.c_str(), 1);
    const auto found = default_config_path();
    REQUIRE(found.has_value());
    CHECK(resolve_config(read_config_file(*found)).frames == 40);
    ::setenv("SGWR_CONFIG", "", 1);
    CHECK_FALSE(default_config_path().has_value());
    ::unsetenv("SGWR_CONFIG");
    CHECK_FALSE(default_config_path().has_value());
  }

  TEST_CASE("the digest covers values but not paths") {
    const RunConfig a = resolve_config({});
    CHECK(config_digest(a) == config_digest(resolve_config({})));
    CHECK(config_digest(a).size() == 16);
    CHECK(config_digest(a) != config_digest(resolve_config({{"seed", "2"}})));
    CHECK(config_digest(a) != config_digest(resolve_config({{"eps_n", "0.002"}})));
    CHECK(config_digest(a) == config_digest(resolve_config({{"input", "/a"}, {"output", "/b"}})));
    const std::string text = canonical_config(a);
    CHECK(text.find("input") == std::string::npos);
    CHECK(text.rfind("activity_threshold=0.99\n", 0) == 0);
  }

  TEST_CASE("fnv1a matches published vectors") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
    CHECK(fnv1a("bar", fnv1a("foo")) == fnv1a("foobar"));
  }

  TEST_CASE("format_real round-trips every double") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 2000; ++i) {
      const std::uint64_t bits = rng();
      double v;
      std::memcpy(&v, &bits, sizeof v);
      if (!std::isfinite(v)) continue;
      const std::string s = format_real(v);
      double back = 0.0;
      std::from_chars(s.data(), s.data() + s.size(), back);
      CHECK(back == v);
    }
    CHECK(format_real(0.1) == "0.1");
    CHECK(format_real(3.0) == "3");
  }
}
