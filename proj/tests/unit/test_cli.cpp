#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "sgwr/run_config.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run sgwr_run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = sgwr::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t count_files(const fs::path& dir, std::string_view suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().filename().string().ends_with(suffix) ? 1 : 0;
  return n;
}

std::string tree_digest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, dir).string() + "\n" + slurp(f);
  return sgwr::fnv1a_hex(all);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("generate writes the full grid") {
    testing::TempDir dir("cli_gen");
    const Run r = sgwr_run({"generate", "--out", dir.str()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(count_files(dir.path(), ".seq.json") == 240);
    CHECK(count_files(dir.path(), ".truth.json") == 240);
    CHECK(fs::exists(dir.path() / "generate_manifest.txt"));

    testing::TempDir some("cli_gen_some");
    const Run s = sgwr_run({"generate", "--out", some.str(), "--avatars", "2", "--variants", "correct,legs",
                            "--perturbations", "centered"});
    REQUIRE(s.code == 0);
    CHECK(count_files(some.path(), ".seq.json") == 4);
    CHECK(sgwr_run({"generate", "--out", some.str(), "--variants", "hop"}).code == 1);
  }

  TEST_CASE("train then feedback on the training sequence raises no flags") {
    testing::TempDir data("cli_data");
    testing::TempDir work("cli_work");
    REQUIRE(sgwr_run({"generate", "--out", data.str(), "--avatars", "1", "--perturbations", "centered"}).code == 0);
    const std::string seq = (data.path() / "avatar01_correct_centered.seq.json").string();
    const std::string before = tree_digest(data.path());

    const Run t = sgwr_run({"train", seq, "--out", work.str()});
    REQUIRE_MESSAGE(t.code == 0, t.err);
    const std::string model = (work.path() / "avatar01_correct_centered.gwr").string();
    CHECK(fs::exists(model));
    CHECK(fs::exists(work.path() / "train_manifest.txt"));

    const Run f = sgwr_run({"feedback", model, seq, "--out", work.str(), "--overlays"});
    REQUIRE_MESSAGE(f.code == 0, f.err);
    CHECK(f.out.find("red flags: 0,") != std::string::npos);
    CHECK(fs::exists(work.path() / "avatar01_correct_centered_verdict.csv"));
    CHECK(fs::exists(work.path() / "avatar01_correct_centered_0.svg"));
    CHECK(slurp(work.path() / "avatar01_correct_centered_0.svg").find("joint-red") == std::string::npos);

    const Run legs = sgwr_run({"feedback", model, (data.path() / "avatar01_legs_centered.seq.json").string(), "--out",
                               work.str()});
    REQUIRE(legs.code == 0);
    CHECK(legs.out.find("red flags: 0,") == std::string::npos);

    const std::string model_text = slurp(model);
    const std::string baseline = (data.path() / "avatar01_correct_centered.seq.json").string();
    const Run a = sgwr_run({"adapt", model, baseline, "adapted.gwr", "--out", work.str()});
    REQUIRE_MESSAGE(a.code == 0, a.err);
    CHECK(a.out.find("added lineage 1") != std::string::npos);
    CHECK(slurp(model) == model_text);
    CHECK(sgwr_run({"adapt", model, baseline, "--out", work.str()}).code == 1);
    const Run skip = sgwr_run({"adapt", model, baseline, "kept.gwr", "--out", work.str(), "--if-needed"});
    CHECK(skip.out.find("added lineage") == std::string::npos);

    const Run p = sgwr_run({"predict", model, "--horizon", "5", "--out", work.str()});
    REQUIRE_MESSAGE(p.code == 0, p.err);
    const std::string csv = slurp(work.path() / "predictions.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(csv.rfind("step,node,Nose_x,Nose_y", 0) == 0);

    CHECK(tree_digest(data.path()) == before);
  }

  TEST_CASE("experiment 4 writes a four-column table") {
    testing::TempDir work("cli_exp");
    const Run r = sgwr_run({"experiment", "4", "--out", work.str(), "--set", "avatars=2"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const std::string csv = slurp(work.path() / "exp4.csv");
    CHECK(csv.rfind("variant,centered,rotation,translation,rotation_translation\n", 0) == 0);
    CHECK(csv.find("\nStd. Dev.,") != std::string::npos);
    CHECK(fs::exists(work.path() / "exp4_verdicts.csv"));
    CHECK(slurp(work.path() / "exp4_manifest.txt").find("config_digest=") != std::string::npos);

    const std::string first = tree_digest(work.path());
    REQUIRE(sgwr_run({"experiment", "4", "--out", work.str(), "--set", "avatars=2"}).code == 0);
    CHECK(tree_digest(work.path()) == first);
  }

  TEST_CASE("usage errors") {
    const Run none = sgwr_run({});
    CHECK(none.code == 2);
    const Run bogus = sgwr_run({"bogus"});
    CHECK(bogus.code == 2);
    CHECK(bogus.err.find("generate") != std::string::npos);
    const Run no_out = sgwr_run({"generate"});
    CHECK(no_out.code == 2);
    CHECK(no_out.err.find("--out") != std::string::npos);
    CHECK(sgwr_run({"experiment", "7", "--out", "/tmp/x"}).code == 2);
    CHECK(sgwr_run({"train", "/nonexistent.seq.json", "--out", "/tmp/sgwr_never"}).code == 1);
    CHECK(sgwr_run({"train", "x", "--out", "/tmp/s", "--set", "bogus"}).code == 1);
    const Run help = sgwr_run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("experiment") != std::string::npos);
  }
}
