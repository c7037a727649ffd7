#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "sgwr/error.hpp"
#include "sgwr/experiments.hpp"
#include "sgwr/feedback.hpp"
#include "sgwr/model.hpp"
#include "sgwr/pose.hpp"
#include "sgwr/run_config.hpp"
#include "sgwr/snapshot.hpp"
#include "sgwr/synth.hpp"

namespace sgwr::cli {

namespace fs = std::filesystem;

namespace {

struct StageError : Error {
  using Error::Error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string stem_of(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  for (std::string_view ext : {".seq.json", ".json", ".gwr", ".seq"}) {
    if (name.size() > ext.size() && name.ends_with(ext)) return name.substr(0, name.size() - ext.size());
  }
  return fs::path(name).stem().string();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::string variant;

  RunConfig resolve() const {
    ConfigValues file;
    if (!config_path.empty()) {
      file = read_config_file(config_path);
    } else if (const auto env = default_config_path()) {
      file = read_config_file(*env);
    }
    ConfigValues overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
      overrides[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (epochs) overrides["epochs"] = std::to_string(*epochs);
    if (!variant.empty()) overrides["variant"] = variant;
    if (!out_dir.empty()) overrides["output"] = out_dir;
    return resolve_config(file, overrides);
  }

  fs::path out() const {
    if (out_dir.empty()) throw ConfigError("--out is required");
    fs::create_directories(out_dir);
    return fs::path(out_dir);
  }
};

void add_common(CLI::App* app, Common& c, bool with_variant) {
  app->add_option("--config", c.config_path, "key = value config file (default: $SGWR_CONFIG)");
  app->add_option("--set", c.sets, "override one config key (key=value), repeatable");
  app->add_option("--out", c.out_dir, "output directory")->required();
  app->add_option("--seed", c.seed, "run seed");
  app->add_option("--epochs", c.epochs, "training epochs");
  if (with_variant) app->add_option("--variant", c.variant, "gamma | episodic | subnode");
}

void write_manifest(const fs::path& dir, std::string_view stage, const RunConfig& rc, std::string_view data_digest,
                    const std::vector<std::string>& outputs) {
  write_file(dir / (std::string(stage) + "_manifest.txt"), run_manifest(stage, rc, data_digest, outputs));
}

std::string pose_csv_header() {
  std::string h = "step,node";
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const std::string n(joint_name(j));
    h += "," + n + "_x," + n + "_y";
  }
  return h + "\n";
}

std::string pose_csv_row(std::size_t step, NodeId node, const Vec& w) {
  std::string row = std::to_string(step) + "," + std::to_string(node);
  for (double v : w) row += "," + format_real(v);
  return row + "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subnode-GWR exercise feedback toolkit", "sgwr"};
  app.require_subcommand(1);
  std::string stage = "sgwr";
  std::function<void()> action;

  // generate
  Common gen;
  std::string gen_variants = "all";
  std::string gen_perts = "all";
  std::optional<int> gen_avatars;
  std::optional<std::size_t> gen_frames;
  auto* generate = app.add_subcommand("generate", "write the synthetic avatar dataset");
  add_common(generate, gen, false);
  generate->add_option("--avatars", gen_avatars, "number of avatars");
  generate->add_option("--frames", gen_frames, "frames per sequence");
  generate->add_option("--variants", gen_variants, "all or a comma list (correct,arms,head,legs,side,speed)");
  generate->add_option("--perturbations", gen_perts,
                       "all or a comma list (centered,rotation,translation,rotation_translation)");
  generate->callback([&] {
    stage = "generate";
    action = [&] {
      if (gen_avatars) gen.sets.push_back("avatars=" + std::to_string(*gen_avatars));
      if (gen_frames) gen.sets.push_back("frames=" + std::to_string(*gen_frames));
      const RunConfig rc = gen.resolve();
      std::vector<ExerciseVariant> variants(kAllVariants.begin(), kAllVariants.end());
      if (gen_variants != "all") {
        variants.clear();
        for (const auto& name : split_list(gen_variants)) {
          const auto v = parse_variant(name);
          if (!v) throw ConfigError("unknown variant " + name);
          variants.push_back(*v);
        }
      }
      std::vector<std::string> perts;
      for (const auto& np : standard_perturbations(rc.cm_to_px)) perts.emplace_back(np.name);
      if (gen_perts != "all") {
        const auto chosen = split_list(gen_perts);
        for (const auto& p : chosen) {
          if (std::find(perts.begin(), perts.end(), p) == perts.end()) throw ConfigError("unknown perturbation " + p);
        }
        perts = chosen;
      }
      Dataset full = synthesize_dataset(rc);
      Dataset ds;
      for (auto& item : full.items) {
        const bool keep = std::find(variants.begin(), variants.end(), item.exercise.variant) != variants.end() &&
                          std::find(perts.begin(), perts.end(), item.perturbation) != perts.end();
        if (keep) ds.items.push_back(std::move(item));
      }
      for (const auto& w : full.warnings) err << "warning: " << w << "\n";
      const fs::path dir = gen.out();
      save_dataset(ds, dir.string());
      write_manifest(dir, "generate", rc, ds.digest(), {std::to_string(ds.items.size()) + " sequences"});
      out << "wrote " << ds.items.size() << " sequences to " << dir.string() << "\n";
    };
  });

  // ingest
  Common ing;
  std::string ing_dir;
  std::string ing_label;
  double ing_width = 480.0;
  double ing_height = 320.0;
  auto* ingest = app.add_subcommand("ingest", "convert an OpenPose keypoint directory to a sequence file");
  add_common(ingest, ing, false);
  ingest->add_option("input", ing_dir, "directory of per-frame keypoint JSON files")->required();
  ingest->add_option("--label", ing_label, "sequence label (default: directory name)");
  ingest->add_option("--width", ing_width, "source image width in pixels");
  ingest->add_option("--height", ing_height, "source image height in pixels");
  ingest->callback([&] {
    stage = "ingest";
    action = [&] {
      const RunConfig rc = ing.resolve();
      const std::string label = ing_label.empty() ? fs::path(ing_dir).filename().string() : ing_label;
      const PoseSequence seq = ingest_openpose_dir(ing_dir, ImageDims{ing_width, ing_height}, label);
      const fs::path dir = ing.out();
      const std::string name = label + ".seq.json";
      const std::string text = write_sequence(seq);
      write_file(dir / name, text);
      write_manifest(dir, "ingest", rc, fnv1a_hex(text), {name});
      out << "ingested " << seq.size() << " frames into " << (dir / name).string() << "\n";
    };
  });

  // train
  Common tr;
  std::string tr_input;
  std::string tr_output;
  int tr_exercise = 0;
  auto* train_cmd = app.add_subcommand("train", "train a network on a sequence file and save a snapshot");
  add_common(train_cmd, tr, true);
  train_cmd->add_option("input", tr_input, "sequence file")->required();
  train_cmd->add_option("output", tr_output, "snapshot file name inside --out (default: <input>.gwr)");
  train_cmd->add_option("--exercise", tr_exercise, "exercise id recorded by subnode training");
  train_cmd->callback([&] {
    stage = "train";
    action = [&] {
      const RunConfig rc = tr.resolve();
      const std::string seq_text = slurp(tr_input);
      const PoseSequence seq = read_sequence(seq_text);
      const TrainedModel t = train_model(rc.variant, flatten(seq), rc.gwr, rc.seed, tr_exercise, rc.d_t_learning);
      const fs::path dir = tr.out();
      const std::string name = tr_output.empty() ? stem_of(tr_input) + ".gwr" : fs::path(tr_output).filename().string();
      write_file(dir / name, save_snapshot(t.model));
      write_manifest(dir, "train", rc, fnv1a_hex(seq_text), {name});
      out << "trained " << model_variant_name(rc.variant) << " network with " << t.model.network.size()
          << " nodes -> " << (dir / name).string() << "\n";
    };
  });

  // adapt
  Common ad;
  std::string ad_model;
  std::string ad_baseline;
  std::string ad_output;
  int ad_exercise = 0;
  bool ad_if_needed = false;
  auto* adapt = app.add_subcommand("adapt", "add a subnode lineage for a new performer");
  add_common(adapt, ad, false);
  adapt->add_option("model", ad_model, "subnode snapshot")->required();
  adapt->add_option("baseline", ad_baseline, "baseline sequence of the new performer")->required();
  adapt->add_option("output", ad_output, "snapshot file name inside --out (default: <model>.gwr)");
  adapt->add_option("--exercise", ad_exercise, "exercise id");
  adapt->add_flag("--if-needed", ad_if_needed, "only adapt when the first frame exceeds d_t_learning");
  adapt->callback([&] {
    stage = "adapt";
    action = [&] {
      const RunConfig rc = ad.resolve();
      Model model = load_snapshot_file(ad_model);
      if (model.variant != ModelVariant::Subnode) throw Error("adapt needs a subnode snapshot");
      const std::string seq_text = slurp(ad_baseline);
      const std::vector<SampleVector> baseline = flatten(read_sequence(seq_text));
      if (baseline.empty()) throw Error("baseline sequence is empty");
      const AdaptationCheck check = model.exercises.needs_adaptation(model.network, ad_exercise, baseline.front());
      out << "first-frame distance " << format_real(check.pose_distance) << " to lineage " << check.lineage
          << (check.needed ? " (adaptation needed)" : " (within threshold)") << "\n";
      if (check.needed || !ad_if_needed) {
        const int id = model.exercises.adapt_baseline(model.network, ad_exercise, baseline);
        out << "added lineage " << id << "\n";
      }
      const fs::path dir = ad.out();
      const std::string name = ad_output.empty() ? stem_of(ad_model) + ".gwr" : fs::path(ad_output).filename().string();
      const fs::path target = dir / name;
      if (fs::exists(ad_model) && fs::exists(target) && fs::equivalent(ad_model, target)) {
        throw Error("refusing to overwrite the input snapshot " + ad_model);
      }
      write_file(target, save_snapshot(model));
      write_manifest(dir, "adapt", rc, fnv1a_hex(seq_text), {name});
    };
  });

  // feedback
  Common fb;
  std::string fb_model;
  std::string fb_seq;
  int fb_exercise = 0;
  bool fb_overlays = false;
  std::size_t fb_horizon = 5;
  auto* feedback = app.add_subcommand("feedback", "compare a performance with the model's expected poses");
  add_common(feedback, fb, false);
  feedback->add_option("model", fb_model, "snapshot")->required();
  feedback->add_option("sequence", fb_seq, "performance sequence file")->required();
  feedback->add_option("--exercise", fb_exercise, "exercise id (subnode)");
  feedback->add_option("--gamma-horizon", fb_horizon, "re-sync interval for gamma predictions");
  feedback->add_flag("--overlays", fb_overlays, "write one SVG overlay per frame");
  feedback->callback([&] {
    stage = "feedback";
    action = [&] {
      const RunConfig rc = fb.resolve();
      const Model model = load_snapshot_file(fb_model);
      const std::string seq_text = slurp(fb_seq);
      const PoseSequence seq = read_sequence(seq_text);
      if (seq.empty()) throw Error("sequence is empty");
      const ExpectedPoses expected = expected_poses(model, flatten(seq), fb_exercise, fb_horizon);
      std::vector<FeedbackFrame> frames;
      for (std::size_t t = 0; t < seq.size(); ++t) {
        frames.push_back(joint_errors(seq.frames[t], expected.poses[t], rc.d_t_pose));
      }
      const RunVerdict verdict = classify_run(frames, rc.flag_fraction);
      const fs::path dir = fb.out();
      const std::string base = seq.label.empty() ? stem_of(fb_seq) : seq.label;
      std::string csv = "joint,red_frames,unmasked_frames,erroneous\n";
      std::size_t total_red = 0;
      for (std::size_t j = 0; j < kJointCount; ++j) {
        std::size_t red = 0;
        std::size_t seen = 0;
        for (const auto& f : frames) {
          if (f.flag[j] == JointFlag::Masked) continue;
          ++seen;
          if (f.flag[j] == JointFlag::Red) ++red;
        }
        total_red += red;
        csv += std::string(joint_name(j)) + "," + std::to_string(red) + "," + std::to_string(seen) + "," +
               (verdict.erroneous[j] ? "1" : "0") + "\n";
      }
      std::vector<std::string> outputs{base + "_verdict.csv"};
      write_file(dir / outputs.front(), csv);
      if (fb_overlays) {
        for (std::size_t t = 0; t < seq.size(); ++t) {
          const std::string name = base + "_" + std::to_string(seq.frames[t].frame_index) + ".svg";
          write_file(dir / name, render_overlay(seq.frames[t], expected.poses[t], frames[t], seq.source_dims));
        }
        outputs.push_back(std::to_string(seq.size()) + " overlays");
      }
      write_manifest(dir, "feedback", rc, fnv1a_hex(seq_text), outputs);
      std::size_t flagged = 0;
      for (bool b : verdict.erroneous) flagged += b ? 1 : 0;
      out << "red flags: " << total_red << ", erroneous joints: " << flagged << "\n";
    };
  });

  // predict
  Common pr;
  std::string pr_model;
  NodeId pr_start = 0;
  std::size_t pr_horizon = 10;
  int pr_exercise = 0;
  int pr_lineage = 0;
  auto* predict = app.add_subcommand("predict", "roll the model forward and write the predicted poses");
  add_common(predict, pr, false);
  predict->add_option("model", pr_model, "snapshot")->required();
  predict->add_option("--start", pr_start, "start node id (subnode: trajectory position)");
  predict->add_option("--horizon", pr_horizon, "number of predicted poses")->required();
  predict->add_option("--exercise", pr_exercise, "exercise id (subnode)");
  predict->add_option("--lineage", pr_lineage, "lineage (subnode, 0 = parent)");
  predict->callback([&] {
    stage = "predict";
    action = [&] {
      const RunConfig rc = pr.resolve();
      const Model model = load_snapshot_file(pr_model);
      const GwrNetwork& net = model.network;
      std::string csv = pose_csv_header();
      bool truncated = false;
      switch (model.variant) {
        case ModelVariant::Gamma: {
          const auto ids = gamma_predict(net, pr_start, pr_horizon);
          for (std::size_t i = 0; i < ids.size(); ++i) csv += pose_csv_row(i + 1, ids[i], net.node(ids[i]).weight);
          break;
        }
        case ModelVariant::Episodic: {
          if (!net.contains(pr_start)) throw Error("unknown start node " + std::to_string(pr_start));
          const EpisodicReplay r = episodic_replay(net, model.transitions, pr_start, pr_horizon);
          for (std::size_t i = 0; i < r.nodes.size(); ++i) csv += pose_csv_row(i + 1, r.nodes[i], r.poses[i]);
          truncated = r.truncated;
          break;
        }
        case ModelVariant::Subnode: {
          const auto& traj = model.exercises.trajectory(pr_exercise);
          const auto poses = model.exercises.replay(net, pr_exercise, pr_lineage);
          if (pr_start < 0 || static_cast<std::size_t>(pr_start) >= traj.size()) {
            throw Error("start position outside the trajectory");
          }
          std::size_t step = 1;
          for (std::size_t p = static_cast<std::size_t>(pr_start) + 1; p < traj.size() && step <= pr_horizon; ++p) {
            csv += pose_csv_row(step++, traj.bmus[p], poses[p]);
          }
          truncated = step <= pr_horizon;
          break;
        }
      }
      const fs::path dir = pr.out();
      write_file(dir / "predictions.csv", csv);
      write_manifest(dir, "predict", rc, fnv1a_hex(slurp(pr_model)), {"predictions.csv"});
      if (truncated) err << "warning: prediction stopped before the requested horizon\n";
    };
  });

  // experiment
  Common ex;
  int ex_id = 0;
  std::string ex_dataset;
  auto* experiment = app.add_subcommand("experiment", "run experiment 1, 2, 3 or 4 and write metric CSVs");
  add_common(experiment, ex, false);
  experiment->add_option("id", ex_id, "experiment number")->required()->check(CLI::Range(1, 4));
  experiment->add_option("--dataset", ex_dataset, "dataset directory (default: synthesize)");
  experiment->callback([&] {
    stage = "experiment";
    action = [&] {
      const RunConfig rc = ex.resolve();
      const Dataset ds = ex_dataset.empty() ? synthesize_dataset(rc) : load_dataset(ex_dataset);
      const fs::path dir = ex.out();
      const std::string tag = "exp" + std::to_string(ex_id);
      std::vector<std::string> outputs{tag + ".csv"};
      const int first = ds.avatar_ids().front();
      const PoseSequence& seq = ds.get(first, ExerciseVariant::Correct, "centered").exercise.sequence;
      MetricTable table;
      switch (ex_id) {
        case 1: {
          const Model g = train_model(ModelVariant::Gamma, flatten(seq), variant_config(rc, ModelVariant::Gamma),
                                      rc.seed)
                              .model;
          table = exp1_multistep(g.network, seq).table;
          break;
        }
        case 2:
          table = exp2_compare(seq, rc).table;
          break;
        case 3: {
          const Exp3Result r = exp3_continual(ds, rc);
          table = r.table;
          std::string v = std::string(kVerdictHeader) + "\n";
          for (const auto& row : r.run.verdicts) v += row.csv() + "\n";
          write_file(dir / "exp3_verdicts.csv", v);
          outputs.push_back("exp3_verdicts.csv");
          break;
        }
        case 4: {
          const Exp4Result r = exp4_robustness(ds, rc);
          table = r.table;
          std::string v = std::string(kVerdictHeader) + "\n";
          for (const auto& run : r.runs) {
            for (const auto& row : run.verdicts) v += row.csv() + "\n";
          }
          write_file(dir / "exp4_verdicts.csv", v);
          outputs.push_back("exp4_verdicts.csv");
          break;
        }
      }
      write_file(dir / outputs.front(), table.to_csv());
      std::string manifest = run_manifest(tag, rc, ds.digest(), outputs);
      for (const auto& [k, v] : table.metadata()) manifest += "meta." + k + "=" + v + "\n";
      write_file(dir / (tag + "_manifest.txt"), manifest);
      out << "wrote " << (dir / outputs.front()).string() << "\n";
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "sgwr: " << e.what() << "\n" << app.help();
    return 2;
  }
  if (!action) {
    err << app.help();
    return 2;
  }
  try {
    action();
  } catch (const std::exception& e) {
    err << "sgwr " << stage << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sgwr::cli
