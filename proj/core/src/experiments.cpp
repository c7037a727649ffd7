#include "sgwr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sgwr/error.hpp"

namespace sgwr {

namespace fs = std::filesystem;

namespace {

std::string cell(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

std::string flag_string(const JointMask& m) {
  std::string s(kJointCount, '0');
  for (std::size_t j = 0; j < kJointCount; ++j) s[j] = m[j] ? '1' : '0';
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int perturbation_rank(std::string_view name) {
  const auto settings = standard_perturbations();
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (settings[i].name == name) return static_cast<int>(i);
  }
  return static_cast<int>(settings.size());
}

// Per-joint mean error of expected poses against frames [1, n), normalized and in pixels.
struct JointErrors {
  std::array<double, kJointCount> normalized{};
  std::array<double, kJointCount> pixels{};
};

JointErrors mean_joint_errors(const PoseSequence& seq, const std::vector<Vec>& expected) {
  JointErrors out;
  std::array<std::size_t, kJointCount> counts{};
  for (std::size_t t = 1; t < seq.size(); ++t) {
    const auto& f = seq.frames[t];
    for (std::size_t j = 0; j < kJointCount; ++j) {
      if (f.masked(j)) continue;
      const double dx = f.joints[j].x - expected[t][2 * j];
      const double dy = f.joints[j].y - expected[t][2 * j + 1];
      out.normalized[j] += std::hypot(dx, dy);
      out.pixels[j] += std::hypot(dx * seq.source_dims.width, dy * seq.source_dims.height);
      ++counts[j];
    }
  }
  for (std::size_t j = 0; j < kJointCount; ++j) {
    if (counts[j] == 0) continue;
    out.normalized[j] /= static_cast<double>(counts[j]);
    out.pixels[j] /= static_cast<double>(counts[j]);
  }
  return out;
}

std::vector<Vec> weights_of(const GwrNetwork& net, const std::vector<NodeId>& ids) {
  std::vector<Vec> out;
  out.reserve(ids.size());
  for (NodeId id : ids) out.push_back(net.node(id).weight);
  return out;
}

MetricTable joint_table(std::string experiment, const std::vector<std::string>& labels,
                        const std::vector<JointErrors>& errors) {
  std::vector<std::string> columns = labels;
  for (const auto& l : labels) columns.push_back(l + "_px");
  MetricTable t(std::move(experiment), "joint", columns);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    std::vector<double> row;
    for (const auto& e : errors) row.push_back(e.normalized[j]);
    for (const auto& e : errors) row.push_back(e.pixels[j]);
    t.add_row(std::string(joint_name(j)), std::move(row));
  }
  return t;
}

std::size_t longest_run(const std::vector<NodeId>& ids) {
  std::size_t best = 0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    run = (i > 0 && ids[i] == ids[i - 1]) ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

}  // namespace

// MetricTable

MetricTable::MetricTable(std::string experiment, std::string row_label, std::vector<std::string> columns)
    : experiment_(std::move(experiment)), row_label_(std::move(row_label)), columns_(std::move(columns)) {
  metadata_["experiment"] = experiment_;
}

void MetricTable::add_row(std::string name, std::vector<double> values) {
  if (values.size() != columns_.size()) {
    throw Error("metric table: row '" + name + "' has " + std::to_string(values.size()) + " cells, expected " +
                std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(name));
  cells_.push_back(std::move(values));
}

std::size_t MetricTable::column_index(std::string_view column) const {
  const auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) throw Error("metric table: no column " + std::string(column));
  return static_cast<std::size_t>(it - columns_.begin());
}

const std::vector<double>& MetricTable::row(std::string_view name) const {
  const auto it = std::find(rows_.begin(), rows_.end(), name);
  if (it == rows_.end()) throw Error("metric table: no row " + std::string(name));
  return cells_[static_cast<std::size_t>(it - rows_.begin())];
}

double MetricTable::at(std::string_view r, std::string_view c) const { return row(r)[column_index(c)]; }

std::vector<double> MetricTable::column_means() const {
  std::vector<double> out(columns_.size(), 0.0);
  if (cells_.empty()) return out;
  for (const auto& r : cells_) {
    for (std::size_t c = 0; c < r.size(); ++c) out[c] += r[c];
  }
  for (double& v : out) v /= static_cast<double>(cells_.size());
  return out;
}

std::vector<double> MetricTable::column_stddevs() const {
  const std::vector<double> mean = column_means();
  std::vector<double> out(columns_.size(), 0.0);
  if (cells_.empty()) return out;
  for (const auto& r : cells_) {
    for (std::size_t c = 0; c < r.size(); ++c) out[c] += (r[c] - mean[c]) * (r[c] - mean[c]);
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(cells_.size()));
  return out;
}

double MetricTable::column_mean(std::string_view column) const { return column_means()[column_index(column)]; }

std::string MetricTable::to_csv() const {
  std::string out = row_label_;
  for (const auto& c : columns_) out += "," + c;
  out += "\n";
  auto emit = [&](const std::string& name, const std::vector<double>& values) {
    out += name;
    for (double v : values) out += "," + cell(v);
    out += "\n";
  };
  for (std::size_t r = 0; r < rows_.size(); ++r) emit(rows_[r], cells_[r]);
  emit("Average", column_means());
  emit("Std. Dev.", column_stddevs());
  return out;
}

// Dataset

const DatasetItem& Dataset::get(int avatar_id, ExerciseVariant variant, std::string_view perturbation) const {
  for (const auto& item : items) {
    if (item.exercise.avatar.avatar_id == avatar_id && item.exercise.variant == variant &&
        item.perturbation == perturbation) {
      return item;
    }
  }
  throw Error("dataset: no sequence for avatar " + std::to_string(avatar_id) + " " +
              std::string(variant_name(variant)) + " " + std::string(perturbation));
}

std::vector<int> Dataset::avatar_ids() const {
  std::vector<int> ids;
  for (const auto& item : items) ids.push_back(item.exercise.avatar.avatar_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::string Dataset::digest() const {
  std::uint64_t h = fnv1a("");
  for (const auto& item : items) {
    h = fnv1a(item.name + "\n", h);
    h = fnv1a(write_sequence(item.exercise.sequence), h);
    h = fnv1a(write_truth(item.exercise), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Dataset synthesize_dataset(const RunConfig& config) {
  Dataset ds;
  for (int i = 1; i <= config.avatars; ++i) {
    const AvatarSpec avatar = make_avatar(config.seed + static_cast<std::uint64_t>(i) - 1, i);
    for (ExerciseVariant v : kAllVariants) {
      const GeneratedExercise base = generate_exercise(avatar, v, config.frames, config.d_t_pose);
      for (const auto& [name, p] : standard_perturbations(config.cm_to_px)) {
        DatasetItem item;
        item.name = exercise_name(avatar, v, name);
        item.perturbation = std::string(name);
        PerturbResult r = perturb(base.sequence, p, avatar.root_x);
        for (auto& w : r.warnings) ds.warnings.push_back(item.name + ": " + w);
        item.exercise = base;
        item.exercise.perturbation = p;
        item.exercise.sequence = std::move(r.sequence);
        item.exercise.sequence.label = item.name;
        ds.items.push_back(std::move(item));
      }
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& item : dataset.items) {
    write_text(fs::path(dir) / (item.name + ".seq.json"), write_sequence(item.exercise.sequence));
    write_text(fs::path(dir) / (item.name + ".truth.json"), write_truth(item.exercise));
  }
}

Dataset load_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IngestError("dataset: not a directory: " + dir);
  std::vector<fs::path> seqs;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() > 9 && name.ends_with(".seq.json")) seqs.push_back(e.path());
  }
  if (seqs.empty()) throw IngestError("dataset: no sequences in " + dir);
  Dataset ds;
  for (const auto& p : seqs) {
    const std::string file = p.filename().string();
    const std::string stem = file.substr(0, file.size() - 9);
    const fs::path truth_path = p.parent_path() / (stem + ".truth.json");
    DatasetItem item;
    item.name = stem;
    item.exercise.sequence = read_sequence(read_text(p));
    const TruthFile truth = read_truth(read_text(truth_path));
    if (truth.flags.size() != item.exercise.sequence.size()) {
      throw FormatError("dataset: " + stem + " truth covers " + std::to_string(truth.flags.size()) +
                        " frames, sequence has " + std::to_string(item.exercise.sequence.size()));
    }
    item.exercise.truth = truth.flags;
    item.exercise.avatar.avatar_id = truth.avatar_id;
    item.exercise.variant = truth.variant;
    item.exercise.perturbation = truth.perturbation;
    const auto us = stem.rfind('_' + lower(variant_name(truth.variant)) + '_');
    item.perturbation = us == std::string::npos ? "centered"
                                                : stem.substr(us + variant_name(truth.variant).size() + 2);
    ds.items.push_back(std::move(item));
  }
  std::sort(ds.items.begin(), ds.items.end(), [](const DatasetItem& a, const DatasetItem& b) {
    const auto ka = std::tuple(a.exercise.avatar.avatar_id, static_cast<int>(a.exercise.variant),
                               perturbation_rank(a.perturbation), a.name);
    const auto kb = std::tuple(b.exercise.avatar.avatar_id, static_cast<int>(b.exercise.variant),
                               perturbation_rank(b.perturbation), b.name);
    return ka < kb;
  });
  return ds;
}

GwrConfig variant_config(const RunConfig& config, ModelVariant variant) {
  GwrConfig g = config.gwr;
  const std::size_t depth = default_config(variant).context_depth;
  if (depth != g.context_depth) {
    const double total = std::accumulate(g.alpha_k.begin(), g.alpha_k.end(), 0.0);
    g.context_depth = depth;
    g.alpha_k.assign(depth, total / static_cast<double>(depth));
  }
  return g;
}

double pixel_error(std::span<const double> a, std::span<const double> b, std::size_t joint, ImageDims dims) {
  return std::hypot((a[2 * joint] - b[2 * joint]) * dims.width, (a[2 * joint + 1] - b[2 * joint + 1]) * dims.height);
}

// Experiment 1

Exp1Result exp1_multistep(const GwrNetwork& net, const PoseSequence& seq, std::span<const std::size_t> horizons) {
  if (seq.size() < 2) throw Error("exp1: sequence needs at least two frames");
  for (std::size_t h : horizons) {
    if (h == 0 || h > seq.size()) {
      throw Error("exp1: horizon " + std::to_string(h) + " outside [1, " + std::to_string(seq.size()) + "]");
    }
  }
  const std::vector<SampleVector> samples = flatten(seq);
  Exp1Result out;
  out.horizons.assign(horizons.begin(), horizons.end());
  out.tracked = track_bmus(net, samples);

  std::vector<std::string> labels;
  std::vector<JointErrors> errors;
  for (std::size_t h : horizons) {
    labels.push_back(std::to_string(h));
    errors.push_back(mean_joint_errors(seq, weights_of(net, gamma_block_rollout(net, out.tracked, h))));
  }
  out.table = joint_table("exp1", labels, errors);

  out.rollout_from_start = gamma_predict(net, out.tracked[0], seq.size() - 1);
  for (std::size_t i = 0; i < out.rollout_from_start.size(); ++i) {
    if (gamma_successor(net, out.rollout_from_start[i]) == out.rollout_from_start[i]) {
      out.stall_step = i + 1;
      break;
    }
  }
  out.table.metadata()["stall_step"] = out.stall_step ? std::to_string(*out.stall_step) : "none";
  return out;
}

// Experiment 2

Exp2Result exp2_compare(const PoseSequence& seq, const RunConfig& config) {
  const std::vector<SampleVector> samples = flatten(seq);
  Exp2Result out;
  const auto train = [&](ModelVariant v) {
    return train_model(v, samples, variant_config(config, v), config.seed, 0, config.d_t_learning).model;
  };
  const Model gamma = train(ModelVariant::Gamma);
  const Model episodic = train(ModelVariant::Episodic);
  const Model subnode = train(ModelVariant::Subnode);

  const ExpectedPoses g = expected_poses(gamma, samples, 0, 5);
  const ExpectedPoses e = expected_poses(episodic, samples);
  const ExpectedPoses s = expected_poses(subnode, samples);

  const NodeId start = e.nodes.front();
  const EpisodicReplay chain = episodic_replay(episodic.network, episodic.transitions, start, seq.size() - 1);
  out.episodic_replay.push_back(start);
  out.episodic_replay.insert(out.episodic_replay.end(), chain.nodes.begin(), chain.nodes.end());
  out.episodic_truncated = chain.truncated;
  for (std::size_t i = 1; i < out.episodic_replay.size(); ++i) {
    if (out.episodic_replay[i] == out.episodic_replay[i - 1]) ++out.episodic_consecutive_duplicates;
  }
  std::vector<NodeId> padded = out.episodic_replay;
  while (padded.size() < seq.size()) padded.push_back(padded.back());

  out.table = joint_table("exp2", {"gamma5", "episodic", "subnode", "episodic_chain"},
                          {mean_joint_errors(seq, g.poses), mean_joint_errors(seq, e.poses),
                           mean_joint_errors(seq, s.poses),
                           mean_joint_errors(seq, weights_of(episodic.network, padded))});

  for (std::size_t t = 0; t < seq.size(); ++t) {
    out.subnode_red_flags += joint_errors(seq.frames[t], s.poses[t], config.d_t_pose).red_count();
  }
  out.subnode_trajectory = subnode.exercises.trajectory(0).bmus;
  out.subnode_longest_hold = longest_run(out.subnode_trajectory);
  out.table.metadata()["subnode_red_flags"] = std::to_string(out.subnode_red_flags);
  out.table.metadata()["episodic_chain_length"] = std::to_string(out.episodic_replay.size());
  out.table.metadata()["episodic_chain_truncated"] = out.episodic_truncated ? "true" : "false";
  out.table.metadata()["subnode_longest_hold"] = std::to_string(out.subnode_longest_hold);
  return out;
}

// Experiments 3 and 4

std::string VerdictRow::csv() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "avatar%02d", avatar_id);
  return std::string(buf) + "," + lower(variant_name(variant)) + "," + perturbation + "," + std::to_string(lineage) +
         "," + cell(accuracy) + "," + flag_string(predicted.erroneous) + "," + flag_string(truth.erroneous);
}

VerdictRow classify_performance(const Model& model, const DatasetItem& item, const RunConfig& config,
                                int exercise_id) {
  const PoseSequence& seq = item.exercise.sequence;
  const ExpectedPoses expected = expected_poses(model, flatten(seq), exercise_id);
  std::vector<FeedbackFrame> frames;
  frames.reserve(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    frames.push_back(joint_errors(seq.frames[t], expected.poses[t], config.d_t_pose));
  }
  VerdictRow row;
  row.avatar_id = item.exercise.avatar.avatar_id;
  row.variant = item.exercise.variant;
  row.perturbation = item.perturbation;
  row.lineage = expected.lineage;
  row.predicted = classify_run(frames, config.flag_fraction);
  row.truth = aggregate_flags(item.exercise.truth, config.flag_fraction);
  row.accuracy = score_against_ground_truth(row.predicted, row.truth.erroneous);
  return row;
}

Model train_subnode_baseline(const Dataset& dataset, const RunConfig& config, std::string_view perturbation) {
  const std::vector<int> ids = dataset.avatar_ids();
  if (ids.empty()) throw Error("continual: empty dataset");
  const auto& item = dataset.get(ids.front(), ExerciseVariant::Correct, perturbation);
  return train_model(ModelVariant::Subnode, flatten(item.exercise.sequence),
                     variant_config(config, ModelVariant::Subnode), config.seed, 0, config.d_t_learning)
      .model;
}

ContinualRun run_continual(Model model, const Dataset& dataset, const RunConfig& config,
                           std::string_view perturbation) {
  if (model.variant != ModelVariant::Subnode) throw Error("continual: model must be subnode");
  ContinualRun run{{}, {}, {}, {}, std::move(model)};
  Model& m = run.model;
  const std::vector<int> ids = dataset.avatar_ids();
  auto classify_all = [&](int avatar, std::vector<VerdictRow>& sink) {
    for (ExerciseVariant v : kAllVariants) {
      sink.push_back(classify_performance(m, dataset.get(avatar, v, perturbation), config));
    }
  };
  for (int avatar : ids) {
    const auto& correct = dataset.get(avatar, ExerciseVariant::Correct, perturbation);
    const std::vector<SampleVector> baseline = flatten(correct.exercise.sequence);
    const AdaptationCheck check = m.exercises.needs_adaptation(m.network, 0, baseline.front());
    AdaptationEvent ev{avatar, check.needed, check.pose_distance, check.lineage};
    if (check.needed) ev.lineage = m.exercises.adapt_baseline(m.network, 0, baseline);
    run.adaptations.push_back(ev);
    const std::size_t first = run.verdicts.size();
    classify_all(avatar, run.verdicts);
    if (avatar == ids.front()) run.first_before.assign(run.verdicts.begin() + static_cast<std::ptrdiff_t>(first),
                                                       run.verdicts.end());
  }
  classify_all(ids.front(), run.first_after);
  return run;
}

Exp3Result exp3_continual(const Dataset& dataset, const RunConfig& config) {
  Exp3Result out{{}, run_continual(train_subnode_baseline(dataset, config, "centered"), dataset, config, "centered"),
                 false};
  std::vector<std::string> columns;
  for (ExerciseVariant v : kAllVariants) columns.emplace_back(variant_name(v));
  out.table = MetricTable("exp3", "avatar", columns);
  for (std::size_t i = 0; i < out.run.verdicts.size(); i += kAllVariants.size()) {
    std::vector<double> row;
    for (std::size_t k = 0; k < kAllVariants.size(); ++k) row.push_back(out.run.verdicts[i + k].accuracy);
    char name[32];
    std::snprintf(name, sizeof name, "Avatar %02d", out.run.verdicts[i].avatar_id);
    out.table.add_row(name, std::move(row));
  }
  out.forgetting_check_passed = out.run.first_before.size() == out.run.first_after.size();
  for (std::size_t i = 0; out.forgetting_check_passed && i < out.run.first_before.size(); ++i) {
    out.forgetting_check_passed = out.run.first_before[i].csv() == out.run.first_after[i].csv();
  }
  std::size_t adapted = 0;
  for (const auto& ev : out.run.adaptations) adapted += ev.triggered ? 1 : 0;
  out.table.metadata()["adaptations"] = std::to_string(adapted);
  out.table.metadata()["forgetting_check"] = out.forgetting_check_passed ? "pass" : "fail";
  return out;
}

Exp4Result exp4_robustness(const Dataset& dataset, const RunConfig& config) {
  Exp4Result out;
  const Model trained = train_subnode_baseline(dataset, config, "centered");
  std::vector<std::string> columns;
  for (const auto& np : standard_perturbations(config.cm_to_px)) {
    columns.emplace_back(np.name);
    out.runs.push_back(run_continual(trained, dataset, config, np.name));
  }
  out.table = MetricTable("exp4", "variant", columns);
  for (ExerciseVariant v : kAllVariants) {
    std::vector<double> row;
    for (const auto& run : out.runs) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : run.verdicts) {
        if (r.variant != v) continue;
        sum += r.accuracy;
        ++n;
      }
      row.push_back(n ? sum / static_cast<double>(n) : 0.0);
    }
    out.table.add_row(std::string(variant_name(v)), std::move(row));
  }
  return out;
}

std::string run_manifest(std::string_view experiment, const RunConfig& config, std::string_view dataset_digest,
                         std::span<const std::string> outputs) {
  std::string out;
  out += "experiment=" + std::string(experiment) + "\n";
  out += "config_digest=" + config_digest(config) + "\n";
  out += "dataset_digest=" + std::string(dataset_digest) + "\n";
  out += "seed=" + std::to_string(config.seed) + "\n";
  for (const auto& o : outputs) out += "output=" + o + "\n";
  out += "[config]\n" + canonical_config(config);
  return out;
}

}  // namespace sgwr
