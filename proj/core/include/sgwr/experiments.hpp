#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgwr/feedback.hpp"
#include "sgwr/model.hpp"
#include "sgwr/run_config.hpp"
#include "sgwr/synth.hpp"

namespace sgwr {

/// Labeled rows of numeric cells. The CSV form appends "Average" and "Std. Dev." rows
/// (population standard deviation) over the data rows.
class MetricTable {
 public:
  MetricTable() = default;
  MetricTable(std::string experiment, std::string row_label, std::vector<std::string> columns);

  void add_row(std::string name, std::vector<double> values);

  const std::string& experiment() const { return experiment_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& row_names() const { return rows_; }
  std::size_t column_index(std::string_view column) const;
  const std::vector<double>& row(std::string_view name) const;
  double at(std::string_view row, std::string_view column) const;

  std::vector<double> column_means() const;
  std::vector<double> column_stddevs() const;
  double column_mean(std::string_view column) const;

  std::map<std::string, std::string>& metadata() { return metadata_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  std::string to_csv() const;

 private:
  std::string experiment_;
  std::string row_label_;
  std::vector<std::string> columns_;
  std::vector<std::string> rows_;
  std::vector<std::vector<double>> cells_;
  std::map<std::string, std::string> metadata_;
};

/// One sequence of the synthetic grid with its ground truth.
struct DatasetItem {
  std::string name;
  std::string perturbation;
  GeneratedExercise exercise;
};

struct Dataset {
  std::vector<DatasetItem> items;  // sorted by (avatar, variant, perturbation)
  std::vector<std::string> warnings;

  const DatasetItem& get(int avatar_id, ExerciseVariant variant, std::string_view perturbation) const;
  std::vector<int> avatar_ids() const;
  std::string digest() const;
};

/// avatars x 6 variants x 4 perturbation settings. Avatar i uses seed config.seed + i - 1.
Dataset synthesize_dataset(const RunConfig& config);

/// One "<name>.seq.json" plus "<name>.truth.json" per item.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

inline constexpr std::array<std::size_t, 6> kExp1Horizons = {1, 5, 10, 25, 50, 100};

/// Hyperparameters of `variant` derived from a run config: every field is shared except the
/// context depth, which follows the variant (alpha_k spreads the same total weight).
GwrConfig variant_config(const RunConfig& config, ModelVariant variant);

struct Exp1Result {
  MetricTable table;  // columns "h" (normalized) then "h_px" (source pixels)
  std::vector<std::size_t> horizons;
  std::vector<NodeId> tracked;
  std::vector<NodeId> rollout_from_start;  // |seq| - 1 predictions from the first tracked BMU
  std::optional<std::size_t> stall_step;   // predictions until the rollout reaches a self-loop
};

/// Gamma multi-step prediction error per joint. For horizon h the rollout restarts from the
/// tracked BMU of frames 0, h, 2h, ... and predicts the next h frames; rollouts stop at the
/// sequence end. Errors average frames 1.. over each joint's unmasked frames.
Exp1Result exp1_multistep(const GwrNetwork& net, const PoseSequence& seq,
                          std::span<const std::size_t> horizons = kExp1Horizons);

struct Exp2Result {
  MetricTable table;  // gamma5, episodic, subnode, episodic_chain (+ _px)
  std::size_t subnode_red_flags = 0;
  std::vector<NodeId> episodic_replay;  // autonomous chain from the first BMU, start included
  bool episodic_truncated = false;
  std::size_t episodic_consecutive_duplicates = 0;
  std::vector<NodeId> subnode_trajectory;
  std::size_t subnode_longest_hold = 0;
};

/// Trains the three variants on `seq` and compares their expected poses with it.
Exp2Result exp2_compare(const PoseSequence& seq, const RunConfig& config);

struct VerdictRow {
  int avatar_id = 0;
  ExerciseVariant variant = ExerciseVariant::Correct;
  std::string perturbation;
  int lineage = 0;
  RunVerdict predicted;
  RunVerdict truth;
  double accuracy = 0.0;

  /// avatar,variant,perturbation,lineage,accuracy,predicted flags,truth flags
  std::string csv() const;
};

inline constexpr std::string_view kVerdictHeader = "avatar,variant,perturbation,lineage,accuracy,predicted,truth";

struct AdaptationEvent {
  int avatar_id = 0;
  bool triggered = false;
  double distance = 0.0;
  int lineage = 0;  // lineage added or matched
};

/// Feedback verdict for one performance against the model's expected poses.
VerdictRow classify_performance(const Model& model, const DatasetItem& item, const RunConfig& config,
                                int exercise_id = 0);

/// Sequential adaptation over every avatar followed by classification of its six variants.
struct ContinualRun {
  std::vector<VerdictRow> verdicts;
  std::vector<AdaptationEvent> adaptations;
  std::vector<VerdictRow> first_before;  // first avatar, before any other avatar was adapted
  std::vector<VerdictRow> first_after;   // first avatar, after all adaptations
  Model model;
};

/// Subnode model trained on the first avatar's Correct sequence of `perturbation`.
Model train_subnode_baseline(const Dataset& dataset, const RunConfig& config, std::string_view perturbation);

ContinualRun run_continual(Model model, const Dataset& dataset, const RunConfig& config,
                           std::string_view perturbation);

struct Exp3Result {
  MetricTable table;  // rows "Avatar NN", columns variant names
  ContinualRun run;
  bool forgetting_check_passed = false;
};

Exp3Result exp3_continual(const Dataset& dataset, const RunConfig& config);

struct Exp4Result {
  MetricTable table;  // rows variants, columns perturbation settings
  std::vector<ContinualRun> runs;  // one per setting, same order as the columns
};

/// Exp3 classification repeated per perturbation setting. Each setting starts from the model trained
/// on the first avatar's centered Correct sequence; adaptation and classification use that setting's sequences.
Exp4Result exp4_robustness(const Dataset& dataset, const RunConfig& config);

/// Text manifest: experiment id, digests, seed, resolved config and output files.
std::string run_manifest(std::string_view experiment, const RunConfig& config, std::string_view dataset_digest,
                         std::span<const std::string> outputs);

/// Per-joint 2D error in source pixels.
double pixel_error(std::span<const double> a, std::span<const double> b, std::size_t joint, ImageDims dims);

}  // namespace sgwr
