#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sgwr/pose.hpp"

namespace sgwr {

using NodeId = std::int64_t;
using Vec = std::vector<double>;

/// How the first term of the global context is formed from the previous BMU.
enum class ContextRule {
  PreviousWeight,   // C_k = beta * w_prev + (1 - beta) * c_prev,k-1
  PreviousContext,  // C_k = beta * c_prev,k + (1 - beta) * c_prev,k-1
};

struct GwrConfig {
  double alpha0 = 0.5;
  std::vector<double> alpha_k{0.5};
  double beta = 0.5;
  std::size_t context_depth = 1;
  double eps_b = 0.2;
  double eps_n = 0.001;
  double kappa = 1.05;
  double tau_b = 0.3;
  double tau_n = 0.1;
  double activity_threshold = 0.99;
  double habituation_threshold = 0.3;
  int max_edge_age = 20;
  std::size_t max_nodes = 200;
  int epochs = 3;
  ContextRule context_rule = ContextRule::PreviousWeight;

  /// Defaults with K context terms sharing the context weight equally: alpha_k = alpha_total / K.
  static GwrConfig with_depth(std::size_t depth, double alpha_total = 0.5);

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  friend bool operator==(const GwrConfig&, const GwrConfig&) = default;
};

struct GwrNode {
  NodeId id = 0;
  Vec weight;
  std::vector<Vec> context;
  double habituation = 1.0;

  friend bool operator==(const GwrNode&, const GwrNode&) = default;
};

/// Pre-update copy of the BMU selected on the previous step.
struct PreviousBmu {
  NodeId id = 0;
  Vec weight;
  std::vector<Vec> context;

  friend bool operator==(const PreviousBmu&, const PreviousBmu&) = default;
};

struct BmuPair {
  NodeId best = 0;
  NodeId second = 0;
  double best_distance = 0.0;
  double second_distance = 0.0;
};

struct StepRecord {
  NodeId bmu = 0;
  NodeId second = 0;
  double activity = 0.0;
  double bmu_habituation = 0.0;  // before this step's habituation
  std::size_t node_count = 0;    // before insertion or pruning
  bool inserted = false;
  std::optional<NodeId> new_node;
};

using EdgeKey = std::pair<NodeId, NodeId>;

inline EdgeKey edge_key(NodeId a, NodeId b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Euclidean norm of (a - b), skipping the components of masked joints.
double masked_distance(std::span<const double> a, std::span<const double> b, const std::vector<bool>& mask);

/// Context-augmented distance of a sample to a node given the global context.
double node_distance(const SampleVector& x, const GwrNode& node, std::span<const Vec> global_context,
                     const GwrConfig& config);

/// Context the network would hold after visiting a node with this weight and context.
std::vector<Vec> context_descriptor(std::span<const double> weight, std::span<const Vec> context, double beta,
                                    ContextRule rule);

double activity(double best_distance);

double habituation_delta(double h, double tau, double kappa);

/// h + delta, clamped to [0,1].
double habituate(double h, double tau, double kappa);

/// New node halfway between the input and the BMU, in weight and context.
GwrNode midpoint_node(NodeId id, const SampleVector& x, const GwrNode& bmu, std::span<const Vec> global_context);

/// w += eps*h*(x - w) on unmasked components; c_k += eps*h*(C_k - c_k).
void adapt_node(GwrNode& node, const SampleVector& x, std::span<const Vec> global_context, double eps);

class GwrNetwork {
 public:
  /// Two nodes at x0 and x1, zero contexts, h = 1, no edges.
  GwrNetwork(const SampleVector& x0, const SampleVector& x1, GwrConfig config, std::uint64_t seed = 0);

  /// Rebuilds a network from stored parts. Invariants are checked by the caller (snapshot loader).
  static GwrNetwork from_parts(GwrConfig config, std::uint64_t seed, std::size_t dimension,
                               std::map<NodeId, GwrNode> nodes, std::map<EdgeKey, int> edges,
                               std::vector<Vec> global_context, std::optional<PreviousBmu> previous,
                               NodeId next_id);

  const GwrConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return nodes_.size(); }
  NodeId next_id() const { return next_id_; }

  const std::map<NodeId, GwrNode>& nodes() const { return nodes_; }
  bool contains(NodeId id) const { return nodes_.count(id) != 0; }
  const GwrNode& node(NodeId id) const;

  const std::map<EdgeKey, int>& edges() const { return edges_; }
  bool has_edge(NodeId a, NodeId b) const { return edges_.count(edge_key(a, b)) != 0; }
  std::optional<int> edge_age(NodeId a, NodeId b) const;
  std::vector<NodeId> neighbors(NodeId id) const;

  const std::vector<Vec>& global_context() const { return global_context_; }
  const std::optional<PreviousBmu>& previous_bmu() const { return previous_; }

  double distance(const SampleVector& x, const GwrNode& node) const;

  /// Exhaustive search; ties go to the lower id. Throws Error with fewer than two nodes.
  BmuPair find_bmus(const SampleVector& x) const;
  BmuPair find_bmus(const SampleVector& x, std::span<const Vec> context) const;

  /// Recomputes the global context from the previous BMU snapshot; no-op when there is none.
  const std::vector<Vec>& update_global_context();

  /// Zero context and forget the previous BMU (start of an epoch or sequence).
  void reset_context();

  /// Adds or refreshes an edge with age 0.
  void connect(NodeId a, NodeId b);

  /// Inserts r between b and s. Returns nullopt when the node cap is reached.
  std::optional<NodeId> insert_node(const SampleVector& x, NodeId b, NodeId s);

  void update_node(NodeId id, const SampleVector& x, double eps);
  void habituate_node(NodeId id, double tau);

  /// Ages the edges incident to b, drops edges older than max_edge_age, then removes isolated nodes.
  void age_and_prune(NodeId b);

  /// One full training step for sample x.
  StepRecord step(const SampleVector& x);

  friend bool operator==(const GwrNetwork&, const GwrNetwork&) = default;

 private:
  GwrNetwork() = default;
  void check_sample(const SampleVector& x) const;
  GwrNode& mutable_node(NodeId id);
  void age_edges(NodeId b);
  void prune();

  GwrConfig config_;
  std::uint64_t seed_ = 0;
  std::size_t dimension_ = 0;
  std::map<NodeId, GwrNode> nodes_;
  std::map<EdgeKey, int> edges_;
  std::vector<Vec> global_context_;
  std::optional<PreviousBmu> previous_;
  NodeId next_id_ = 0;
};

struct TrainOptions {
  bool record_steps = false;
  /// Called after every step with the updated network.
  std::function<void(const GwrNetwork&, const StepRecord&)> observer;
};

struct TrainLog {
  std::vector<std::vector<NodeId>> epoch_bmus;
  std::vector<StepRecord> steps;

  const std::vector<NodeId>& final_epoch() const { return epoch_bmus.back(); }
};

/// Network initialized from the first two samples.
GwrNetwork init_network(std::span<const SampleVector> samples, GwrConfig config, std::uint64_t seed = 0);

/// Runs `epochs` passes over the samples. The global context is reset at the start of each epoch.
TrainLog train(GwrNetwork& net, std::span<const SampleVector> samples, int epochs, const TrainOptions& options = {});

/// BMU of every sample of a frozen network, with the context following the chosen BMUs.
/// Nothing is learned; the network is not modified.
std::vector<NodeId> track_bmus(const GwrNetwork& net, std::span<const SampleVector> samples);

/// Merge-based successor: argmin_v sum_k alpha_k * |M_k(u) - c_v,k| over all nodes including u.
NodeId gamma_successor(const GwrNetwork& net, NodeId current);

/// Chains gamma_successor; returns `steps` node ids (the start node is not included).
std::vector<NodeId> gamma_predict(const GwrNetwork& net, NodeId start, std::size_t steps);

}  // namespace sgwr
