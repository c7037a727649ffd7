#include "sgwr/gwr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgwr/error.hpp"

namespace sgwr {

GwrConfig GwrConfig::with_depth(std::size_t depth, double alpha_total) {
  GwrConfig c;
  c.context_depth = depth;
  c.alpha0 = alpha_total;
  c.alpha_k.assign(depth, depth == 0 ? 0.0 : alpha_total / static_cast<double>(depth));
  return c;
}

void GwrConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (context_depth < 1) fail("context depth K must be >= 1");
  if (alpha_k.size() != context_depth) fail("alpha_k must hold K entries");
  if (alpha0 < 0.0) fail("alpha0 must be non-negative");
  for (double a : alpha_k) {
    if (a < 0.0) fail("alpha_k must be non-negative");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must lie in [0,1]");
  if (!(eps_b > 0.0) || !(eps_n > 0.0)) fail("learning rates must be positive");
  if (!(kappa > 0.0) || !(tau_b > 0.0) || !(tau_n > 0.0)) fail("habituation constants must be positive");
  if (!(tau_b > tau_n)) fail("tau_b must exceed tau_n");
  if (!(activity_threshold > 0.0 && activity_threshold <= 1.0)) fail("activity threshold must lie in (0,1]");
  if (!(habituation_threshold > 0.0 && habituation_threshold <= 1.0)) fail("habituation threshold must lie in (0,1]");
  if (max_edge_age < 0) fail("max edge age must be non-negative");
  if (max_nodes < 2) fail("max node count must be >= 2");
  if (epochs < 1) fail("epochs must be >= 1");
}

double masked_distance(std::span<const double> a, std::span<const double> b, const std::vector<bool>& mask) {
  double sum = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask.empty() && mask[i / 2]) continue;
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double node_distance(const SampleVector& x, const GwrNode& node, std::span<const Vec> global_context,
                     const GwrConfig& config) {
  double d = config.alpha0 * masked_distance(x.values, node.weight, x.mask);
  const std::size_t k_max = std::min({global_context.size(), node.context.size(), config.alpha_k.size()});
  for (std::size_t k = 0; k < k_max; ++k) {
    d += config.alpha_k[k] * masked_distance(global_context[k], node.context[k], x.mask);
  }
  return d;
}

std::vector<Vec> context_descriptor(std::span<const double> weight, std::span<const Vec> context, double beta,
                                    ContextRule rule) {
  const std::size_t depth = context.size();
  std::vector<Vec> out(depth, Vec(weight.size(), 0.0));
  for (std::size_t k = 0; k < depth; ++k) {
    // c_0 is the weight itself.
    std::span<const double> lower = k == 0 ? weight : std::span<const double>(context[k - 1]);
    std::span<const double> upper = rule == ContextRule::PreviousWeight ? weight : std::span<const double>(context[k]);
    for (std::size_t i = 0; i < weight.size(); ++i) {
      out[k][i] = beta * upper[i] + (1.0 - beta) * lower[i];
    }
  }
  return out;
}

double activity(double best_distance) { return std::exp(-best_distance); }

double habituation_delta(double h, double tau, double kappa) { return tau * kappa * (1.0 - h) - tau; }

double habituate(double h, double tau, double kappa) {
  return std::clamp(h + habituation_delta(h, tau, kappa), 0.0, 1.0);
}

GwrNode midpoint_node(NodeId id, const SampleVector& x, const GwrNode& bmu, std::span<const Vec> global_context) {
  GwrNode r;
  r.id = id;
  r.habituation = 1.0;
  r.weight.resize(bmu.weight.size());
  for (std::size_t i = 0; i < bmu.weight.size(); ++i) {
    // Masked input components carry no information; keep the BMU's value there.
    r.weight[i] = x.component_masked(i) ? bmu.weight[i] : 0.5 * (x.values[i] + bmu.weight[i]);
  }
  r.context.resize(bmu.context.size());
  for (std::size_t k = 0; k < bmu.context.size(); ++k) {
    r.context[k].resize(bmu.context[k].size());
    for (std::size_t i = 0; i < bmu.context[k].size(); ++i) {
      r.context[k][i] = 0.5 * (global_context[k][i] + bmu.context[k][i]);
    }
  }
  return r;
}

void adapt_node(GwrNode& node, const SampleVector& x, std::span<const Vec> global_context, double eps) {
  const double rate = eps * node.habituation;
  for (std::size_t i = 0; i < node.weight.size(); ++i) {
    if (x.component_masked(i)) continue;
    node.weight[i] += rate * (x.values[i] - node.weight[i]);
  }
  for (std::size_t k = 0; k < node.context.size(); ++k) {
    for (std::size_t i = 0; i < node.context[k].size(); ++i) {
      node.context[k][i] += rate * (global_context[k][i] - node.context[k][i]);
    }
  }
}

GwrNetwork::GwrNetwork(const SampleVector& x0, const SampleVector& x1, GwrConfig config, std::uint64_t seed)
    : config_(std::move(config)), seed_(seed), dimension_(x0.size()) {
  config_.validate();
  if (x0.size() != x1.size()) {
    throw DimensionError("init_network: samples have different dimensions (" + std::to_string(x0.size()) +
                         " vs " + std::to_string(x1.size()) + ")");
  }
  if (x0.size() == 0) throw DimensionError("init_network: empty sample");
  global_context_.assign(config_.context_depth, Vec(dimension_, 0.0));
  for (const SampleVector* x : {&x0, &x1}) {
    GwrNode n;
    n.id = next_id_++;
    n.weight = x->values;
    n.context.assign(config_.context_depth, Vec(dimension_, 0.0));
    n.habituation = 1.0;
    nodes_.emplace(n.id, std::move(n));
  }
}

GwrNetwork GwrNetwork::from_parts(GwrConfig config, std::uint64_t seed, std::size_t dimension,
                                  std::map<NodeId, GwrNode> nodes, std::map<EdgeKey, int> edges,
                                  std::vector<Vec> global_context, std::optional<PreviousBmu> previous,
                                  NodeId next_id) {
  GwrNetwork net;
  net.config_ = std::move(config);
  net.seed_ = seed;
  net.dimension_ = dimension;
  net.nodes_ = std::move(nodes);
  net.edges_ = std::move(edges);
  net.global_context_ = std::move(global_context);
  net.previous_ = std::move(previous);
  net.next_id_ = next_id;
  return net;
}

const GwrNode& GwrNetwork::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error("unknown node id " + std::to_string(id));
  return it->second;
}

GwrNode& GwrNetwork::mutable_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error("unknown node id " + std::to_string(id));
  return it->second;
}

std::optional<int> GwrNetwork::edge_age(NodeId a, NodeId b) const {
  auto it = edges_.find(edge_key(a, b));
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> GwrNetwork::neighbors(NodeId id) const {
  std::vector<NodeId> out;
  for (const auto& [key, age] : edges_) {
    if (key.first == id) out.push_back(key.second);
    else if (key.second == id) out.push_back(key.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void GwrNetwork::check_sample(const SampleVector& x) const {
  if (x.size() != dimension_) {
    throw DimensionError("sample has " + std::to_string(x.size()) + " components, network expects " +
                         std::to_string(dimension_));
  }
}

double GwrNetwork::distance(const SampleVector& x, const GwrNode& n) const {
  return node_distance(x, n, global_context_, config_);
}

BmuPair GwrNetwork::find_bmus(const SampleVector& x) const { return find_bmus(x, global_context_); }

BmuPair GwrNetwork::find_bmus(const SampleVector& x, std::span<const Vec> context) const {
  check_sample(x);
  if (nodes_.size() < 2) throw Error("find_bmus: network needs at least two nodes");
  constexpr double inf = std::numeric_limits<double>::infinity();
  BmuPair p{0, 0, inf, inf};
  bool have_best = false;
  bool have_second = false;
  // Map iteration is in ascending id order, so strict comparisons keep the lower id on ties.
  for (const auto& [id, n] : nodes_) {
    const double d = node_distance(x, n, context, config_);
    if (!have_best || d < p.best_distance) {
      if (have_best) {
        p.second = p.best;
        p.second_distance = p.best_distance;
        have_second = true;
      }
      p.best = id;
      p.best_distance = d;
      have_best = true;
    } else if (!have_second || d < p.second_distance) {
      p.second = id;
      p.second_distance = d;
      have_second = true;
    }
  }
  return p;
}

const std::vector<Vec>& GwrNetwork::update_global_context() {
  if (previous_) {
    global_context_ = context_descriptor(previous_->weight, previous_->context, config_.beta, config_.context_rule);
  }
  return global_context_;
}

void GwrNetwork::reset_context() {
  global_context_.assign(config_.context_depth, Vec(dimension_, 0.0));
  previous_.reset();
}

void GwrNetwork::connect(NodeId a, NodeId b) {
  if (a == b) throw Error("connect: self-edges are not allowed");
  if (!contains(a) || !contains(b)) throw Error("connect: unknown node");
  edges_[edge_key(a, b)] = 0;
}

std::optional<NodeId> GwrNetwork::insert_node(const SampleVector& x, NodeId b, NodeId s) {
  check_sample(x);
  if (nodes_.size() >= config_.max_nodes) return std::nullopt;
  const NodeId r = next_id_++;
  nodes_.emplace(r, midpoint_node(r, x, node(b), global_context_));
  connect(r, b);
  if (s != b && contains(s)) connect(r, s);
  edges_.erase(edge_key(b, s));
  return r;
}

void GwrNetwork::update_node(NodeId id, const SampleVector& x, double eps) {
  check_sample(x);
  adapt_node(mutable_node(id), x, global_context_, eps);
}

void GwrNetwork::habituate_node(NodeId id, double tau) {
  GwrNode& n = mutable_node(id);
  n.habituation = habituate(n.habituation, tau, config_.kappa);
}

void GwrNetwork::age_edges(NodeId b) {
  for (auto& [key, age] : edges_) {
    if (key.first == b || key.second == b) ++age;
  }
}

void GwrNetwork::prune() {
  std::erase_if(edges_, [&](const auto& e) { return e.second > config_.max_edge_age; });
  std::map<NodeId, int> degree;
  for (const auto& [key, age] : edges_) {
    ++degree[key.first];
    ++degree[key.second];
  }
  std::erase_if(nodes_, [&](const auto& n) { return degree.count(n.first) == 0; });
}

void GwrNetwork::age_and_prune(NodeId b) {
  age_edges(b);
  prune();
}

StepRecord GwrNetwork::step(const SampleVector& x) {
  check_sample(x);
  update_global_context();

  StepRecord rec;
  rec.node_count = nodes_.size();

  if (nodes_.size() < 2) {
    // Single surviving node: no pair to grow between, so only learn.
    const NodeId b = nodes_.begin()->first;
    const GwrNode& bn = node(b);
    rec.bmu = rec.second = b;
    rec.activity = activity(distance(x, bn));
    rec.bmu_habituation = bn.habituation;
    previous_ = PreviousBmu{b, bn.weight, bn.context};
    update_node(b, x, config_.eps_b);
    habituate_node(b, config_.tau_b);
    return rec;
  }

  const BmuPair p = find_bmus(x);
  const GwrNode& bn = node(p.best);
  PreviousBmu snapshot{p.best, bn.weight, bn.context};

  rec.bmu = p.best;
  rec.second = p.second;
  rec.activity = activity(p.best_distance);
  rec.bmu_habituation = bn.habituation;

  connect(p.best, p.second);

  const bool grow = rec.activity < config_.activity_threshold &&
                    rec.bmu_habituation < config_.habituation_threshold && nodes_.size() < config_.max_nodes;
  if (grow) {
    rec.new_node = insert_node(x, p.best, p.second);
    rec.inserted = rec.new_node.has_value();
  } else {
    update_node(p.best, x, config_.eps_b);
    for (NodeId n : neighbors(p.best)) update_node(n, x, config_.eps_n);
  }

  age_edges(p.best);
  habituate_node(p.best, config_.tau_b);
  for (NodeId n : neighbors(p.best)) habituate_node(n, config_.tau_n);
  prune();

  previous_ = std::move(snapshot);
  return rec;
}

GwrNetwork init_network(std::span<const SampleVector> samples, GwrConfig config, std::uint64_t seed) {
  if (samples.size() < 2) throw Error("init_network: need at least two samples");
  return GwrNetwork(samples[0], samples[1], std::move(config), seed);
}

TrainLog train(GwrNetwork& net, std::span<const SampleVector> samples, int epochs, const TrainOptions& options) {
  if (samples.empty()) throw Error("train: empty sequence");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  TrainLog log;
  log.epoch_bmus.reserve(static_cast<std::size_t>(epochs));
  for (int e = 0; e < epochs; ++e) {
    net.reset_context();
    std::vector<NodeId> bmus;
    bmus.reserve(samples.size());
    for (const auto& x : samples) {
      StepRecord rec = net.step(x);
      bmus.push_back(rec.bmu);
      if (options.observer) options.observer(net, rec);
      if (options.record_steps) log.steps.push_back(std::move(rec));
    }
    log.epoch_bmus.push_back(std::move(bmus));
  }
  return log;
}

std::vector<NodeId> track_bmus(const GwrNetwork& net, std::span<const SampleVector> samples) {
  const GwrConfig& cfg = net.config();
  std::vector<Vec> context(cfg.context_depth, Vec(net.dimension(), 0.0));
  std::vector<NodeId> out;
  out.reserve(samples.size());
  for (const auto& x : samples) {
    const NodeId b = net.find_bmus(x, context).best;
    out.push_back(b);
    const GwrNode& n = net.node(b);
    context = context_descriptor(n.weight, n.context, cfg.beta, cfg.context_rule);
  }
  return out;
}

NodeId gamma_successor(const GwrNetwork& net, NodeId current) {
  const GwrConfig& cfg = net.config();
  const GwrNode& u = net.node(current);
  const std::vector<Vec> merge = context_descriptor(u.weight, u.context, cfg.beta, cfg.context_rule);
  static const std::vector<bool> no_mask;
  NodeId best = current;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, v] : net.nodes()) {
    double d = 0.0;
    for (std::size_t k = 0; k < merge.size(); ++k) {
      d += cfg.alpha_k[k] * masked_distance(merge[k], v.context[k], no_mask);
    }
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

std::vector<NodeId> gamma_predict(const GwrNetwork& net, NodeId start, std::size_t steps) {
  if (!net.contains(start)) throw Error("gamma_predict: unknown start node " + std::to_string(start));
  std::vector<NodeId> out;
  out.reserve(steps);
  NodeId u = start;
  for (std::size_t i = 0; i < steps; ++i) {
    u = gamma_successor(net, u);
    out.push_back(u);
  }
  return out;
}

}  // namespace sgwr
