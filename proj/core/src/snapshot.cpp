#include "sgwr/snapshot.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sgwr/error.hpp"

namespace sgwr {

using nlohmann::json;

namespace {

bool is_flat(const json& a) {
  for (const auto& e : a) {
    if (e.is_structured()) return false;
  }
  return true;
}

// Objects get one key per line; arrays of scalars stay on one line.
void pretty(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth), ' ');
  const std::string inner(static_cast<std::size_t>(depth + 1), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += inner + json(it.key()).dump() + ": ";
      pretty(it.value(), out, depth + 1);
    }
    out += "\n" + pad + "}";
  } else if (j.is_array() && !is_flat(j)) {
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out += ",\n";
      out += inner;
      pretty(j[i], out, depth + 1);
    }
    out += "\n" + pad + "]";
  } else {
    out += j.dump();
  }
}

json context_to_json(const std::vector<Vec>& ctx) {
  json a = json::array();
  for (const auto& v : ctx) a.push_back(v);
  return a;
}

json config_to_json(const GwrConfig& c) {
  return json{{"alpha0", c.alpha0},
              {"alpha_k", c.alpha_k},
              {"beta", c.beta},
              {"context_depth", c.context_depth},
              {"eps_b", c.eps_b},
              {"eps_n", c.eps_n},
              {"kappa", c.kappa},
              {"tau_b", c.tau_b},
              {"tau_n", c.tau_n},
              {"activity_threshold", c.activity_threshold},
              {"habituation_threshold", c.habituation_threshold},
              {"max_edge_age", c.max_edge_age},
              {"max_nodes", c.max_nodes},
              {"epochs", c.epochs},
              {"context_rule", c.context_rule == ContextRule::PreviousWeight ? "previous_weight" : "previous_context"}};
}

GwrConfig config_from_json(const json& j) {
  GwrConfig c;
  c.alpha0 = j.at("alpha0").get<double>();
  c.alpha_k = j.at("alpha_k").get<std::vector<double>>();
  c.beta = j.at("beta").get<double>();
  c.context_depth = j.at("context_depth").get<std::size_t>();
  c.eps_b = j.at("eps_b").get<double>();
  c.eps_n = j.at("eps_n").get<double>();
  c.kappa = j.at("kappa").get<double>();
  c.tau_b = j.at("tau_b").get<double>();
  c.tau_n = j.at("tau_n").get<double>();
  c.activity_threshold = j.at("activity_threshold").get<double>();
  c.habituation_threshold = j.at("habituation_threshold").get<double>();
  c.max_edge_age = j.at("max_edge_age").get<int>();
  c.max_nodes = j.at("max_nodes").get<std::size_t>();
  c.epochs = j.at("epochs").get<int>();
  const std::string rule = j.at("context_rule").get<std::string>();
  if (rule == "previous_weight") c.context_rule = ContextRule::PreviousWeight;
  else if (rule == "previous_context") c.context_rule = ContextRule::PreviousContext;
  else throw FormatError("snapshot: unknown context rule '" + rule + "'");
  return c;
}

std::vector<Vec> context_from_json(const json& j) { return j.get<std::vector<Vec>>(); }

[[noreturn]] void violated(const std::string& what) { throw InvariantError("snapshot invariant violated: " + what); }

}  // namespace

std::string save_snapshot(const Model& model) {
  const GwrNetwork& net = model.network;
  json doc;
  doc["format_version"] = kSnapshotFormatVersion;
  doc["variant"] = model_variant_name(model.variant);
  doc["config"] = config_to_json(net.config());

  json nodes = json::array();
  for (const auto& [id, n] : net.nodes()) {
    nodes.push_back({{"id", id}, {"weight", n.weight}, {"context", context_to_json(n.context)},
                     {"habituation", n.habituation}});
  }
  json edges = json::array();
  for (const auto& [key, age] : net.edges()) edges.push_back(json::array({key.first, key.second, age}));
  json prev = nullptr;
  if (const auto& p = net.previous_bmu()) {
    prev = {{"id", p->id}, {"weight", p->weight}, {"context", context_to_json(p->context)}};
  }
  doc["network"] = {{"seed", net.seed()},
                    {"dimension", net.dimension()},
                    {"next_id", net.next_id()},
                    {"nodes", nodes},
                    {"edges", edges},
                    {"global_context", context_to_json(net.global_context())},
                    {"previous_bmu", prev}};

  json transitions = json::array();
  for (const auto& [key, count] : model.transitions.counts()) {
    transitions.push_back(json::array({key.first, key.second, count}));
  }
  doc["transitions"] = transitions;

  json exercises = json::array();
  for (const auto& [id, traj] : model.exercises.trajectories()) {
    json lineages = json::array();
    for (const auto& l : model.exercises.lineages(id)) {
      json contexts = json::array();
      for (const auto& c : l.contexts) contexts.push_back(context_to_json(c));
      lineages.push_back({{"id", l.id}, {"weights", l.weights}, {"contexts", contexts}});
    }
    exercises.push_back({{"exercise_id", id}, {"bmus", traj.bmus}, {"lineages", lineages}});
  }
  doc["exercise_store"] = {{"learning_threshold", model.exercises.learning_threshold()}, {"exercises", exercises}};

  std::string out;
  pretty(doc, out, 0);
  out += "\n";
  return out;
}

Model load_snapshot(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: corrupt document: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("format_version")) throw FormatError("snapshot: missing format_version");
    const auto& ver = doc.at("format_version");
    if (!ver.is_number_integer() || ver.get<int>() != kSnapshotFormatVersion) {
      throw VersionError("snapshot: unsupported format version " + ver.dump());
    }
    const auto variant = parse_model_variant(doc.at("variant").get<std::string>());
    if (!variant) throw FormatError("snapshot: unknown variant");

    GwrConfig config = config_from_json(doc.at("config"));
    try {
      config.validate();
    } catch (const ConfigError& e) {
      violated(e.what());
    }

    const auto& n = doc.at("network");
    std::map<NodeId, GwrNode> nodes;
    for (const auto& nj : n.at("nodes")) {
      GwrNode node;
      node.id = nj.at("id").get<NodeId>();
      node.weight = nj.at("weight").get<Vec>();
      node.context = context_from_json(nj.at("context"));
      node.habituation = nj.at("habituation").get<double>();
      if (!nodes.emplace(node.id, node).second) violated("duplicate node id " + std::to_string(node.id));
    }
    std::map<EdgeKey, int> edges;
    for (const auto& ej : n.at("edges")) {
      const NodeId a = ej.at(0).get<NodeId>();
      const NodeId b = ej.at(1).get<NodeId>();
      const int age = ej.at(2).get<int>();
      if (a == b) violated("self-edge on node " + std::to_string(a));
      if (!edges.emplace(edge_key(a, b), age).second) violated("duplicate edge");
    }
    std::optional<PreviousBmu> prev;
    if (!n.at("previous_bmu").is_null()) {
      const auto& pj = n.at("previous_bmu");
      prev = PreviousBmu{pj.at("id").get<NodeId>(), pj.at("weight").get<Vec>(), context_from_json(pj.at("context"))};
    }
    GwrNetwork net = GwrNetwork::from_parts(std::move(config), n.at("seed").get<std::uint64_t>(),
                                            n.at("dimension").get<std::size_t>(), std::move(nodes), std::move(edges),
                                            context_from_json(n.at("global_context")), std::move(prev),
                                            n.at("next_id").get<NodeId>());

    TransitionMatrix transitions;
    for (const auto& tj : doc.at("transitions")) {
      transitions.record(tj.at(0).get<NodeId>(), tj.at(1).get<NodeId>(), tj.at(2).get<std::uint64_t>());
    }

    const auto& sj = doc.at("exercise_store");
    std::map<int, ExerciseTrajectory> trajectories;
    std::map<int, std::vector<SubnodeLineage>> lineages;
    for (const auto& ej : sj.at("exercises")) {
      ExerciseTrajectory t;
      t.exercise_id = ej.at("exercise_id").get<int>();
      t.bmus = ej.at("bmus").get<std::vector<NodeId>>();
      auto& ls = lineages[t.exercise_id];
      for (const auto& lj : ej.at("lineages")) {
        SubnodeLineage l;
        l.id = lj.at("id").get<int>();
        l.weights = lj.at("weights").get<std::vector<Vec>>();
        for (const auto& cj : lj.at("contexts")) l.contexts.push_back(context_from_json(cj));
        ls.push_back(std::move(l));
      }
      if (!trajectories.emplace(t.exercise_id, t).second) violated("duplicate exercise id");
    }
    Model model{*variant, std::move(net), std::move(transitions),
                ExerciseStore::from_parts(sj.at("learning_threshold").get<double>(), std::move(trajectories),
                                          std::move(lineages))};
    validate_model(model);
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: malformed document: ") + e.what());
  }
}

void validate_model(const Model& model) {
  const GwrNetwork& net = model.network;
  const GwrConfig& cfg = net.config();
  const std::size_t dim = net.dimension();
  if (dim == 0) violated("dimension must be positive");
  if (net.size() > cfg.max_nodes) violated("node count exceeds max_nodes");
  auto check_context = [&](const std::vector<Vec>& ctx, const std::string& where) {
    if (ctx.size() != cfg.context_depth) violated(where + " must hold K context vectors");
    for (const auto& c : ctx) {
      if (c.size() != dim) violated(where + " context dimension mismatch");
    }
  };
  for (const auto& [id, n] : net.nodes()) {
    const std::string where = "node " + std::to_string(id);
    if (n.id != id) violated(where + " id mismatch");
    if (id < 0 || id >= net.next_id()) violated(where + " id outside the allocated range");
    if (n.weight.size() != dim) violated(where + " weight dimension mismatch");
    check_context(n.context, where);
    if (!(n.habituation >= 0.0 && n.habituation <= 1.0)) violated(where + " habituation outside [0,1]");
  }
  std::set<NodeId> connected;
  for (const auto& [key, age] : net.edges()) {
    if (key.first == key.second) violated("self-edge");
    if (!net.contains(key.first) || !net.contains(key.second)) {
      violated("edge (" + std::to_string(key.first) + "," + std::to_string(key.second) +
               ") references a missing node");
    }
    if (age < 0) violated("negative edge age");
    connected.insert(key.first);
    connected.insert(key.second);
  }
  if (!net.edges().empty() && connected.size() != net.size()) violated("isolated node present");
  check_context(net.global_context(), "global context");
  if (const auto& p = net.previous_bmu()) {
    if (p->weight.size() != dim) violated("previous BMU weight dimension mismatch");
    check_context(p->context, "previous BMU");
  }

  const ExerciseStore& store = model.exercises;
  for (const auto& [id, traj] : store.trajectories()) {
    const std::string where = "exercise " + std::to_string(id);
    if (traj.exercise_id != id) violated(where + " id mismatch");
    if (traj.bmus.empty()) violated(where + " has an empty trajectory");
    for (NodeId b : traj.bmus) {
      if (!net.contains(b)) violated(where + " references missing node " + std::to_string(b));
    }
    const auto& ls = store.lineages(id);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const auto& l = ls[i];
      const std::string lw = where + " lineage " + std::to_string(l.id);
      if (l.id != static_cast<int>(i) + 1) violated(lw + " ids must run 1..n");
      if (l.weights.size() != traj.size() || l.contexts.size() != traj.size()) {
        violated(lw + " length differs from the trajectory");
      }
      for (std::size_t j = 0; j < traj.size(); ++j) {
        if (l.weights[j].size() != dim) violated(lw + " weight dimension mismatch");
        if (l.contexts[j] != net.node(traj.bmus[j]).context) violated(lw + " context differs from its parent");
      }
    }
  }
  for (const auto& [id, ls] : store.all_lineages()) {
    if (!ls.empty() && !store.has_exercise(id)) violated("lineages without a trajectory");
  }
}

void save_snapshot_file(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << save_snapshot(model);
}

Model load_snapshot_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_snapshot(buf.str());
}

}  // namespace sgwr
