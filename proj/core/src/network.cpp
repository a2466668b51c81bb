#include "uaml/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "uaml/error.hpp"
#include "uaml/random.hpp"

namespace uaml {

namespace {

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// Finds the path between two nodes in an undirected forest.
std::vector<std::size_t> forest_path(
    const std::vector<std::vector<std::size_t>>& adjacency, std::size_t from,
    std::size_t to) {
  std::vector<std::size_t> prev(adjacency.size(), adjacency.size());
  std::deque<std::size_t> queue{from};
  prev[from] = from;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    if (v == to) break;
    for (std::size_t w : adjacency[v]) {
      if (prev[w] == adjacency.size()) {
        prev[w] = v;
        queue.push_back(w);
      }
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t v = to; v != from; v = prev[v]) path.push_back(v);
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

// --- Structure ------------------------------------------------------------

Structure::Structure(std::vector<NodeSpec> nodes) : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name.empty()) {
      throw Error(ErrorCode::kMalformedNetwork, "node with empty name");
    }
    if (!index_.emplace(nodes_[i].name, i).second) {
      throw Error(ErrorCode::kMalformedNetwork,
                  "duplicate node name '" + nodes_[i].name + "'");
    }
  }
  parents_.resize(nodes_.size());
  children_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& parents = nodes_[i].parents;
    std::sort(parents.begin(), parents.end());
    if (std::adjacent_find(parents.begin(), parents.end()) != parents.end()) {
      throw Error(ErrorCode::kMalformedNetwork,
                  "node '" + nodes_[i].name + "' lists a parent twice");
    }
    for (const auto& p : parents) {
      auto it = index_.find(p);
      if (it == index_.end()) {
        throw Error(ErrorCode::kMalformedNetwork,
                    "node '" + nodes_[i].name + "' has unknown parent '" + p + "'");
      }
      parents_[i].push_back(it->second);
      children_[it->second].push_back(i);
    }
  }
}

std::optional<std::size_t> Structure::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Structure::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) {
    throw Error(ErrorCode::kInvalidEvidence,
                "unknown node '" + std::string(name) + "'");
  }
  return *idx;
}

std::optional<int> Structure::find_state(std::size_t node,
                                         std::string_view state) const {
  const auto& states = nodes_[node].states;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (states[s] == state) return static_cast<int>(s);
  }
  return std::nullopt;
}

std::size_t Structure::row_count(std::size_t i) const {
  std::size_t rows = 1;
  for (std::size_t p : parents_[i]) rows *= nodes_[p].states.size();
  return rows;
}

std::size_t Structure::row_of(std::size_t i,
                              std::span<const int> assignment) const {
  std::size_t row = 0;
  for (std::size_t p : parents_[i]) {
    row = row * nodes_[p].states.size() + static_cast<std::size_t>(assignment[p]);
  }
  return row;
}

std::vector<int> Structure::row_parent_states(std::size_t i,
                                              std::size_t row) const {
  const auto& parents = parents_[i];
  std::vector<int> states(parents.size());
  for (std::size_t k = parents.size(); k-- > 0;) {
    const std::size_t radix = nodes_[parents[k]].states.size();
    states[k] = static_cast<int>(row % radix);
    row /= radix;
  }
  return states;
}

std::string Structure::row_key(std::size_t i, std::size_t row) const {
  const auto states = row_parent_states(i, row);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < states.size(); ++k) {
    names.push_back(nodes_[parents_[i][k]].states[states[k]]);
  }
  return join(names, ",");
}

std::optional<std::size_t> Structure::row_from_key(std::size_t i,
                                                   std::string_view key) const {
  const auto& parents = parents_[i];
  if (parents.empty()) {
    if (key.empty()) return 0;
    return std::nullopt;
  }
  const auto parts = split(key, ',');
  if (parts.size() != parents.size()) return std::nullopt;
  std::size_t row = 0;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    auto s = find_state(parents[k], parts[k]);
    if (!s) return std::nullopt;
    row = row * nodes_[parents[k]].states.size() + static_cast<std::size_t>(*s);
  }
  return row;
}

std::optional<std::vector<std::size_t>> Structure::topological_order() const {
  std::vector<std::size_t> indegree(size());
  for (std::size_t i = 0; i < size(); ++i) indegree[i] = parents_[i].size();
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (std::size_t c : children_[v]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != size()) return std::nullopt;
  return order;
}

// --- conversions ----------------------------------------------------------

PointNetwork mean_network(const NetworkSpec& net) {
  PointNetwork pn{net.structure, {}};
  pn.cpts.resize(net.cpts.size());
  for (std::size_t i = 0; i < net.cpts.size(); ++i) {
    for (const auto& op : net.cpts[i]) {
      pn.cpts[i].push_back(project(op).probabilities);
    }
  }
  return pn;
}

NetworkSpec dogmatic_network(const PointNetwork& pn) {
  NetworkSpec net{pn.structure, {}};
  net.cpts.resize(pn.cpts.size());
  for (std::size_t i = 0; i < pn.cpts.size(); ++i) {
    for (const auto& row : pn.cpts[i]) {
      if (row.size() != 2) {
        throw Error(ErrorCode::kUnsupportedStructure,
                    "dogmatic conversion supports binary nodes only");
      }
      net.cpts[i].push_back(Opinion::binary(row[0], kMaxStrength));
    }
  }
  return net;
}

// --- validation -----------------------------------------------------------

std::string_view issue_kind_name(IssueKind kind) {
  switch (kind) {
    case IssueKind::kCycle: return "cycle";
    case IssueKind::kNotPolytree: return "not-polytree";
    case IssueKind::kNonBinary: return "non-binary";
    case IssueKind::kMalformedTable: return "malformed-table";
  }
  return "unknown";
}

bool ValidationReport::has(IssueKind kind) const {
  return std::any_of(issues.begin(), issues.end(),
                     [kind](const ValidationIssue& i) { return i.kind == kind; });
}

Json ValidationReport::to_json() const {
  Json j;
  j["valid"] = ok();
  j["issues"] = Json::array();
  for (const auto& issue : issues) {
    j["issues"].push_back({{"kind", std::string(issue_kind_name(issue.kind))},
                           {"node", issue.node},
                           {"message", issue.message}});
  }
  return j;
}

ValidationReport validate_network(const Structure& s) {
  ValidationReport report;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.node(i).states.size() != 2) {
      report.issues.push_back(
          {IssueKind::kNonBinary, s.node(i).name,
           "node has " + std::to_string(s.node(i).states.size()) +
               " states; only binary variables are supported"});
    }
    std::set<std::string> unique(s.node(i).states.begin(), s.node(i).states.end());
    if (unique.size() != s.node(i).states.size()) {
      report.issues.push_back(
          {IssueKind::kMalformedTable, s.node(i).name, "duplicate state names"});
    }
  }

  if (!s.topological_order()) {
    std::vector<std::size_t> indegree(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) indegree[i] = s.parents(i).size();
    std::deque<std::size_t> ready;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (indegree[i] == 0) ready.push_back(i);
    }
    while (!ready.empty()) {
      const std::size_t v = ready.front();
      ready.pop_front();
      for (std::size_t c : s.children(v)) {
        if (--indegree[c] == 0) ready.push_back(c);
      }
    }
    std::vector<std::string> stuck;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (indegree[i] > 0) stuck.push_back(s.node(i).name);
    }
    report.issues.push_back({IssueKind::kCycle, stuck.empty() ? "" : stuck.front(),
                             "directed cycle among {" + join(stuck, ", ") + "}"});
  }

  // Union-find over the undirected skeleton; the first edge joining two
  // already-connected nodes closes an undirected cycle.
  std::vector<std::size_t> root(s.size());
  std::iota(root.begin(), root.end(), 0);
  auto find_root = [&root](std::size_t v) {
    while (root[v] != v) v = root[v] = root[root[v]];
    return v;
  };
  std::vector<std::vector<std::size_t>> forest(s.size());
  for (std::size_t child = 0; child < s.size(); ++child) {
    for (std::size_t parent : s.parents(child)) {
      const std::size_t a = find_root(parent);
      const std::size_t b = find_root(child);
      if (a == b) {
        auto path = forest_path(forest, child, parent);
        std::vector<std::string> names;
        for (std::size_t v : path) names.push_back(s.node(v).name);
        names.push_back(s.node(child).name);
        report.issues.push_back({IssueKind::kNotPolytree, s.node(child).name,
                                 "undirected cycle " + join(names, "-")});
        continue;
      }
      root[a] = b;
      forest[parent].push_back(child);
      forest[child].push_back(parent);
    }
  }
  return report;
}

ValidationReport validate_network(const NetworkSpec& net) {
  ValidationReport report = validate_network(net.structure);
  const Structure& s = net.structure;
  if (net.cpts.size() != s.size()) {
    report.issues.push_back({IssueKind::kMalformedTable, "",
                             "expected " + std::to_string(s.size()) +
                                 " tables, got " + std::to_string(net.cpts.size())});
    return report;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (net.cpts[i].size() != s.row_count(i)) {
      report.issues.push_back({IssueKind::kMalformedTable, s.node(i).name,
                               "expected " + std::to_string(s.row_count(i)) +
                                   " rows, got " + std::to_string(net.cpts[i].size())});
      continue;
    }
    for (const auto& op : net.cpts[i]) {
      if (op.size() != s.node(i).states.size()) {
        report.issues.push_back({IssueKind::kMalformedTable, s.node(i).name,
                                 "row opinion has wrong domain size"});
        break;
      }
    }
  }
  return report;
}

ValidationReport validate_network(const PointNetwork& pn) {
  ValidationReport report = validate_network(pn.structure);
  const Structure& s = pn.structure;
  if (pn.cpts.size() != s.size()) {
    report.issues.push_back({IssueKind::kMalformedTable, "",
                             "expected " + std::to_string(s.size()) +
                                 " tables, got " + std::to_string(pn.cpts.size())});
    return report;
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (pn.cpts[i].size() != s.row_count(i)) {
      report.issues.push_back({IssueKind::kMalformedTable, s.node(i).name,
                               "expected " + std::to_string(s.row_count(i)) +
                                   " rows, got " + std::to_string(pn.cpts[i].size())});
      continue;
    }
    for (std::size_t r = 0; r < pn.cpts[i].size(); ++r) {
      const auto& row = pn.cpts[i][r];
      const bool in_range = std::all_of(row.begin(), row.end(), [](double p) {
        return p >= 0.0 && p <= 1.0;
      });
      const double total = std::accumulate(row.begin(), row.end(), 0.0);
      if (row.size() != s.node(i).states.size() || !in_range ||
          std::fabs(total - 1.0) > 1e-9) {
        report.issues.push_back({IssueKind::kMalformedTable, s.node(i).name,
                                 "row '" + s.row_key(i, r) +
                                     "' is not a probability vector over the "
                                     "node's states"});
      }
    }
  }
  return report;
}

void require_valid(const ValidationReport& report) {
  if (report.ok()) return;
  const auto& first = report.issues.front();
  const ErrorCode code = first.kind == IssueKind::kMalformedTable
                             ? ErrorCode::kMalformedNetwork
                             : ErrorCode::kUnsupportedStructure;
  std::string msg(issue_kind_name(first.kind));
  if (!first.node.empty()) msg += " at node '" + first.node + "'";
  msg += ": " + first.message;
  throw Error(code, msg);
}

// --- learning and sampling ------------------------------------------------

NetworkSpec learn_conditionals(const Structure& s,
                               std::span<const InstantiationRecord> records) {
  std::vector<std::vector<std::vector<double>>> counts(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    counts[i].assign(s.row_count(i),
                     std::vector<double>(s.node(i).states.size(), 0.0));
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& states = records[r].states;
    if (states.size() != s.size()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "record " + std::to_string(r) + " assigns " +
                      std::to_string(states.size()) + " of " +
                      std::to_string(s.size()) + " variables");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (states[i] < 0 ||
          static_cast<std::size_t>(states[i]) >= s.node(i).states.size()) {
        throw Error(ErrorCode::kMalformedRecord,
                    "record " + std::to_string(r) + " has invalid state for '" +
                        s.node(i).name + "'");
      }
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      counts[i][s.row_of(i, states)][static_cast<std::size_t>(states[i])] += 1.0;
    }
  }
  NetworkSpec net{s, {}};
  net.cpts.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (auto& row : counts[i]) {
      net.cpts[i].push_back(opinion_from_counts({std::move(row)}));
    }
  }
  return net;
}

std::vector<InstantiationRecord> sample_instantiations(const PointNetwork& pn,
                                                       std::size_t n,
                                                       std::uint64_t seed) {
  const auto order = pn.structure.topological_order();
  if (!order) {
    throw Error(ErrorCode::kUnsupportedStructure,
                "cannot sample a network with a directed cycle");
  }
  std::vector<InstantiationRecord> records(n);
  for (std::size_t r = 0; r < n; ++r) {
    Rng rng = Rng::substream(seed, r);
    auto& states = records[r].states;
    states.assign(pn.structure.size(), 0);
    for (std::size_t i : *order) {
      const auto& probs = pn.cpts[i][pn.structure.row_of(i, states)];
      const double u = rng.uniform();
      double acc = 0.0;
      int chosen = static_cast<int>(probs.size()) - 1;
      for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) {
          chosen = static_cast<int>(k);
          break;
        }
      }
      states[i] = chosen;
    }
  }
  return records;
}

// --- JSON -----------------------------------------------------------------

namespace {

Json node_header(const NodeSpec& node) {
  Json j;
  j["name"] = node.name;
  j["states"] = node.states;
  j["parents"] = node.parents;
  return j;
}

// Returns the cpt object of node i, checked for unknown/missing row keys.
std::vector<const Json*> cpt_rows(const Structure& s, const Json& node_json,
                                  std::size_t i) {
  if (!node_json.contains("cpt") || !node_json["cpt"].is_object()) {
    throw Error(ErrorCode::kMalformedNetwork,
                "node '" + s.node(i).name + "' needs a 'cpt' object");
  }
  std::vector<const Json*> rows(s.row_count(i), nullptr);
  for (const auto& [key, value] : node_json["cpt"].items()) {
    auto row = s.row_from_key(i, key);
    if (!row) {
      throw Error(ErrorCode::kMalformedNetwork,
                  "node '" + s.node(i).name + "': unknown cpt row '" + key + "'");
    }
    rows[*row] = &value;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] == nullptr) {
      throw Error(ErrorCode::kMalformedNetwork,
                  "node '" + s.node(i).name + "': missing cpt row '" +
                      s.row_key(i, r) + "'");
    }
  }
  return rows;
}

}  // namespace

Structure structure_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array()) {
    throw Error(ErrorCode::kMalformedNetwork, "network needs a 'nodes' array");
  }
  std::vector<NodeSpec> nodes;
  for (const auto& n : j["nodes"]) {
    try {
      NodeSpec spec;
      spec.name = n.at("name").get<std::string>();
      spec.states = n.at("states").get<std::vector<std::string>>();
      if (n.contains("parents")) {
        spec.parents = n.at("parents").get<std::vector<std::string>>();
      }
      nodes.push_back(std::move(spec));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedNetwork,
                  std::string("malformed node entry: ") + e.what());
    }
  }
  return Structure(std::move(nodes));
}

Json network_to_json(const NetworkSpec& net, Precision precision) {
  Json nodes = Json::array();
  const Structure& s = net.structure;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Json n = node_header(s.node(i));
    Json cpt = Json::object();
    for (std::size_t r = 0; r < net.cpts[i].size(); ++r) {
      cpt[s.row_key(i, r)] = to_json(net.cpts[i][r], precision);
    }
    n["cpt"] = std::move(cpt);
    nodes.push_back(std::move(n));
  }
  return Json{{"nodes", std::move(nodes)}};
}

Json network_to_json(const PointNetwork& pn) {
  Json nodes = Json::array();
  const Structure& s = pn.structure;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Json n = node_header(s.node(i));
    Json cpt = Json::object();
    for (std::size_t r = 0; r < pn.cpts[i].size(); ++r) {
      cpt[s.row_key(i, r)] = pn.cpts[i][r];
    }
    n["cpt"] = std::move(cpt);
    nodes.push_back(std::move(n));
  }
  return Json{{"nodes", std::move(nodes)}};
}

LoadedNetwork network_from_json(const Json& j) {
  Structure s = structure_from_json(j);
  bool any_point = false;
  bool any_opinion = false;
  const Json& nodes = j["nodes"];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const Json* row : cpt_rows(s, nodes[i], i)) {
      if (row->is_array()) {
        any_point = true;
      } else if (row->is_object()) {
        any_opinion = true;
      } else {
        throw Error(ErrorCode::kMalformedNetwork,
                    "node '" + s.node(i).name +
                        "': cpt rows must be probability arrays or opinion records");
      }
    }
  }
  if (any_point && any_opinion) {
    throw Error(ErrorCode::kMalformedNetwork,
                "network mixes point-probability and opinion rows");
  }
  if (any_opinion) return spec_from_json(j);
  return point_network_from_json(j);
}

NetworkSpec spec_from_json(const Json& j) {
  Structure s = structure_from_json(j);
  NetworkSpec net{s, {}};
  net.cpts.resize(s.size());
  const Json& nodes = j["nodes"];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const Json* row : cpt_rows(s, nodes[i], i)) {
      try {
        net.cpts[i].push_back(opinion_from_json(*row));
      } catch (const Error& e) {
        throw Error(ErrorCode::kMalformedNetwork,
                    "node '" + s.node(i).name + "': " + e.what());
      }
    }
  }
  return net;
}

PointNetwork point_network_from_json(const Json& j) {
  Structure s = structure_from_json(j);
  PointNetwork pn{s, {}};
  pn.cpts.resize(s.size());
  const Json& nodes = j["nodes"];
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const Json* row : cpt_rows(s, nodes[i], i)) {
      try {
        pn.cpts[i].push_back(row->get<std::vector<double>>());
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::kMalformedNetwork,
                    "node '" + s.node(i).name + "': cpt row is not a number array");
      }
    }
  }
  return pn;
}

Json records_to_json(const Structure& s,
                     std::span<const InstantiationRecord> records) {
  Json out = Json::array();
  for (const auto& rec : records) {
    Json r = Json::object();
    for (std::size_t i = 0; i < s.size(); ++i) {
      r[s.node(i).name] = s.node(i).states[static_cast<std::size_t>(rec.states[i])];
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<InstantiationRecord> records_from_json(const Structure& s,
                                                   const Json& j) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kMalformedRecord, "records file must be a JSON array");
  }
  std::vector<InstantiationRecord> out;
  out.reserve(j.size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Json& rec = j[r];
    if (!rec.is_object()) {
      throw Error(ErrorCode::kMalformedRecord,
                  "record " + std::to_string(r) + " is not an object");
    }
    InstantiationRecord parsed;
    parsed.states.assign(s.size(), -1);
    for (const auto& [name, value] : rec.items()) {
      auto idx = s.find(name);
      if (!idx) {
        throw Error(ErrorCode::kMalformedRecord,
                    "record " + std::to_string(r) + ": unknown variable '" + name + "'");
      }
      if (!value.is_string()) {
        throw Error(ErrorCode::kMalformedRecord,
                    "record " + std::to_string(r) + ": state of '" + name +
                        "' must be a string");
      }
      auto state = s.find_state(*idx, value.get<std::string>());
      if (!state) {
        throw Error(ErrorCode::kMalformedRecord,
                    "record " + std::to_string(r) + ": unknown state '" +
                        value.get<std::string>() + "' for '" + name + "'");
      }
      parsed.states[*idx] = *state;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (parsed.states[i] < 0) {
        throw Error(ErrorCode::kMalformedRecord,
                    "record " + std::to_string(r) + " does not assign '" +
                        s.node(i).name + "'");
      }
    }
    out.push_back(std::move(parsed));
  }
  return out;
}

}  // namespace uaml
