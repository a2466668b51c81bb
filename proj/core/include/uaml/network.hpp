#ifndef UAML_NETWORK_HPP_
#define UAML_NETWORK_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "uaml/json.hpp"
#include "uaml/opinion.hpp"

namespace uaml {

struct NodeSpec {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> parents;
};

// Node names, domains and edges of a Bayesian network.  Parents are kept
// sorted by name; CPT rows enumerate parent configurations
// lexicographically in that order with states in declared order (the first
// sorted parent varies slowest).
//
// Construction rejects duplicate names and references to unknown parents.
// Acyclicity, the polytree property and binary domains are checked by
// validate_network, not here.
class Structure {
 public:
  Structure() = default;
  explicit Structure(std::vector<NodeSpec> nodes);

  std::size_t size() const { return nodes_.size(); }
  const NodeSpec& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws Error(kInvalidEvidence) naming the unknown node.
  std::size_t index_of(std::string_view name) const;
  std::optional<int> find_state(std::size_t node, std::string_view state) const;

  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }

  std::size_t row_count(std::size_t i) const;
  // CPT row selected by a full assignment of state indices.
  std::size_t row_of(std::size_t i, std::span<const int> assignment) const;
  // Parent state indices (sorted-parent order) of a row.
  std::vector<int> row_parent_states(std::size_t i, std::size_t row) const;
  // "pos,neg" style key; empty for parentless nodes.
  std::string row_key(std::size_t i, std::size_t row) const;
  std::optional<std::size_t> row_from_key(std::size_t i, std::string_view key) const;

  // Empty if the graph has a directed cycle.
  std::optional<std::vector<std::size_t>> topological_order() const;

 private:
  std::vector<NodeSpec> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
};

// Network whose conditionals are opinions: cpts[node][row].
struct NetworkSpec {
  Structure structure;
  std::vector<std::vector<Opinion>> cpts;
};

// Network whose conditionals are point probability vectors.
struct PointNetwork {
  Structure structure;
  std::vector<std::vector<std::vector<double>>> cpts;

  // P(first state | row); requires a binary node.
  double p_first(std::size_t node, std::size_t row) const {
    return cpts[node][row][0];
  }
};

// Projected probabilities of every CPT row.
PointNetwork mean_network(const NetworkSpec& net);
// Every row dogmatic at the point probabilities.
NetworkSpec dogmatic_network(const PointNetwork& pn);

enum class IssueKind { kCycle, kNotPolytree, kNonBinary, kMalformedTable };

std::string_view issue_kind_name(IssueKind kind);

struct ValidationIssue {
  IssueKind kind;
  std::string node;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(IssueKind kind) const;
  Json to_json() const;
};

ValidationReport validate_network(const Structure& structure);
ValidationReport validate_network(const NetworkSpec& net);
ValidationReport validate_network(const PointNetwork& pn);

// Throws Error(kUnsupportedStructure) or Error(kMalformedNetwork) carrying the
// first issue of the report.
void require_valid(const ValidationReport& report);

// One full assignment: states[node] is a state index.
struct InstantiationRecord {
  std::vector<int> states;

  friend bool operator==(const InstantiationRecord&,
                         const InstantiationRecord&) = default;
};

// Count-based learning: each CPT row is opinion_from_counts over the records
// matching its parent configuration; unmatched rows are vacuous.
NetworkSpec learn_conditionals(const Structure& structure,
                               std::span<const InstantiationRecord> records);

// Ancestral sampling in topological order.  Record i draws from substream
// (seed, i), so output is independent of scheduling.
std::vector<InstantiationRecord> sample_instantiations(const PointNetwork& pn,
                                                       std::size_t n,
                                                       std::uint64_t seed);

// --- JSON ---------------------------------------------------------------

Json network_to_json(const NetworkSpec& net, Precision precision = Precision::kDisplay);
Json network_to_json(const PointNetwork& pn);

// Nodes, states and parents only; cpt entries are ignored.
Structure structure_from_json(const Json& j);

using LoadedNetwork = std::variant<PointNetwork, NetworkSpec>;

// Rows holding arrays load as a PointNetwork, rows holding opinion records
// as a NetworkSpec.  Mixing both in one file is an error.
LoadedNetwork network_from_json(const Json& j);
NetworkSpec spec_from_json(const Json& j);
PointNetwork point_network_from_json(const Json& j);

Json records_to_json(const Structure& structure,
                     std::span<const InstantiationRecord> records);
// Throws Error(kMalformedRecord) for unknown variables or states and for
// records missing a variable.
std::vector<InstantiationRecord> records_from_json(const Structure& structure,
                                                   const Json& j);

}  // namespace uaml

#endif  // UAML_NETWORK_HPP_
