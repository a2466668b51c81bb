#ifndef UAML_INFERENCE_HPP_
#define UAML_INFERENCE_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uaml/json.hpp"
#include "uaml/network.hpp"
#include "uaml/opinion.hpp"

namespace uaml {

// Hard state observations plus soft (opinion-valued) likelihood observations.
// A soft opinion is attached to its node as the lambda message of a
// pseudo-child.
struct EvidenceSet {
  std::map<std::string, std::string> hard;
  std::map<std::string, Opinion> soft;
};

// Evidence bound to node indices.  hard[i] < 0 means unobserved;
// soft_likelihood[i] is P(pseudo-observation | first state) when present.
struct BoundEvidence {
  std::vector<int> hard;
  std::vector<std::optional<double>> soft_likelihood;
  std::vector<std::optional<Opinion>> soft_opinion;
};

// Throws Error(kInvalidEvidence) for unknown nodes or states, nodes listed as
// both hard and soft, and non-binary soft opinions.
BoundEvidence bind_evidence(const Structure& s, const EvidenceSet& ev);

EvidenceSet evidence_from_json(const Json& j);
Json evidence_to_json(const EvidenceSet& ev, Precision precision = Precision::kDisplay);

// A binary opinion seen as a beta-distributed message.
struct MessageOpinion {
  double p = 0.5;
  double strength = 2.0;
};

// p = b_first + u / 2, s = 2 / u (kMaxStrength when u = 0).
MessageOpinion soft_evidence_message(const Opinion& op);

// Exact posterior P(first state | evidence) of every node by Pearl's
// polytree message passing.  Observed nodes report their indicator.
// Throws Error(kUnsupportedStructure) for non-polytrees and
// Error(kInconsistentEvidence) when the evidence has zero probability.
std::vector<double> bp_point(const PointNetwork& pn, const EvidenceSet& ev);

struct Diagnostic {
  std::string node;
  std::string kind;
  std::string detail;
};

struct NodeOpinion {
  std::string node;
  Opinion opinion;
  double mean = 0.0;      // g at the input means
  double variance = 0.0;  // first-order propagated variance
};

struct InferenceResult {
  std::vector<NodeOpinion> nodes;  // latent nodes in network order
  std::vector<Diagnostic> diagnostics;

  const NodeOpinion* find(std::string_view name) const;
  const Opinion& opinion(std::string_view name) const;
};

// First-order (delta-method) propagation of the beta uncertainty of every
// CPT row and soft observation through the exact polytree posterior, followed
// by beta moment matching.  Each row is one beta variable (its first-state
// probability); all inputs are independent.  Derivatives are central
// differences with step kFiniteDifferenceStep.
InferenceResult infer_subjective(const NetworkSpec& net, const EvidenceSet& ev);

inline constexpr double kFiniteDifferenceStep = 1e-5;

// One uncertain input of the inference: a CPT row or a soft observation.
struct InputGroup {
  std::string id;     // "cpt/MA/neg,neg", "cpt/CD", "soft/MA"
  std::string label;  // "P(MA | CD=neg, MD=neg)", "soft evidence on MA"
};

std::vector<InputGroup> input_groups(const NetworkSpec& net, const EvidenceSet& ev);

struct Attribution {
  InputGroup source;
  double delta_u = 0.0;
};

// For each input group, the drop in the target's uncertainty when that group
// is made dogmatic at its mean.  Sorted by delta_u descending.
std::vector<Attribution> attribute_uncertainty(const NetworkSpec& net,
                                               const EvidenceSet& ev,
                                               const std::string& target);

// Attribution for every latent node at once (one ablated inference per
// group); keyed by node name.
std::map<std::string, std::vector<Attribution>> attribute_all(
    const NetworkSpec& net, const EvidenceSet& ev);

// Result document shared by the CLI and the HTTP API: opinions with their
// projected probabilities and 90% intervals, diagnostics, and attribution.
Json result_to_json(const InferenceResult& result,
                    const std::map<std::string, std::vector<Attribution>>* attribution,
                    Precision precision = Precision::kDisplay);

}  // namespace uaml

#endif  // UAML_INFERENCE_HPP_
