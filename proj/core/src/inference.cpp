#include "uaml/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polytree_bp.hpp"
#include "uaml/error.hpp"

namespace uaml {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<double> soft_vector(const BoundEvidence& ev) {
  std::vector<double> soft(ev.soft_likelihood.size(), -1.0);
  for (std::size_t i = 0; i < soft.size(); ++i) {
    if (ev.soft_likelihood[i]) soft[i] = *ev.soft_likelihood[i];
  }
  return soft;
}

std::vector<std::vector<double>> first_state_table(const PointNetwork& pn) {
  std::vector<std::vector<double>> p(pn.cpts.size());
  for (std::size_t i = 0; i < pn.cpts.size(); ++i) {
    for (const auto& row : pn.cpts[i]) p[i].push_back(row[0]);
  }
  return p;
}

// One beta-distributed scalar input of the composed posterior map.
struct ScalarInput {
  std::size_t node;
  std::optional<std::size_t> row;  // empty for a soft observation
  double mean;
  double variance;
};

std::string row_label(const Structure& s, std::size_t node, std::size_t row) {
  const auto& parents = s.parents(node);
  std::string label = "P(" + s.node(node).name;
  if (!parents.empty()) {
    label += " | ";
    const auto states = s.row_parent_states(node, row);
    for (std::size_t k = 0; k < parents.size(); ++k) {
      if (k > 0) label += ", ";
      label += s.node(parents[k]).name + "=" +
               s.node(parents[k]).states[static_cast<std::size_t>(states[k])];
    }
  }
  return label + ")";
}

std::string row_id(const Structure& s, std::size_t node, std::size_t row) {
  std::string id = "cpt/" + s.node(node).name;
  if (!s.parents(node).empty()) id += "/" + s.row_key(node, row);
  return id;
}

}  // namespace

// --- evidence -------------------------------------------------------------

BoundEvidence bind_evidence(const Structure& s, const EvidenceSet& ev) {
  BoundEvidence out;
  out.hard.assign(s.size(), -1);
  out.soft_likelihood.assign(s.size(), std::nullopt);
  out.soft_opinion.assign(s.size(), std::nullopt);
  for (const auto& [name, state] : ev.hard) {
    const std::size_t i = s.index_of(name);
    auto idx = s.find_state(i, state);
    if (!idx) {
      throw Error(ErrorCode::kInvalidEvidence,
                  "unknown state '" + state + "' for node '" + name + "'");
    }
    out.hard[i] = *idx;
  }
  for (const auto& [name, op] : ev.soft) {
    const std::size_t i = s.index_of(name);
    if (out.hard[i] >= 0) {
      throw Error(ErrorCode::kInvalidEvidence,
                  "node '" + name + "' has both hard and soft evidence");
    }
    if (op.size() != 2 || s.node(i).states.size() != 2) {
      throw Error(ErrorCode::kInvalidEvidence,
                  "soft evidence on '" + name + "' must be a binary opinion");
    }
    out.soft_likelihood[i] = soft_evidence_message(op).p;
    out.soft_opinion[i] = op;
  }
  return out;
}

EvidenceSet evidence_from_json(const Json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidEvidence, "evidence must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key != "hard" && key != "soft") {
      throw Error(ErrorCode::kInvalidEvidence,
                  "unexpected evidence field '" + key + "'");
    }
    if (!value.is_object()) {
      throw Error(ErrorCode::kInvalidEvidence,
                  "evidence field '" + key + "' must be an object");
    }
  }
  EvidenceSet ev;
  if (j.contains("hard")) {
    for (const auto& [name, state] : j["hard"].items()) {
      if (!state.is_string()) {
        throw Error(ErrorCode::kInvalidEvidence,
                    "hard evidence for '" + name + "' must be a state name");
      }
      ev.hard.emplace(name, state.get<std::string>());
    }
  }
  if (j.contains("soft")) {
    for (const auto& [name, op] : j["soft"].items()) {
      try {
        ev.soft.emplace(name, opinion_from_json(op));
      } catch (const Error& e) {
        throw Error(ErrorCode::kInvalidEvidence,
                    "soft evidence for '" + name + "': " + e.what());
      }
    }
  }
  return ev;
}

Json evidence_to_json(const EvidenceSet& ev, Precision precision) {
  Json j;
  j["hard"] = Json::object();
  for (const auto& [name, state] : ev.hard) j["hard"][name] = state;
  j["soft"] = Json::object();
  for (const auto& [name, op] : ev.soft) j["soft"][name] = to_json(op, precision);
  return j;
}

MessageOpinion soft_evidence_message(const Opinion& op) {
  const double u = op.uncertainty();
  MessageOpinion m;
  m.p = op.belief(0) + u / 2.0;
  m.strength = op.strength();
  return m;
}

// --- exact BP -------------------------------------------------------------

std::vector<double> bp_point(const PointNetwork& pn, const EvidenceSet& ev) {
  require_valid(validate_network(pn));
  const BoundEvidence bound = bind_evidence(pn.structure, ev);
  detail::PolytreeBp bp(pn.structure);
  auto post = bp.posteriors(first_state_table(pn), bound.hard, soft_vector(bound));
  if (post.empty()) {
    throw Error(ErrorCode::kInconsistentEvidence, "evidence has zero probability");
  }
  return post;
}

// --- subjective inference -------------------------------------------------

const NodeOpinion* InferenceResult::find(std::string_view name) const {
  for (const auto& n : nodes) {
    if (n.node == name) return &n;
  }
  return nullptr;
}

const Opinion& InferenceResult::opinion(std::string_view name) const {
  const NodeOpinion* n = find(name);
  if (n == nullptr) {
    throw Error(ErrorCode::kInvalidEvidence,
                "no inferred opinion for '" + std::string(name) + "'");
  }
  return n->opinion;
}

InferenceResult infer_subjective(const NetworkSpec& net, const EvidenceSet& ev) {
  require_valid(validate_network(net));
  const Structure& s = net.structure;
  const BoundEvidence bound = bind_evidence(s, ev);

  std::vector<std::vector<double>> p(s.size());
  std::vector<ScalarInput> inputs;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t r = 0; r < net.cpts[i].size(); ++r) {
      const Projection proj = project(net.cpts[i][r]);
      p[i].push_back(proj.probabilities[0]);
      if (proj.variances[0] > 0.0) {
        inputs.push_back({i, r, proj.probabilities[0], proj.variances[0]});
      }
    }
  }
  std::vector<double> soft = soft_vector(bound);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!bound.soft_opinion[i]) continue;
    const MessageOpinion m = soft_evidence_message(*bound.soft_opinion[i]);
    if (m.strength < kMaxStrength) {
      inputs.push_back(
          {i, std::nullopt, m.p, m.p * (1.0 - m.p) / (m.strength + 1.0)});
    }
  }

  detail::PolytreeBp bp(s);
  const std::vector<double> center = bp.posteriors(p, bound.hard, soft);
  if (center.empty()) {
    throw Error(ErrorCode::kInconsistentEvidence, "evidence has zero probability");
  }

  InferenceResult result;
  std::vector<double> variance(s.size(), 0.0);
  constexpr double h = kFiniteDifferenceStep;
  for (const ScalarInput& in : inputs) {
    double& slot = in.row ? p[in.node][*in.row] : soft[in.node];
    const double original = slot;
    double lo = original - h;
    double hi = original + h;
    if (lo < 0.0 || hi > 1.0) {
      lo = std::max(lo, 0.0);
      hi = std::min(hi, 1.0);
      result.diagnostics.push_back(
          {s.node(in.node).name, "one-sided-difference",
           (in.row ? row_label(s, in.node, *in.row) : "soft evidence") +
               " at " + format_number(original)});
    }
    slot = hi;
    const std::vector<double> g_hi = bp.posteriors(p, bound.hard, soft);
    slot = lo;
    const std::vector<double> g_lo = bp.posteriors(p, bound.hard, soft);
    slot = original;
    if (g_hi.empty() || g_lo.empty()) {
      throw Error(ErrorCode::kInconsistentEvidence,
                  "evidence probability vanishes under a perturbation of " +
                      s.node(in.node).name);
    }
    for (std::size_t t = 0; t < s.size(); ++t) {
      const double d = (g_hi[t] - g_lo[t]) / (hi - lo);
      variance[t] += d * d * in.variance;
    }
  }

  for (std::size_t t = 0; t < s.size(); ++t) {
    if (bound.hard[t] >= 0) continue;
    const MomentFit fit = moment_fit(center[t], variance[t]);
    if (fit.mean_clamped) {
      result.diagnostics.push_back({s.node(t).name, "mean-clamped",
                                    "posterior mean " + format_number(center[t]) +
                                        " clamped into (0, 1)"});
    }
    if (fit.strength_clamped) {
      result.diagnostics.push_back(
          {s.node(t).name, "strength-clamped",
           "raw strength " + format_number(fit.raw_strength) + " clamped to " +
               format_number(fit.opinion.strength())});
    }
    result.nodes.push_back({s.node(t).name, fit.opinion, center[t], variance[t]});
  }
  return result;
}

// --- attribution ----------------------------------------------------------

std::vector<InputGroup> input_groups(const NetworkSpec& net, const EvidenceSet& ev) {
  const Structure& s = net.structure;
  std::vector<InputGroup> groups;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t r = 0; r < net.cpts[i].size(); ++r) {
      groups.push_back({row_id(s, i, r), row_label(s, i, r)});
    }
  }
  for (const auto& [name, op] : ev.soft) {
    groups.push_back({"soft/" + name, "soft evidence on " + name});
  }
  return groups;
}

namespace {

// Returns a copy of (net, ev) with group `g` (index into input_groups order)
// made dogmatic, or nullopt if it already is.
std::optional<std::pair<NetworkSpec, EvidenceSet>> ablate(const NetworkSpec& net,
                                                          const EvidenceSet& ev,
                                                          std::size_t g) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < net.cpts.size(); ++i) {
    for (std::size_t r = 0; r < net.cpts[i].size(); ++r, ++idx) {
      if (idx != g) continue;
      const Opinion& op = net.cpts[i][r];
      if (op.is_dogmatic()) return std::nullopt;
      NetworkSpec copy = net;
      copy.cpts[i][r] = Opinion::binary(op.projected(0), kMaxStrength);
      return std::make_pair(std::move(copy), ev);
    }
  }
  for (const auto& [name, op] : ev.soft) {
    if (idx++ != g) continue;
    const MessageOpinion m = soft_evidence_message(op);
    if (m.strength >= kMaxStrength) return std::nullopt;
    EvidenceSet copy = ev;
    copy.soft.insert_or_assign(name, Opinion::binary(m.p, kMaxStrength));
    return std::make_pair(net, std::move(copy));
  }
  return std::nullopt;
}

void sort_attribution(std::vector<Attribution>& list) {
  std::stable_sort(list.begin(), list.end(),
                   [](const Attribution& a, const Attribution& b) {
                     return a.delta_u > b.delta_u;
                   });
}

}  // namespace

std::map<std::string, std::vector<Attribution>> attribute_all(const NetworkSpec& net,
                                                              const EvidenceSet& ev) {
  const InferenceResult full = infer_subjective(net, ev);
  const auto groups = input_groups(net, ev);
  std::map<std::string, std::vector<Attribution>> out;
  for (const auto& n : full.nodes) out[n.node];
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto ablated = ablate(net, ev, g);
    std::optional<InferenceResult> partial;
    if (ablated) partial = infer_subjective(ablated->first, ablated->second);
    for (const auto& n : full.nodes) {
      double delta = 0.0;
      if (partial) {
        delta = n.opinion.uncertainty() - partial->opinion(n.node).uncertainty();
      }
      out[n.node].push_back({groups[g], delta});
    }
  }
  for (auto& [name, list] : out) sort_attribution(list);
  return out;
}

std::vector<Attribution> attribute_uncertainty(const NetworkSpec& net,
                                               const EvidenceSet& ev,
                                               const std::string& target) {
  const InferenceResult full = infer_subjective(net, ev);
  const double u_full = full.opinion(target).uncertainty();
  const auto groups = input_groups(net, ev);
  std::vector<Attribution> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    double delta = 0.0;
    if (auto ablated = ablate(net, ev, g)) {
      delta = u_full -
              infer_subjective(ablated->first, ablated->second).opinion(target).uncertainty();
    }
    out.push_back({groups[g], delta});
  }
  sort_attribution(out);
  return out;
}

// --- result document ------------------------------------------------------

Json result_to_json(const InferenceResult& result,
                    const std::map<std::string, std::vector<Attribution>>* attribution,
                    Precision precision) {
  auto num = [precision](double v) {
    return precision == Precision::kDisplay ? round_significant(v) : v;
  };
  Json j;
  Json opinions = Json::object();
  for (const auto& n : result.nodes) {
    Json entry = to_json(n.opinion, precision);
    const Projection proj = project(n.opinion);
    entry["projected"] = {num(proj.probabilities[0]), num(proj.probabilities[1])};
    const Interval iv = beta_interval(n.opinion, 0, 0.9);
    entry["interval90"] = {num(iv.lo), num(iv.hi)};
    opinions[n.node] = std::move(entry);
  }
  j["opinions"] = std::move(opinions);
  j["diagnostics"] = Json::array();
  for (const auto& d : result.diagnostics) {
    j["diagnostics"].push_back({{"node", d.node}, {"kind", d.kind}, {"detail", d.detail}});
  }
  j["attribution"] = Json::array();
  if (attribution != nullptr) {
    for (const auto& n : result.nodes) {
      auto it = attribution->find(n.node);
      if (it == attribution->end()) continue;
      Json ranking = Json::array();
      for (const auto& a : it->second) {
        ranking.push_back({{"source", a.source.id},
                           {"label", a.source.label},
                           {"delta_u", num(a.delta_u)}});
      }
      j["attribution"].push_back({{"target", n.node}, {"ranking", std::move(ranking)}});
    }
  }
  return j;
}

}  // namespace uaml
