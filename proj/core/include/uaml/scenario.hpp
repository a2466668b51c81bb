#ifndef UAML_SCENARIO_HPP_
#define UAML_SCENARIO_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "uaml/inference.hpp"
#include "uaml/json.hpp"
#include "uaml/network.hpp"

namespace uaml::scenario {

// Route-planning network with the published ground-truth conditionals.
// Nodes: CD, MD (dispositions), CCA, MCA (attendances), MA (march), RA, RB,
// RC (route conditions).
PointNetwork build_ground_truth();

struct EvidenceRow {
  std::size_t number = 0;  // 1-based
  std::string label;
  EvidenceSet evidence;
};

// The five canonical evidence rows, in published order.
std::vector<EvidenceRow> canonical_rows();
Json rows_to_json(const std::vector<EvidenceRow>& rows);

inline constexpr std::array<const char*, 3> kRoutes{"RA", "RB", "RC"};

struct RouteValues {
  double b_safe = 0.0;
  double b_danger = 0.0;
  double u = 0.0;
};

// Published (b_safe, b_danger, u) for RA, RB, RC; index [row - 1][route].
const std::array<std::array<RouteValues, 3>, 5>& published_reference();

struct Tolerance {
  double belief = 0.0;
  double uncertainty = 0.0;
};

struct ToleranceProfile {
  Tolerance regular{0.08, 0.05};
  Tolerance conflict{0.15, 0.15};  // row 4

  Tolerance for_row(std::size_t number) const { return number == 4 ? conflict : regular; }
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::size_t n_seeds = 1;  // seeds seed, seed + 1, ...
  std::size_t n_instantiations = 100;
  std::vector<std::size_t> rows;  // 1-based; empty means all five
  ToleranceProfile tolerance;
  std::size_t attribution_top = 3;
};

struct RouteReport {
  std::string route;
  RouteValues inferred;  // medians over seeds
  RouteValues reference;
  RouteValues deviation;  // inferred - reference
  bool within_tolerance = false;
  // Single seed: the inferred opinion.  Sweep: per-seed opinions in order.
  std::vector<Opinion> per_seed;
  std::vector<Attribution> attribution;  // mean delta_u over seeds, top N
};

struct RowReport {
  EvidenceRow row;
  std::vector<RouteReport> routes;  // RA, RB, RC
};

struct Provenance {
  std::uint64_t seed = 0;
  // "CD" / "MA|neg,neg" -> counts per state.
  std::vector<std::pair<std::string, std::vector<int>>> row_counts;
};

struct QualitativeCheck {
  std::string name;
  std::string description;
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ScenarioReport {
  ScenarioConfig config;
  std::vector<RowReport> rows;
  std::vector<Provenance> provenance;
  // Evaluated only when every canonical row is present.
  std::vector<QualitativeCheck> qualitative;

  const RouteReport& route(std::size_t row_number, std::string_view route) const;
  bool all_within_tolerance() const;
  bool all_qualitative_hold() const;
};

// Samples records from the ground truth, learns the opinion network, infers
// every requested row and compares the routes with the published values.
// Throws Error(kDomainTooSmall) for n_instantiations or n_seeds of zero and
// Error(kInvalidEvidence) for unknown row numbers.
ScenarioReport run_scenario(const ScenarioConfig& cfg);

// Network learned from the first cfg.n_instantiations records of seed.
NetworkSpec learn_scenario_network(std::uint64_t seed, std::size_t n_instantiations);

Json report_to_json(const ScenarioReport& report, Precision precision = Precision::kDisplay);
std::string report_to_table(const ScenarioReport& report);

}  // namespace uaml::scenario

#endif  // UAML_SCENARIO_HPP_
