#include "uaml/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "uaml/error.hpp"

namespace uaml::scenario {

namespace {

std::vector<double> bernoulli_row(double p) { return {p, 1.0 - p}; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Structure scenario_structure() {
  return Structure({
      {"CD", {"pos", "neg"}, {}},
      {"MD", {"pos", "neg"}, {}},
      {"CCA", {"norm", "high"}, {"CD"}},
      {"MCA", {"norm", "high"}, {"MD"}},
      {"MA", {"norm", "violent"}, {"CD", "MD"}},
      {"RA", {"safe", "danger"}, {"CD"}},
      {"RB", {"safe", "danger"}, {"MA"}},
      {"RC", {"safe", "danger"}, {"MD"}},
  });
}

struct SeedRun {
  Provenance provenance;
  // [row][route]
  std::vector<std::vector<Opinion>> opinions;
  std::vector<std::vector<std::vector<Attribution>>> attribution;
};

SeedRun run_seed(std::uint64_t seed, const ScenarioConfig& cfg,
                 const std::vector<EvidenceRow>& rows) {
  const PointNetwork truth = build_ground_truth();
  const auto records = sample_instantiations(truth, cfg.n_instantiations, seed);
  const Structure& s = truth.structure;
  const NetworkSpec net = learn_conditionals(s, records);

  SeedRun run;
  run.provenance.seed = seed;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<std::vector<int>> counts(s.row_count(i),
                                         std::vector<int>(s.node(i).states.size(), 0));
    for (const auto& r : records) ++counts[s.row_of(i, r.states)][r.states[i]];
    for (std::size_t row = 0; row < counts.size(); ++row) {
      std::string key = s.node(i).name;
      if (!s.parents(i).empty()) key += "|" + s.row_key(i, row);
      run.provenance.row_counts.emplace_back(std::move(key), counts[row]);
    }
  }
  for (const auto& row : rows) {
    const auto attribution = attribute_all(net, row.evidence);
    const InferenceResult result = infer_subjective(net, row.evidence);
    std::vector<Opinion> ops;
    std::vector<std::vector<Attribution>> attr;
    for (const char* route : kRoutes) {
      ops.push_back(result.opinion(route));
      attr.push_back(attribution.at(route));
    }
    run.opinions.push_back(std::move(ops));
    run.attribution.push_back(std::move(attr));
  }
  return run;
}

QualitativeCheck make_check(std::string name, std::string description, double lhs,
                            double rhs, bool holds) {
  return {std::move(name), std::move(description), holds, lhs, rhs};
}

Json values_json(const RouteValues& v, Precision precision) {
  auto r = [&](double x) { return precision == Precision::kFull ? x : round_significant(x); };
  Json j;
  j["b_safe"] = r(v.b_safe);
  j["b_danger"] = r(v.b_danger);
  j["u"] = r(v.u);
  return j;
}

}  // namespace

PointNetwork build_ground_truth() {
  PointNetwork pn;
  pn.structure = scenario_structure();
  // Rows follow the sorted-parent order with states in declared order.
  pn.cpts = {
      {bernoulli_row(0.9)},                                    // CD
      {bernoulli_row(0.1)},                                    // MD
      {bernoulli_row(0.8), bernoulli_row(0.1)},                // CCA | CD
      {bernoulli_row(0.8), bernoulli_row(0.1)},                // MCA | MD
      {bernoulli_row(0.99), bernoulli_row(0.99), bernoulli_row(0.99),
       bernoulli_row(0.01)},                                   // MA | CD, MD
      {bernoulli_row(0.9), bernoulli_row(0.1)},                // RA | CD
      {bernoulli_row(0.9), bernoulli_row(0.1)},                // RB | MA
      {bernoulli_row(0.9), bernoulli_row(0.1)},                // RC | MD
  };
  return pn;
}

std::vector<EvidenceRow> canonical_rows() {
  const Opinion consistent({0.95, 0.0}, 0.05);
  const Opinion violent({0.0, 0.95}, 0.05);
  const Opinion vacuous = Opinion::vacuous(2);
  std::vector<EvidenceRow> rows;
  rows.push_back({1, "none", {}});
  rows.push_back({2, "CCA=norm, MCA=high, camera (0.95, 0, 0.05)",
                  {{{"CCA", "norm"}, {"MCA", "high"}}, {{"MA", consistent}}}});
  rows.push_back({3, "CCA=norm, MCA=norm, camera (0.95, 0, 0.05)",
                  {{{"CCA", "norm"}, {"MCA", "norm"}}, {{"MA", consistent}}}});
  rows.push_back({4, "CCA=norm, MCA=norm, camera (0, 0.95, 0.05)",
                  {{{"CCA", "norm"}, {"MCA", "norm"}}, {{"MA", violent}}}});
  rows.push_back({5, "CCA=norm, MCA=norm, camera (0, 0, 1)",
                  {{{"CCA", "norm"}, {"MCA", "norm"}}, {{"MA", vacuous}}}});
  return rows;
}

Json rows_to_json(const std::vector<EvidenceRow>& rows) {
  Json out = Json::array();
  for (const auto& row : rows) {
    Json j;
    j["row"] = row.number;
    j["label"] = row.label;
    j["evidence"] = evidence_to_json(row.evidence);
    out.push_back(std::move(j));
  }
  return out;
}

const std::array<std::array<RouteValues, 3>, 5>& published_reference() {
  static const std::array<std::array<RouteValues, 3>, 5> kTable{{
      {{{0.78, 0.20, 0.02}, {0.77, 0.21, 0.02}, {0.21, 0.77, 0.02}}},
      {{{0.92, 0.06, 0.02}, {0.91, 0.07, 0.02}, {0.13, 0.84, 0.03}}},
      {{{0.90, 0.08, 0.02}, {0.91, 0.07, 0.02}, {0.54, 0.37, 0.09}}},
      {{{0.66, 0.15, 0.19}, {0.02, 0.50, 0.48}, {0.54, 0.37, 0.09}}},
      {{{0.88, 0.09, 0.03}, {0.79, 0.08, 0.13}, {0.55, 0.36, 0.09}}},
  }};
  return kTable;
}

NetworkSpec learn_scenario_network(std::uint64_t seed, std::size_t n_instantiations) {
  const PointNetwork truth = build_ground_truth();
  const auto records = sample_instantiations(truth, n_instantiations, seed);
  return learn_conditionals(truth.structure, records);
}

const RouteReport& ScenarioReport::route(std::size_t row_number, std::string_view route) const {
  for (const auto& row : rows) {
    if (row.row.number != row_number) continue;
    for (const auto& r : row.routes) {
      if (r.route == route) return r;
    }
  }
  throw Error(ErrorCode::kInvalidEvidence,
              "report has no row " + std::to_string(row_number) + " route " + std::string(route));
}

bool ScenarioReport::all_within_tolerance() const {
  for (const auto& row : rows) {
    for (const auto& r : row.routes) {
      if (!r.within_tolerance) return false;
    }
  }
  return true;
}

bool ScenarioReport::all_qualitative_hold() const {
  return std::all_of(qualitative.begin(), qualitative.end(),
                     [](const QualitativeCheck& c) { return c.holds; });
}

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  if (cfg.n_instantiations == 0) {
    throw Error(ErrorCode::kDomainTooSmall, "n_instantiations must be at least 1");
  }
  if (cfg.n_seeds == 0) throw Error(ErrorCode::kDomainTooSmall, "n_seeds must be at least 1");
  const auto all_rows = canonical_rows();
  std::vector<EvidenceRow> rows;
  if (cfg.rows.empty()) {
    rows = all_rows;
  } else {
    for (std::size_t n : cfg.rows) {
      if (n < 1 || n > all_rows.size()) {
        throw Error(ErrorCode::kInvalidEvidence,
                    "unknown scenario row " + std::to_string(n) + " (expected 1..5)");
      }
      rows.push_back(all_rows[n - 1]);
    }
  }

  std::vector<SeedRun> runs(cfg.n_seeds);
  std::vector<std::exception_ptr> errors(cfg.n_seeds);
  {
    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(hw, cfg.n_seeds);
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < cfg.n_seeds; k += workers) {
          try {
            runs[k] = run_seed(cfg.seed + k, cfg, rows);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ScenarioReport report;
  report.config = cfg;
  for (auto& run : runs) report.provenance.push_back(std::move(run.provenance));
  const auto& reference = published_reference();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    RowReport row_report{rows[r], {}};
    const Tolerance tol = cfg.tolerance.for_row(rows[r].number);
    for (std::size_t t = 0; t < kRoutes.size(); ++t) {
      RouteReport rr;
      rr.route = kRoutes[t];
      std::vector<double> bs, bd, us;
      std::map<std::string, std::pair<InputGroup, double>> delta;
      for (const auto& run : runs) {
        const Opinion& op = run.opinions[r][t];
        rr.per_seed.push_back(op);
        bs.push_back(op.belief(0));
        bd.push_back(op.belief(1));
        us.push_back(op.uncertainty());
        for (const auto& a : run.attribution[r][t]) {
          auto [it, inserted] = delta.try_emplace(a.source.id, a.source, 0.0);
          it->second.second += a.delta_u / static_cast<double>(runs.size());
        }
      }
      rr.inferred = {median(bs), median(bd), median(us)};
      rr.reference = reference[rows[r].number - 1][t];
      rr.deviation = {rr.inferred.b_safe - rr.reference.b_safe,
                      rr.inferred.b_danger - rr.reference.b_danger,
                      rr.inferred.u - rr.reference.u};
      rr.within_tolerance = std::fabs(rr.deviation.b_safe) <= tol.belief &&
                            std::fabs(rr.deviation.b_danger) <= tol.belief &&
                            std::fabs(rr.deviation.u) <= tol.uncertainty;
      for (const auto& [id, entry] : delta) rr.attribution.push_back({entry.first, entry.second});
      std::stable_sort(rr.attribution.begin(), rr.attribution.end(),
                       [](const Attribution& a, const Attribution& b) {
                         if (a.delta_u != b.delta_u) return a.delta_u > b.delta_u;
                         return a.source.id < b.source.id;
                       });
      if (rr.attribution.size() > cfg.attribution_top) rr.attribution.resize(cfg.attribution_top);
      row_report.routes.push_back(std::move(rr));
    }
    report.rows.push_back(std::move(row_report));
  }

  const bool complete = std::all_of(all_rows.begin(), all_rows.end(), [&](const EvidenceRow& er) {
    return std::any_of(rows.begin(), rows.end(),
                       [&](const EvidenceRow& x) { return x.number == er.number; });
  });
  if (complete) {
    const double u_rc3 = report.route(3, "RC").inferred.u;
    const double u_rc2 = report.route(2, "RC").inferred.u;
    report.qualitative.push_back(make_check(
        "a", "u(RC) with MCA=norm exceeds u(RC) with MCA=high (row 3 vs row 2)", u_rc3, u_rc2,
        u_rc3 > u_rc2));
    const double u_rb4 = report.route(4, "RB").inferred.u;
    const double u_rb2 = report.route(2, "RB").inferred.u;
    report.qualitative.push_back(make_check(
        "b", "u(RB) under the violent camera is at least 5x u(RB) in row 2", u_rb4,
        5.0 * u_rb2, u_rb4 >= 5.0 * u_rb2));
    const double max_u1 = std::max({report.route(1, "RA").inferred.u,
                                    report.route(1, "RB").inferred.u,
                                    report.route(1, "RC").inferred.u});
    report.qualitative.push_back(
        make_check("c", "row 1 uncertainties are all at most 0.05", max_u1, 0.05, max_u1 <= 0.05));
    const double mirror = std::fabs(report.route(1, "RA").inferred.b_safe -
                                    report.route(1, "RC").inferred.b_danger);
    report.qualitative.push_back(make_check(
        "d", "row 1 |b_safe(RA) - b_danger(RC)| is at most 0.08", mirror, 0.08, mirror <= 0.08));
  }
  return report;
}

Json report_to_json(const ScenarioReport& report, Precision precision) {
  auto r = [&](double x) { return precision == Precision::kFull ? x : round_significant(x); };
  Json j;
  Json cfg;
  cfg["seed"] = report.config.seed;
  cfg["seeds"] = report.config.n_seeds;
  cfg["n_instantiations"] = report.config.n_instantiations;
  cfg["tolerance"] = {
      {"regular", {{"belief", report.config.tolerance.regular.belief},
                   {"uncertainty", report.config.tolerance.regular.uncertainty}}},
      {"row4", {{"belief", report.config.tolerance.conflict.belief},
                {"uncertainty", report.config.tolerance.conflict.uncertainty}}}};
  j["config"] = std::move(cfg);

  Json rows = Json::array();
  for (const auto& row : report.rows) {
    Json jr;
    jr["row"] = row.row.number;
    jr["label"] = row.row.label;
    jr["evidence"] = evidence_to_json(row.row.evidence);
    Json routes = Json::array();
    for (const auto& rr : row.routes) {
      Json jt;
      jt["route"] = rr.route;
      jt["inferred"] = values_json(rr.inferred, precision);
      jt["reference"] = values_json(rr.reference, Precision::kFull);
      jt["deviation"] = values_json(rr.deviation, precision);
      jt["within_tolerance"] = rr.within_tolerance;
      if (rr.per_seed.size() == 1) {
        jt["opinion"] = to_json(rr.per_seed.front(), precision);
      }
      Json attr = Json::array();
      for (const auto& a : rr.attribution) {
        attr.push_back({{"source", a.source.id},
                        {"label", a.source.label},
                        {"delta_u", r(a.delta_u)}});
      }
      jt["attribution"] = std::move(attr);
      routes.push_back(std::move(jt));
    }
    jr["routes"] = std::move(routes);
    rows.push_back(std::move(jr));
  }
  j["rows"] = std::move(rows);

  Json checks = Json::array();
  for (const auto& c : report.qualitative) {
    checks.push_back({{"name", c.name},
                      {"description", c.description},
                      {"holds", c.holds},
                      {"lhs", r(c.lhs)},
                      {"rhs", r(c.rhs)}});
  }
  j["qualitative"] = std::move(checks);
  j["within_tolerance"] = report.all_within_tolerance();

  Json prov = Json::array();
  for (const auto& p : report.provenance) {
    Json counts = Json::object();
    for (const auto& [key, c] : p.row_counts) counts[key] = c;
    prov.push_back({{"seed", p.seed}, {"row_counts", std::move(counts)}});
  }
  j["provenance"] = std::move(prov);
  return j;
}

std::string report_to_table(const ScenarioReport& report) {
  std::ostringstream out;
  char buf[160];
  if (report.config.n_seeds > 1) {
    out << "medians over " << report.config.n_seeds << " seeds starting at "
        << report.config.seed << ", " << report.config.n_instantiations
        << " instantiations each\n";
  } else {
    out << "seed " << report.config.seed << ", " << report.config.n_instantiations
        << " instantiations\n";
  }
  std::snprintf(buf, sizeof buf, "%-4s %-44s %-20s %-20s %-20s\n", "row", "observations",
                "Route A", "Route B", "Route C");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-4s %-44s %-20s %-20s %-20s\n", "", "", "(b_s, b_d, u)",
                "(b_s, b_d, u)", "(b_s, b_d, u)");
  out << buf;
  for (const auto& row : report.rows) {
    std::string cells[3];
    std::string refs[3];
    for (std::size_t t = 0; t < row.routes.size() && t < 3; ++t) {
      const auto& rr = row.routes[t];
      std::snprintf(buf, sizeof buf, "(%.2f, %.2f, %.2f)%s", rr.inferred.b_safe,
                    rr.inferred.b_danger, rr.inferred.u, rr.within_tolerance ? " " : "*");
      cells[t] = buf;
      std::snprintf(buf, sizeof buf, "(%.2f, %.2f, %.2f)", rr.reference.b_safe,
                    rr.reference.b_danger, rr.reference.u);
      refs[t] = buf;
    }
    std::snprintf(buf, sizeof buf, "%-4zu %-44s %-20s %-20s %-20s\n", row.row.number,
                  row.row.label.c_str(), cells[0].c_str(), cells[1].c_str(), cells[2].c_str());
    out << buf;
    std::snprintf(buf, sizeof buf, "%-4s %-44s %-20s %-20s %-20s\n", "", "  published",
                  refs[0].c_str(), refs[1].c_str(), refs[2].c_str());
    out << buf;
  }
  out << "* outside tolerance\n";
  for (const auto& c : report.qualitative) {
    std::snprintf(buf, sizeof buf, "(%s) %-70s %s\n", c.name.c_str(), c.description.c_str(),
                  c.holds ? "holds" : "FAILS");
    out << buf;
  }
  return out.str();
}

}  // namespace uaml::scenario
