#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "uaml/error.hpp"
#include "uaml/inference.hpp"
#include "uaml/oracle.hpp"
#include "uaml/scenario.hpp"

namespace uaml {
namespace {

const std::vector<std::string> kTf{"t", "f"};

PointNetwork chain() {
  Structure s({{"X", kTf, {}}, {"Y", kTf, {"X"}}});
  return {s, {{{0.9, 0.1}}, {{0.8, 0.2}, {0.1, 0.9}}}};
}

template <class F>
ErrorCode code_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kIo;
}

// Same network with the state order of every node reversed.
NetworkSpec relabel(const NetworkSpec& net) {
  std::vector<NodeSpec> nodes = net.structure.nodes();
  for (auto& n : nodes) std::reverse(n.states.begin(), n.states.end());
  NetworkSpec out{Structure(nodes), {}};
  for (std::size_t i = 0; i < out.structure.size(); ++i) {
    std::vector<Opinion> rows;
    for (std::size_t r = 0; r < out.structure.row_count(i); ++r) {
      const auto old = net.structure.row_from_key(i, out.structure.row_key(i, r));
      const Opinion& op = net.cpts[i][*old];
      rows.emplace_back(std::vector<double>{op.belief(1), op.belief(0)}, op.uncertainty());
    }
    out.cpts.push_back(std::move(rows));
  }
  return out;
}

TEST(BpPoint, ChainExample) {
  EvidenceSet ev;
  ev.hard["Y"] = "t";
  EXPECT_NEAR(bp_point(chain(), ev)[0], 0.72 / 0.73, 1e-12);
}

TEST(BpPoint, GroundTruthPrior) {
  const PointNetwork gt = scenario::build_ground_truth();
  const auto post = bp_point(gt, {});
  EXPECT_NEAR(post[*gt.structure.find("RA")], 0.82, 1e-12);
  EXPECT_NEAR(post[*gt.structure.find("RB")], 0.9 * 0.9018 + 0.1 * 0.0982, 1e-12);
}

TEST(BpPoint, VacuousSoftEvidenceIsNoEvidence) {
  const PointNetwork gt = scenario::build_ground_truth();
  EvidenceSet ev;
  ev.soft.emplace("MA", Opinion::vacuous(2));
  const auto a = bp_point(gt, ev);
  const auto b = bp_point(gt, {});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(BpPoint, MatchesEnumerationOnRandomPolytrees) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const PointNetwork pn = testing::random_polytree(rng, {});
    EvidenceSet ev = testing::random_hard_evidence(pn, rng, 0.3);
    testing::add_random_soft_evidence(pn.structure, rng, 2, ev);
    const auto bp = bp_point(pn, ev);
    const auto en = enumerate_posterior(pn, ev);
    for (std::size_t i = 0; i < bp.size(); ++i) ASSERT_NEAR(bp[i], en[i], 1e-9);
  }
}

TEST(BpPoint, Errors) {
  EvidenceSet ev;
  ev.hard["X"] = "t";
  ev.hard["Y"] = "f";
  PointNetwork pn = chain();
  pn.cpts[1][0] = {1.0, 0.0};
  EXPECT_EQ(code_of([&] { bp_point(pn, ev); }), ErrorCode::kInconsistentEvidence);

  Structure loop({{"A", kTf, {}}, {"B", kTf, {"A"}}, {"C", kTf, {"A", "B"}}});
  PointNetwork lp{loop, {{{0.5, 0.5}},
                         {{0.5, 0.5}, {0.5, 0.5}},
                         {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}}};
  EXPECT_EQ(code_of([&] { bp_point(lp, {}); }), ErrorCode::kUnsupportedStructure);
}

TEST(BindEvidence, Errors) {
  const Structure s = chain().structure;
  EvidenceSet unknown;
  unknown.hard["Q"] = "t";
  try {
    bind_evidence(s, unknown);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidEvidence);
    EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos);
  }
  EvidenceSet bad_state;
  bad_state.hard["X"] = "maybe";
  EXPECT_EQ(code_of([&] { bind_evidence(s, bad_state); }), ErrorCode::kInvalidEvidence);
  EvidenceSet both;
  both.hard["X"] = "t";
  both.soft.emplace("X", Opinion::vacuous(2));
  EXPECT_EQ(code_of([&] { bind_evidence(s, both); }), ErrorCode::kInvalidEvidence);
}

TEST(SoftEvidenceMessage, Examples) {
  auto m = soft_evidence_message(Opinion({0.95, 0.0}, 0.05));
  EXPECT_NEAR(m.p, 0.975, 1e-15);
  EXPECT_NEAR(m.strength, 40, 1e-12);
  m = soft_evidence_message(Opinion({0.0, 0.95}, 0.05));
  EXPECT_NEAR(m.p, 0.025, 1e-15);
  m = soft_evidence_message(Opinion::vacuous(2));
  EXPECT_EQ(m.p, 0.5);
  EXPECT_EQ(m.strength, 2.0);
  m = soft_evidence_message(Opinion({0.3, 0.7}, 0.0));
  EXPECT_EQ(m.strength, kMaxStrength);
}

TEST(InferSubjective, DogmaticReducesToPoint) {
  const PointNetwork gt = scenario::build_ground_truth();
  for (const auto& row : scenario::canonical_rows()) {
    EvidenceSet ev = row.evidence;
    for (auto& [name, op] : ev.soft) op = Opinion({op.projected(0), op.projected(1)}, 0.0);
    const InferenceResult r = infer_subjective(dogmatic_network(gt), ev);
    const auto exact = bp_point(gt, ev);
    for (const auto& n : r.nodes) {
      EXPECT_LE(n.opinion.uncertainty(), 2 / kMaxStrength + 1e-15);
      EXPECT_NEAR(n.opinion.projected(0), exact[*gt.structure.find(n.node)], 1e-6);
    }
  }
}

TEST(InferSubjective, ChainAgreesWithOracle) {
  const Structure s = chain().structure;
  NetworkSpec net{s,
                  {{opinion_from_counts({{90, 10}})},
                   {opinion_from_counts({{18, 2}}), opinion_from_counts({{2, 18}})}}};
  EvidenceSet ev;
  ev.hard["Y"] = "t";
  const InferenceResult r = infer_subjective(net, ev);
  OracleConfig cfg;
  cfg.n_samples = 100000;
  const auto oracle = oracle_infer(net, ev, cfg);
  const Opinion& x = r.opinion("X");
  EXPECT_NEAR(x.projected(0), oracle.at("X").mean, 0.02);
  const double ratio = x.strength() / oracle.at("X").opinion.strength();
  EXPECT_GE(ratio, 0.8);
  EXPECT_LE(ratio, 1.25);
}

TEST(InferSubjective, ResultShape) {
  const NetworkSpec net = scenario::learn_scenario_network(1, 100);
  const InferenceResult r = infer_subjective(net, scenario::canonical_rows()[1].evidence);
  // Observed CCA and MCA are not latent.
  EXPECT_EQ(r.find("CCA"), nullptr);
  ASSERT_NE(r.find("RA"), nullptr);
  for (const auto& n : r.nodes) {
    const auto& b = n.opinion.beliefs();
    EXPECT_NEAR(b[0] + b[1] + n.opinion.uncertainty(), 1.0, kOpinionSumTolerance);
  }
}

TEST(InferSubjective, Symmetry) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const PointNetwork pn = testing::random_polytree(rng, {});
    const NetworkSpec net = testing::random_opinion_network(pn, rng, 12, 100);
    EvidenceSet ev = testing::random_hard_evidence(pn, rng, 0.3);
    testing::add_random_soft_evidence(pn.structure, rng, 1, ev);
    EvidenceSet flipped = ev;
    for (auto& [name, op] : flipped.soft) {
      op = Opinion({op.belief(1), op.belief(0)}, op.uncertainty());
    }
    const InferenceResult a = infer_subjective(net, ev);
    const InferenceResult b = infer_subjective(relabel(net), flipped);
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      const Opinion& x = a.nodes[i].opinion;
      const Opinion& y = b.nodes[i].opinion;
      EXPECT_NEAR(x.belief(0), y.belief(1), 1e-9);
      EXPECT_NEAR(x.belief(1), y.belief(0), 1e-9);
      EXPECT_NEAR(x.uncertainty(), y.uncertainty(), 1e-9);
    }
  }
}

TEST(InferSubjective, DSeparatedEvidenceChangesNothing) {
  // A -> C <- B with C unobserved: B carries no information about A.
  Structure s({{"A", kTf, {}}, {"B", kTf, {}}, {"C", kTf, {"A", "B"}}});
  Rng rng(8);
  std::vector<std::vector<Opinion>> cpts;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::vector<Opinion> rows;
    for (std::size_t r = 0; r < s.row_count(i); ++r) {
      rows.push_back(opinion_from_counts({{1 + 30 * rng.uniform(), 1 + 30 * rng.uniform()}}));
    }
    cpts.push_back(rows);
  }
  const NetworkSpec net{s, cpts};
  EvidenceSet ev;
  ev.hard["B"] = "f";
  const Opinion before = infer_subjective(net, {}).opinion("A");
  const Opinion after = infer_subjective(net, ev).opinion("A");
  EXPECT_NEAR(before.belief(0), after.belief(0), 1e-9);
  EXPECT_NEAR(before.uncertainty(), after.uncertainty(), 1e-9);
}

TEST(InferSubjective, EvidenceBeyondObservedNodeChangesNothing) {
  const PointNetwork gt = scenario::build_ground_truth();
  const NetworkSpec net = scenario::learn_scenario_network(2, 100);
  EvidenceSet ev;
  ev.hard["CD"] = "pos";
  EvidenceSet more = ev;
  more.hard["CCA"] = "high";
  const Opinion a = infer_subjective(net, ev).opinion("RA");
  const Opinion b = infer_subjective(net, more).opinion("RA");
  EXPECT_NEAR(a.belief(0), b.belief(0), 1e-9);
  EXPECT_NEAR(a.uncertainty(), b.uncertainty(), 1e-9);
}

TEST(InputGroups, Labels) {
  const NetworkSpec net = scenario::learn_scenario_network(1, 100);
  const auto groups = input_groups(net, scenario::canonical_rows()[3].evidence);
  bool cpt = false, soft = false;
  for (const auto& g : groups) {
    cpt |= g.id == "cpt/MA/neg,neg";
    soft |= g.id == "soft/MA";
    EXPECT_FALSE(g.label.empty());
  }
  EXPECT_TRUE(cpt);
  EXPECT_TRUE(soft);
}

TEST(Attribution, DogmaticNetworkIsZero) {
  const NetworkSpec net = dogmatic_network(scenario::build_ground_truth());
  for (const auto& a : attribute_uncertainty(net, {}, "RB")) EXPECT_EQ(a.delta_u, 0.0);
}

TEST(Attribution, ConflictRowPointsAtMarch) {
  const NetworkSpec net = scenario::learn_scenario_network(1, 100);
  const auto ranked = attribute_uncertainty(net, scenario::canonical_rows()[3].evidence, "RB");
  ASSERT_FALSE(ranked.empty());
  const std::string& top = ranked.front().source.id;
  EXPECT_TRUE(top.rfind("cpt/MA/", 0) == 0 || top == "soft/MA") << top;
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    EXPECT_GE(ranked[i - 1].delta_u, ranked[i].delta_u);
  }
}

TEST(Attribution, RemovingASourceNeverAddsUncertainty) {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const PointNetwork pn = testing::random_polytree(rng, {2, 8, 3, 0.05, 0.95});
    const NetworkSpec net = testing::random_opinion_network(pn, rng, 4, 60);
    EvidenceSet ev = testing::random_hard_evidence(pn, rng, 0.3);
    testing::add_random_soft_evidence(pn.structure, rng, 1, ev);
    for (const auto& [node, list] : attribute_all(net, ev)) {
      for (const auto& a : list) {
        ASSERT_GE(a.delta_u, -1e-6) << "network " << t << " node " << node << " "
                                    << a.source.id;
      }
    }
  }
}

TEST(AttributeAll, MatchesSingleTarget) {
  const NetworkSpec net = scenario::learn_scenario_network(3, 100);
  const EvidenceSet ev = scenario::canonical_rows()[1].evidence;
  const auto all = attribute_all(net, ev);
  const auto one = attribute_uncertainty(net, ev, "RC");
  ASSERT_EQ(all.at("RC").size(), one.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(all.at("RC")[i].source.id, one[i].source.id);
    EXPECT_NEAR(all.at("RC")[i].delta_u, one[i].delta_u, 1e-12);
  }
}

TEST(EvidenceJson, RoundTrip) {
  const EvidenceSet ev = scenario::canonical_rows()[3].evidence;
  const EvidenceSet back = evidence_from_json(evidence_to_json(ev, Precision::kFull));
  EXPECT_EQ(back.hard, ev.hard);
  EXPECT_NEAR(back.soft.at("MA").belief(1), ev.soft.at("MA").belief(1), 1e-15);
  EXPECT_NEAR(back.soft.at("MA").uncertainty(), ev.soft.at("MA").uncertainty(), 1e-15);
}

TEST(EvidenceJson, RejectsNonObject) {
  EXPECT_EQ(code_of([] { evidence_from_json(Json::array()); }), ErrorCode::kInvalidEvidence);
  EXPECT_EQ(code_of([] { evidence_from_json(Json{{"hard", {{"CD", 3}}}}); }),
            ErrorCode::kInvalidEvidence);
}

TEST(ResultJson, CarriesIntervalsAndAttribution) {
  const NetworkSpec net = scenario::learn_scenario_network(1, 100);
  const EvidenceSet ev = scenario::canonical_rows()[0].evidence;
  const auto r = infer_subjective(net, ev);
  const auto attr = attribute_all(net, ev);
  const Json j = result_to_json(r, &attr);
  EXPECT_TRUE(j.contains("diagnostics"));
  EXPECT_TRUE(j.contains("attribution"));
  EXPECT_EQ(j.dump().find("NaN"), std::string::npos);
}

}  // namespace
}  // namespace uaml
