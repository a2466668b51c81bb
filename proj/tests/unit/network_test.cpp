#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "uaml/error.hpp"
#include "uaml/network.hpp"
#include "uaml/scenario.hpp"

namespace uaml {
namespace {

const std::vector<std::string> kTf{"t", "f"};

Structure make(std::vector<NodeSpec> nodes) { return Structure(std::move(nodes)); }

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

TEST(Structure, RowsEnumerateSortedParents) {
  const Structure s = make({{"Z", kTf, {}}, {"A", kTf, {}}, {"C", kTf, {"Z", "A"}}});
  const std::size_t c = *s.find("C");
  EXPECT_EQ(s.row_count(c), 4u);
  EXPECT_EQ(s.node(c).parents, (std::vector<std::string>{"A", "Z"}));
  EXPECT_EQ(s.row_key(c, 0), "t,t");
  EXPECT_EQ(s.row_key(c, 1), "t,f");
  EXPECT_EQ(s.row_key(c, 2), "f,t");
  EXPECT_EQ(*s.row_from_key(c, "f,f"), 3u);
  // Z = t, A = f selects row "f,t".
  const std::vector<int> assignment{0, 1, 0};
  EXPECT_EQ(s.row_of(c, assignment), 2u);
  EXPECT_EQ(s.row_parent_states(c, 2), (std::vector<int>{1, 0}));
}

TEST(Structure, RejectsDuplicatesAndUnknownParents) {
  EXPECT_THROW(make({{"A", kTf, {}}, {"A", kTf, {}}}), Error);
  EXPECT_THROW(make({{"A", kTf, {"B"}}}), Error);
}

TEST(Structure, IndexOfNamesUnknownNode) {
  const Structure s = make({{"A", kTf, {}}});
  try {
    s.index_of("Q");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidEvidence);
    EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos);
  }
}

TEST(Validate, GroundTruthIsPolytree) {
  EXPECT_TRUE(validate_network(scenario::build_ground_truth()).ok());
}

TEST(Validate, SingleNode) {
  EXPECT_TRUE(validate_network(make({{"A", kTf, {}}})).ok());
}

TEST(Validate, ExtraEdgeBreaksPolytree) {
  PointNetwork gt = scenario::build_ground_truth();
  std::vector<NodeSpec> nodes = gt.structure.nodes();
  for (auto& n : nodes) {
    if (n.name == "RB") n.parents.push_back("CD");
  }
  const ValidationReport r = validate_network(Structure(nodes));
  EXPECT_TRUE(r.has(IssueKind::kNotPolytree));
  EXPECT_THROW(require_valid(r), Error);
  EXPECT_EQ(code_of([&] { require_valid(r); }), ErrorCode::kUnsupportedStructure);
}

TEST(Validate, Cycle) {
  const ValidationReport r =
      validate_network(make({{"A", kTf, {"B"}}, {"B", kTf, {"A"}}}));
  EXPECT_TRUE(r.has(IssueKind::kCycle));
}

TEST(Validate, NonBinary) {
  const ValidationReport r = validate_network(make({{"A", {"x", "y", "z"}, {}}}));
  EXPECT_TRUE(r.has(IssueKind::kNonBinary));
}

TEST(Validate, MalformedTable) {
  PointNetwork pn{make({{"A", kTf, {}}}), {{{0.5, 0.6}}}};
  EXPECT_TRUE(validate_network(pn).has(IssueKind::kMalformedTable));
  pn.cpts = {{}};
  EXPECT_TRUE(validate_network(pn).has(IssueKind::kMalformedTable));
}

TEST(Learn, CountsPerRow) {
  const Structure s = make({{"A", kTf, {}}, {"B", kTf, {"A"}}});
  std::vector<InstantiationRecord> recs;
  for (int i = 0; i < 90; ++i) recs.push_back({{0, i < 80 ? 0 : 1}});
  for (int i = 0; i < 10; ++i) recs.push_back({{1, 1}});
  const NetworkSpec net = learn_conditionals(s, recs);
  EXPECT_NEAR(net.cpts[0][0].belief(0), 90.0 / 102, 1e-15);
  EXPECT_NEAR(net.cpts[0][0].uncertainty(), 2.0 / 102, 1e-15);
  EXPECT_NEAR(net.cpts[1][0].belief(0), 80.0 / 92, 1e-15);
  EXPECT_NEAR(net.cpts[1][1].belief(1), 10.0 / 12, 1e-15);
}

TEST(Learn, UnmatchedRowsAreVacuous) {
  const Structure s = make({{"A", kTf, {}}, {"B", kTf, {"A"}}});
  const std::vector<InstantiationRecord> recs{{{0, 0}}, {{0, 1}}};
  const NetworkSpec net = learn_conditionals(s, recs);
  EXPECT_EQ(net.cpts[1][1], Opinion::vacuous(2));
  const NetworkSpec empty = learn_conditionals(s, {});
  EXPECT_EQ(empty.cpts[0][0], Opinion::vacuous(2));
}

TEST(Learn, EvidenceIsConserved) {
  const PointNetwork gt = scenario::build_ground_truth();
  const auto recs = sample_instantiations(gt, 250, 3);
  const NetworkSpec net = learn_conditionals(gt.structure, recs);
  for (std::size_t i = 0; i < gt.structure.size(); ++i) {
    double total = 0.0;
    for (const Opinion& op : net.cpts[i]) total += opinion_to_counts(op).counts[0] +
                                                   opinion_to_counts(op).counts[1];
    EXPECT_NEAR(total, 250.0, 1e-9) << gt.structure.node(i).name;
  }
}

TEST(Sample, Deterministic) {
  const PointNetwork gt = scenario::build_ground_truth();
  EXPECT_EQ(sample_instantiations(gt, 500, 9), sample_instantiations(gt, 500, 9));
  EXPECT_NE(sample_instantiations(gt, 500, 9), sample_instantiations(gt, 500, 10));
  EXPECT_TRUE(sample_instantiations(gt, 0, 1).empty());
}

TEST(Sample, PrefixStable) {
  const PointNetwork gt = scenario::build_ground_truth();
  const auto big = sample_instantiations(gt, 200, 4);
  const auto small = sample_instantiations(gt, 50, 4);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i], big[i]);
}

TEST(Sample, MarginalsMatchGroundTruth) {
  const PointNetwork gt = scenario::build_ground_truth();
  const auto recs = sample_instantiations(gt, 100000, 1);
  const std::size_t cd = *gt.structure.find("CD");
  const std::size_t ma = *gt.structure.find("MA");
  double n_cd = 0, n_ma = 0;
  for (const auto& r : recs) {
    n_cd += r.states[cd] == 0;
    n_ma += r.states[ma] == 0;
  }
  EXPECT_NEAR(n_cd / 1e5, 0.9, 0.005);
  EXPECT_NEAR(n_ma / 1e5, 0.9018, 0.005);
}

TEST(Sample, LearnedConditionalsConverge) {
  const PointNetwork gt = scenario::build_ground_truth();
  const auto recs = sample_instantiations(gt, 100000, 2);
  const NetworkSpec net = learn_conditionals(gt.structure, recs);
  for (std::size_t i = 0; i < gt.structure.size(); ++i) {
    for (std::size_t r = 0; r < gt.structure.row_count(i); ++r) {
      if (opinion_to_counts(net.cpts[i][r]).total() < 1000) continue;
      EXPECT_NEAR(net.cpts[i][r].projected(0), gt.p_first(i, r), 0.01)
          << gt.structure.node(i).name << " " << gt.structure.row_key(i, r);
    }
  }
}

TEST(Sample, SparseMarchRow) {
  // The (neg, neg) disposition row of MA sees about 9 of 100 records.
  const PointNetwork gt = scenario::build_ground_truth();
  const std::size_t ma = *gt.structure.find("MA");
  const std::size_t row = *gt.structure.row_from_key(ma, "neg,neg");
  double total = 0.0, u = 0.0;
  const int seeds = 200;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto recs = sample_instantiations(gt, 100, seed);
    const NetworkSpec net = learn_conditionals(gt.structure, recs);
    total += opinion_to_counts(net.cpts[ma][row]).total();
    u += net.cpts[ma][row].uncertainty();
  }
  EXPECT_NEAR(total / seeds, 9.0, 0.7);
  EXPECT_GT(u / seeds, 0.12);
}

TEST(NetworkJson, PointRoundTrip) {
  const PointNetwork gt = scenario::build_ground_truth();
  const PointNetwork back = point_network_from_json(network_to_json(gt));
  ASSERT_EQ(back.structure.size(), gt.structure.size());
  for (std::size_t i = 0; i < gt.structure.size(); ++i) {
    EXPECT_EQ(back.structure.node(i).parents, gt.structure.node(i).parents);
    EXPECT_EQ(back.cpts[i], gt.cpts[i]);
  }
}

TEST(NetworkJson, SpecRoundTrip) {
  const PointNetwork gt = scenario::build_ground_truth();
  const NetworkSpec net = learn_conditionals(gt.structure, sample_instantiations(gt, 100, 1));
  const NetworkSpec back = spec_from_json(network_to_json(net, Precision::kFull));
  for (std::size_t i = 0; i < net.cpts.size(); ++i) {
    for (std::size_t r = 0; r < net.cpts[i].size(); ++r) {
      EXPECT_NEAR(back.cpts[i][r].belief(0), net.cpts[i][r].belief(0), 1e-15);
      EXPECT_NEAR(back.cpts[i][r].uncertainty(), net.cpts[i][r].uncertainty(), 1e-15);
    }
  }
  const LoadedNetwork loaded = network_from_json(network_to_json(net));
  EXPECT_TRUE(std::holds_alternative<NetworkSpec>(loaded));
}

TEST(NetworkJson, DataFileLoads) {
  const Json j = read_json_file(std::string(UAML_DATA_DIR) + "/route_ground_truth.json");
  EXPECT_TRUE(std::holds_alternative<PointNetwork>(network_from_json(j)));
}

TEST(NetworkJson, MissingRowIsMalformed) {
  Json j = network_to_json(scenario::build_ground_truth());
  j["nodes"][2]["cpt"].erase("neg");
  EXPECT_THROW(network_from_json(j), Error);
}

TEST(RecordsJson, RoundTrip) {
  const PointNetwork gt = scenario::build_ground_truth();
  const auto recs = sample_instantiations(gt, 20, 5);
  EXPECT_EQ(records_from_json(gt.structure, records_to_json(gt.structure, recs)), recs);
}

TEST(RecordsJson, Errors) {
  const PointNetwork gt = scenario::build_ground_truth();
  Json j = records_to_json(gt.structure, sample_instantiations(gt, 2, 5));
  Json bad_state = j;
  bad_state[0]["CD"] = "maybe";
  EXPECT_EQ(code_of([&] { records_from_json(gt.structure, bad_state); }),
            ErrorCode::kMalformedRecord);
  Json missing = j;
  missing[1].erase("RA");
  EXPECT_EQ(code_of([&] { records_from_json(gt.structure, missing); }),
            ErrorCode::kMalformedRecord);
  Json unknown = j;
  unknown[0]["ZZ"] = "t";
  EXPECT_EQ(code_of([&] { records_from_json(gt.structure, unknown); }),
            ErrorCode::kMalformedRecord);
}

TEST(Dogmatic, MeanNetworkRoundTrip) {
  const PointNetwork gt = scenario::build_ground_truth();
  const PointNetwork back = mean_network(dogmatic_network(gt));
  for (std::size_t i = 0; i < gt.structure.size(); ++i) {
    for (std::size_t r = 0; r < gt.cpts[i].size(); ++r) {
      EXPECT_NEAR(back.p_first(i, r), gt.p_first(i, r), 1e-12);
    }
  }
}

}  // namespace
}  // namespace uaml
