#ifndef UAML_ORACLE_HPP_
#define UAML_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uaml/inference.hpp"
#include "uaml/network.hpp"

namespace uaml {

inline constexpr std::size_t kMaxEnumerationNodes = 20;

// Exact P(first state | evidence) per node by summing the joint over every
// assignment consistent with the hard evidence, weighted by soft-evidence
// likelihoods.  Works on any binary DAG with at most kMaxEnumerationNodes
// nodes.
std::vector<double> enumerate_posterior(const PointNetwork& pn, const EvidenceSet& ev);

struct OracleConfig {
  std::size_t n_samples = 10000;
  std::uint64_t seed = 1;
  std::vector<std::string> targets;  // empty: every latent node
  unsigned threads = 0;              // 0: hardware concurrency
};

struct OracleSummary {
  double mean = 0.0;
  double variance = 0.0;
  Opinion opinion = Opinion::vacuous(2);
};

// Monte-Carlo reference: per sample, draw every CPT row from its Dirichlet
// and every soft likelihood from its beta, enumerate the exact posterior and
// collect the targets.  Moments are matched with moment_fit.  Sample i uses
// substream (seed, i); output does not depend on the thread count.
std::map<std::string, OracleSummary> oracle_infer(const NetworkSpec& net,
                                                  const EvidenceSet& ev,
                                                  const OracleConfig& cfg);

}  // namespace uaml

#endif  // UAML_ORACLE_HPP_
