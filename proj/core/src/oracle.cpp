#include "uaml/oracle.hpp"

#include <algorithm>
#include <thread>

#include "uaml/error.hpp"
#include "uaml/random.hpp"

namespace uaml {

namespace {

// Enumeration over the free (unobserved) nodes of a binary network.
class Enumerator {
 public:
  Enumerator(const Structure& s, const BoundEvidence& ev) : s_(s), ev_(ev) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (ev.hard[i] < 0) free_.push_back(i);
    }
  }

  // p_first[i][row] = P(first state of i | row).  Returns an empty vector if
  // the evidence has zero probability.
  std::vector<double> run(const std::vector<std::vector<double>>& p_first,
                          const std::vector<double>& soft) const {
    const std::size_t n = s_.size();
    std::vector<int> assignment(n);
    for (std::size_t i = 0; i < n; ++i) assignment[i] = std::max(ev_.hard[i], 0);
    std::vector<double> first_mass(n, 0.0);
    double total = 0.0;
    const std::size_t worlds = std::size_t{1} << free_.size();
    for (std::size_t w = 0; w < worlds; ++w) {
      for (std::size_t k = 0; k < free_.size(); ++k) {
        assignment[free_[k]] = static_cast<int>((w >> k) & 1U);
      }
      double joint = 1.0;
      for (std::size_t i = 0; i < n && joint > 0.0; ++i) {
        const double p = p_first[i][s_.row_of(i, assignment)];
        joint *= assignment[i] == 0 ? p : 1.0 - p;
        if (soft[i] >= 0.0) joint *= assignment[i] == 0 ? soft[i] : 1.0 - soft[i];
      }
      if (joint == 0.0) continue;
      total += joint;
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] == 0) first_mass[i] += joint;
      }
    }
    if (!(total > 0.0)) return {};
    for (double& m : first_mass) m /= total;
    return first_mass;
  }

 private:
  const Structure& s_;
  const BoundEvidence& ev_;
  std::vector<std::size_t> free_;
};

void require_enumerable(const Structure& s) {
  if (s.size() > kMaxEnumerationNodes) {
    throw Error(ErrorCode::kTooLarge,
                "enumeration supports at most " +
                    std::to_string(kMaxEnumerationNodes) + " nodes, got " +
                    std::to_string(s.size()));
  }
  const ValidationReport report = validate_network(s);
  for (const auto& issue : report.issues) {
    if (issue.kind == IssueKind::kCycle || issue.kind == IssueKind::kNonBinary) {
      throw Error(ErrorCode::kUnsupportedStructure, issue.message);
    }
  }
}

std::vector<double> soft_likelihoods(const BoundEvidence& ev) {
  std::vector<double> soft(ev.soft_likelihood.size(), -1.0);
  for (std::size_t i = 0; i < soft.size(); ++i) {
    if (ev.soft_likelihood[i]) soft[i] = *ev.soft_likelihood[i];
  }
  return soft;
}

}  // namespace

std::vector<double> enumerate_posterior(const PointNetwork& pn, const EvidenceSet& ev) {
  require_enumerable(pn.structure);
  const ValidationReport report = validate_network(pn);
  if (report.has(IssueKind::kMalformedTable)) require_valid(report);
  const BoundEvidence bound = bind_evidence(pn.structure, ev);
  std::vector<std::vector<double>> p(pn.cpts.size());
  for (std::size_t i = 0; i < pn.cpts.size(); ++i) {
    for (const auto& row : pn.cpts[i]) p[i].push_back(row[0]);
  }
  auto post = Enumerator(pn.structure, bound).run(p, soft_likelihoods(bound));
  if (post.empty()) {
    throw Error(ErrorCode::kInconsistentEvidence, "evidence has zero probability");
  }
  return post;
}

std::map<std::string, OracleSummary> oracle_infer(const NetworkSpec& net,
                                                  const EvidenceSet& ev,
                                                  const OracleConfig& cfg) {
  if (cfg.n_samples < 100) {
    throw Error(ErrorCode::kInvalidEvidence, "oracle needs at least 100 samples");
  }
  const Structure& s = net.structure;
  require_enumerable(s);
  const ValidationReport report = validate_network(net);
  if (report.has(IssueKind::kMalformedTable)) require_valid(report);
  const BoundEvidence bound = bind_evidence(s, ev);

  std::vector<std::size_t> targets;
  if (cfg.targets.empty()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (bound.hard[i] < 0) targets.push_back(i);
    }
  } else {
    for (const auto& name : cfg.targets) targets.push_back(s.index_of(name));
  }

  // Beta parameters per row; dogmatic rows are held at their mean.
  struct BetaInput {
    double mean;
    double a;
    double b;
    bool fixed;
  };
  std::vector<std::vector<BetaInput>> rows(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (const auto& op : net.cpts[i]) {
      const double m = op.projected(0);
      const double str = op.strength();
      rows[i].push_back({m, m * str, (1.0 - m) * str, op.is_dogmatic()});
    }
  }
  std::vector<BetaInput> soft(s.size(), {-1.0, 0.0, 0.0, true});
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!bound.soft_opinion[i]) continue;
    const MessageOpinion m = soft_evidence_message(*bound.soft_opinion[i]);
    soft[i] = {m.p, m.p * m.strength, (1.0 - m.p) * m.strength,
               m.strength >= kMaxStrength};
  }

  const Enumerator enumerator(s, bound);
  const std::size_t n = cfg.n_samples;
  std::vector<double> samples(n * targets.size());
  std::vector<int> failed(n, 0);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<std::vector<double>> p(s.size());
    std::vector<double> lik(s.size(), -1.0);
    for (std::size_t k = begin; k < end; ++k) {
      Rng rng = Rng::substream(cfg.seed, k);
      for (std::size_t i = 0; i < s.size(); ++i) {
        p[i].resize(rows[i].size());
        for (std::size_t r = 0; r < rows[i].size(); ++r) {
          const BetaInput& in = rows[i][r];
          p[i][r] = in.fixed ? in.mean : rng.beta(in.a, in.b);
        }
        if (soft[i].mean >= 0.0) {
          lik[i] = soft[i].fixed ? soft[i].mean : rng.beta(soft[i].a, soft[i].b);
        }
      }
      const auto post = enumerator.run(p, lik);
      if (post.empty()) {
        failed[k] = 1;
        continue;
      }
      for (std::size_t t = 0; t < targets.size(); ++t) {
        samples[k * targets.size() + t] = post[targets[t]];
      }
    }
  };

  unsigned threads = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n / 100 + 1)));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  if (std::any_of(failed.begin(), failed.end(), [](int f) { return f != 0; })) {
    throw Error(ErrorCode::kInconsistentEvidence,
                "evidence has zero probability under a sampled network");
  }

  // Two-pass moments, reduced in sample order.
  std::map<std::string, OracleSummary> out;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += samples[k * targets.size() + t];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = samples[k * targets.size() + t] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n - 1);
    OracleSummary summary;
    summary.mean = mean;
    summary.variance = var;
    summary.opinion = moment_fit(mean, var).opinion;
    out.emplace(s.node(targets[t]).name, summary);
  }
  return out;
}

}  // namespace uaml
