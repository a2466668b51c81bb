#ifndef UAML_OPINION_HPP_
#define UAML_OPINION_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "uaml/json.hpp"

namespace uaml {

// Upper clamp on Dirichlet strength.  An opinion at this strength is
// "dogmatic": its uncertainty is K / kMaxStrength and displays as 0.
inline constexpr double kMaxStrength = 1e9;

// Tolerance on sum(beliefs) + uncertainty == 1.
inline constexpr double kOpinionSumTolerance = 1e-12;

struct EvidenceCounts {
  std::vector<double> counts;

  double total() const;
};

struct DirichletParams {
  std::vector<double> alpha;

  double strength() const;
};

// Belief masses + uncertainty + base rate over a K-valued domain (K >= 2).
//
// Under the uniform prior used throughout, an opinion is the same object as
// a Dirichlet distribution: alpha_x = s * (b_x + a_x * u) with s = K / u.
class Opinion {
 public:
  // Validates the invariants and throws Error(kInvalidOpinion) otherwise.
  // An empty base rate means uniform 1/K.
  Opinion(std::vector<double> beliefs, double uncertainty,
          std::vector<double> base_rate = {});

  static Opinion vacuous(std::size_t k);

  // Binary opinion with projected probability `p` for the first value and
  // Dirichlet strength `strength`.  Requires strength >= 1 / min(p, 1 - p)
  // so that both beliefs are nonnegative.
  static Opinion binary(double p, double strength);

  std::size_t size() const { return beliefs_.size(); }
  const std::vector<double>& beliefs() const { return beliefs_; }
  double belief(std::size_t i) const { return beliefs_[i]; }
  double uncertainty() const { return uncertainty_; }
  const std::vector<double>& base_rate() const { return base_rate_; }

  // s = K / u, clamped to kMaxStrength.
  double strength() const;
  bool is_dogmatic() const { return strength() >= kMaxStrength; }

  // b_x + a_x * u for a single value.
  double projected(std::size_t i) const;

  friend bool operator==(const Opinion&, const Opinion&) = default;

 private:
  std::vector<double> beliefs_;
  double uncertainty_;
  std::vector<double> base_rate_;
};

Opinion opinion_from_counts(const EvidenceCounts& counts);
EvidenceCounts opinion_to_counts(const Opinion& op);

Opinion opinion_from_dirichlet(const DirichletParams& params);
DirichletParams opinion_to_dirichlet(const Opinion& op);

struct Projection {
  std::vector<double> probabilities;
  std::vector<double> variances;
};

// Projected probabilities P_x = b_x + a_x u and Dirichlet marginal variances
// P_x (1 - P_x) / (s + 1).  Dogmatic opinions have zero variance.
Projection project(const Opinion& op);

struct MomentFit {
  Opinion opinion;
  double raw_strength = 0.0;  // m (1 - m) / v - 1 before clamping
  bool mean_clamped = false;
  bool strength_clamped = false;
};

// Binary opinion matching a beta mean and variance.  The strength is clamped
// to [max(2, 1 / min(m, 1 - m)), kMaxStrength]; the lower bound keeps both
// Dirichlet parameters >= 1 so beliefs stay nonnegative with a uniform base
// rate.  Means outside (0, 1) are clamped to [1e-9, 1 - 1e-9].
MomentFit moment_fit(double mean, double variance);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Equal-tailed interval of the Beta(alpha_x, s - alpha_x) marginal.
Interval beta_interval(const Opinion& op, std::size_t value_index,
                       double level);

// JSON emission: kDisplay rounds to 6 significant digits and shows dogmatic
// uncertainty as 0; kFull keeps round-trip precision.
enum class Precision { kDisplay, kFull };

double round_significant(double value, int digits = 6);

Json to_json(const Opinion& op, Precision precision = Precision::kDisplay);

// Accepts records whose masses sum to 1 within 1e-4 (rounded output of
// to_json) and renormalizes them.
Opinion opinion_from_json(const Json& j);

}  // namespace uaml

#endif  // UAML_OPINION_HPP_
