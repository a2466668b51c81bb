#include "uaml/opinion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <string>

#include "uaml/error.hpp"
#include "uaml/special_functions.hpp"

namespace uaml {

namespace {

constexpr double kMeanEpsilon = 1e-9;
// Slack for masses that land a rounding error below zero.
constexpr double kNegativeSlack = 1e-12;

double sum_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

double EvidenceCounts::total() const { return sum_of(counts); }

double DirichletParams::strength() const { return sum_of(alpha); }

Opinion::Opinion(std::vector<double> beliefs, double uncertainty,
                 std::vector<double> base_rate)
    : beliefs_(std::move(beliefs)),
      uncertainty_(uncertainty),
      base_rate_(std::move(base_rate)) {
  const std::size_t k = beliefs_.size();
  if (k < 2) {
    throw Error(ErrorCode::kDomainTooSmall,
                "opinion domain must have at least 2 values, got " +
                    std::to_string(k));
  }
  if (base_rate_.empty()) {
    base_rate_.assign(k, 1.0 / static_cast<double>(k));
  }
  if (base_rate_.size() != k) {
    throw Error(ErrorCode::kInvalidOpinion,
                "base rate has " + std::to_string(base_rate_.size()) +
                    " entries for a domain of " + std::to_string(k));
  }
  for (double& b : beliefs_) {
    if (b < 0.0 && b > -kNegativeSlack) b = 0.0;
    if (!(b >= 0.0 && b <= 1.0)) {
      throw Error(ErrorCode::kInvalidOpinion,
                  "belief mass outside [0, 1]: " + std::to_string(b));
    }
  }
  if (!(uncertainty_ >= 0.0 && uncertainty_ <= 1.0)) {
    throw Error(ErrorCode::kInvalidOpinion,
                "uncertainty outside [0, 1]: " + std::to_string(uncertainty_));
  }
  const double total = sum_of(beliefs_) + uncertainty_;
  if (std::fabs(total - 1.0) > kOpinionSumTolerance) {
    throw Error(ErrorCode::kInvalidOpinion,
                "beliefs plus uncertainty sum to " + std::to_string(total));
  }
  for (double a : base_rate_) {
    if (!(a >= 0.0)) {
      throw Error(ErrorCode::kInvalidOpinion, "negative base rate");
    }
  }
  if (std::fabs(sum_of(base_rate_) - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidOpinion, "base rate does not sum to 1");
  }
}

Opinion Opinion::vacuous(std::size_t k) {
  return Opinion(std::vector<double>(k, 0.0), 1.0);
}

Opinion Opinion::binary(double p, double strength) {
  strength = std::min(strength, kMaxStrength);
  const double b0 = p - 1.0 / strength;
  const double b1 = 1.0 - p - 1.0 / strength;
  if (b0 < -1e-9 || b1 < -1e-9) {
    throw Error(ErrorCode::kInvalidOpinion,
                "strength " + std::to_string(strength) +
                    " too small for projected probability " + std::to_string(p));
  }
  if (b0 >= 0.0 && b1 >= 0.0) return Opinion({b0, b1}, 2.0 / strength);
  // Fold the rounding residue into uncertainty so the masses sum to 1.
  const double c0 = std::max(b0, 0.0);
  const double c1 = std::max(b1, 0.0);
  return Opinion({c0, c1}, std::clamp(1.0 - c0 - c1, 0.0, 1.0));
}

double Opinion::strength() const {
  if (uncertainty_ <= 0.0) return kMaxStrength;
  const double s = static_cast<double>(size()) / uncertainty_;
  // K / (K / S_MAX) can land an ulp below S_MAX.
  return s >= kMaxStrength * (1.0 - 1e-12) ? kMaxStrength : s;
}

double Opinion::projected(std::size_t i) const {
  return beliefs_[i] + base_rate_[i] * uncertainty_;
}

Opinion opinion_from_counts(const EvidenceCounts& counts) {
  const std::size_t k = counts.counts.size();
  if (k < 2) {
    throw Error(ErrorCode::kDomainTooSmall,
                "opinion domain must have at least 2 values, got " +
                    std::to_string(k));
  }
  for (double c : counts.counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::kInvalidCounts,
                  "evidence counts must be finite and nonnegative, got " +
                      std::to_string(c));
    }
  }
  const double s = counts.total() + static_cast<double>(k);
  std::vector<double> beliefs(k);
  for (std::size_t i = 0; i < k; ++i) beliefs[i] = counts.counts[i] / s;
  return Opinion(std::move(beliefs), static_cast<double>(k) / s);
}

EvidenceCounts opinion_to_counts(const Opinion& op) {
  DirichletParams d = opinion_to_dirichlet(op);
  for (double& a : d.alpha) a = std::max(a - 1.0, 0.0);
  return {std::move(d.alpha)};
}

Opinion opinion_from_dirichlet(const DirichletParams& params) {
  const std::size_t k = params.alpha.size();
  if (k < 2) {
    throw Error(ErrorCode::kDomainTooSmall,
                "opinion domain must have at least 2 values");
  }
  EvidenceCounts counts;
  counts.counts.reserve(k);
  for (double a : params.alpha) {
    if (!(a >= 1.0)) {
      throw Error(ErrorCode::kInvalidOpinion,
                  "Dirichlet parameter below 1 has no uniform-base-rate "
                  "opinion: " + std::to_string(a));
    }
    counts.counts.push_back(a - 1.0);
  }
  return opinion_from_counts(counts);
}

DirichletParams opinion_to_dirichlet(const Opinion& op) {
  const double s = op.strength();
  DirichletParams d;
  d.alpha.reserve(op.size());
  for (std::size_t i = 0; i < op.size(); ++i) {
    d.alpha.push_back(s * op.projected(i));
  }
  return d;
}

Projection project(const Opinion& op) {
  Projection out;
  const double s = op.strength();
  const bool dogmatic = op.is_dogmatic();
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double p = op.projected(i);
    out.probabilities.push_back(p);
    out.variances.push_back(dogmatic ? 0.0 : p * (1.0 - p) / (s + 1.0));
  }
  return out;
}

MomentFit moment_fit(double mean, double variance) {
  MomentFit fit{Opinion::vacuous(2)};
  if (!(mean >= kMeanEpsilon)) {
    mean = kMeanEpsilon;
    fit.mean_clamped = true;
  } else if (!(mean <= 1.0 - kMeanEpsilon)) {
    mean = 1.0 - kMeanEpsilon;
    fit.mean_clamped = true;
  }
  const double lower =
      std::min(std::max(2.0, 1.0 / std::min(mean, 1.0 - mean)), kMaxStrength);
  double s = kMaxStrength;
  if (variance > 0.0 && std::isfinite(variance)) {
    fit.raw_strength = mean * (1.0 - mean) / variance - 1.0;
    s = fit.raw_strength;
    if (s < lower) {
      s = lower;
      fit.strength_clamped = true;
    } else if (s > kMaxStrength) {
      s = kMaxStrength;
      fit.strength_clamped = true;
    }
  } else {
    fit.raw_strength = kMaxStrength;
  }
  fit.opinion = Opinion::binary(mean, s);
  return fit;
}

Interval beta_interval(const Opinion& op, std::size_t value_index,
                       double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::kInvalidLevel,
                "interval level must lie in (0, 1), got " + std::to_string(level));
  }
  const double p = op.projected(value_index);
  if (op.is_dogmatic()) return {p, p};
  const double s = op.strength();
  const double a = p * s;
  const double b = s - a;
  return {beta_quantile(a, b, 0.5 * (1.0 - level)),
          beta_quantile(a, b, 0.5 * (1.0 + level))};
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

Json to_json(const Opinion& op, Precision precision) {
  Json j;
  if (precision == Precision::kFull) {
    j["beliefs"] = op.beliefs();
    j["uncertainty"] = op.uncertainty();
    j["base_rate"] = op.base_rate();
    return j;
  }
  std::vector<double> beliefs;
  double u = op.uncertainty();
  if (op.is_dogmatic()) {
    for (std::size_t i = 0; i < op.size(); ++i) {
      beliefs.push_back(round_significant(op.projected(i)));
    }
    u = 0.0;
  } else {
    for (double b : op.beliefs()) beliefs.push_back(round_significant(b));
    u = round_significant(u);
  }
  std::vector<double> base;
  for (double a : op.base_rate()) base.push_back(round_significant(a));
  j["beliefs"] = beliefs;
  j["uncertainty"] = u;
  j["base_rate"] = base;
  return j;
}

Opinion opinion_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("beliefs") || !j.contains("uncertainty")) {
    throw Error(ErrorCode::kInvalidOpinion,
                "opinion record needs 'beliefs' and 'uncertainty'");
  }
  std::vector<double> beliefs;
  double u = 0.0;
  std::vector<double> base;
  try {
    beliefs = j.at("beliefs").get<std::vector<double>>();
    u = j.at("uncertainty").get<double>();
    if (j.contains("base_rate")) base = j.at("base_rate").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidOpinion,
                std::string("malformed opinion record: ") + e.what());
  }
  const double total = sum_of(beliefs) + u;
  if (!(std::fabs(total - 1.0) <= 1e-4)) {
    throw Error(ErrorCode::kInvalidOpinion,
                "beliefs plus uncertainty sum to " + std::to_string(total));
  }
  for (double& b : beliefs) b /= total;
  u /= total;
  if (!base.empty()) {
    const double bsum = sum_of(base);
    if (bsum > 0.0) {
      for (double& a : base) a /= bsum;
    }
  }
  // Division can leave a residue of a few ulps; absorb it into u.
  u = std::clamp(1.0 - sum_of(beliefs), 0.0, 1.0);
  return Opinion(std::move(beliefs), u, std::move(base));
}

}  // namespace uaml
