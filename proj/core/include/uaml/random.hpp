#ifndef UAML_RANDOM_HPP_
#define UAML_RANDOM_HPP_

#include <array>
#include <cstdint>

namespace uaml {

// xoshiro256** seeded through splitmix64.  Every stochastic routine in the
// toolkit derives an independent substream per work item from
// (seed, stream index), so results never depend on how work is scheduled.
// Distribution sampling is implemented here rather than through <random>
// distributions, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Substream for work item `index` of a run seeded with `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on the open interval (0, 1).
  double uniform_open();

  double normal();

  // Gamma(shape, 1).  Marsaglia-Tsang squeeze for shape >= 1; shape < 1
  // uses Gamma(shape + 1) * U^(1 / shape).
  double gamma(double shape);

  // Beta(a, b) as X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b).
  double beta(double a, double b);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace uaml

#endif  // UAML_RANDOM_HPP_
