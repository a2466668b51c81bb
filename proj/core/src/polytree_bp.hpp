#ifndef UAML_SRC_POLYTREE_BP_HPP_
#define UAML_SRC_POLYTREE_BP_HPP_

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "uaml/network.hpp"

namespace uaml::detail {

using Vec2 = std::array<double, 2>;

// Pearl's pi/lambda message passing over a binary polytree.  The network is
// given as P(first state | row) per node so callers can perturb single
// parameters cheaply.
class PolytreeBp {
 public:
  // `s` must outlive the engine and pass validate_network.
  explicit PolytreeBp(const Structure& s);

  // soft[i] is the pseudo-child likelihood of the first state, or a negative
  // value when absent.  Returns P(first state | evidence) per node, or an
  // empty vector if the evidence has probability zero.
  std::vector<double> posteriors(const std::vector<std::vector<double>>& p_first,
                                 const std::vector<int>& hard,
                                 const std::vector<double>& soft) const;

 private:
  const Structure* s_;
  // child_slots_[u] = (child, k) with parents(child)[k] == u.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> child_slots_;
};

}  // namespace uaml::detail

#endif  // UAML_SRC_POLYTREE_BP_HPP_
