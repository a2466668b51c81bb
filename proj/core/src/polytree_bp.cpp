#include "polytree_bp.hpp"

#include <optional>

namespace uaml::detail {

namespace {

Vec2 normalized(Vec2 v) {
  const double total = v[0] + v[1];
  if (total > 0.0) {
    v[0] /= total;
    v[1] /= total;
  }
  return v;
}

// Per-query state: memoized messages for one evaluation.
class Pass {
 public:
  Pass(const Structure& s,
       const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& slots,
       const std::vector<std::vector<double>>& p_first, const std::vector<int>& hard,
       const std::vector<double>& soft)
      : s_(s), slots_(slots), p_(p_first), hard_(hard), soft_(soft) {
    const std::size_t n = s.size();
    pi_total_.resize(n);
    lambda_total_.resize(n);
    pi_msg_.resize(n);
    lambda_msg_.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
      pi_msg_[x].resize(s.parents(x).size());
      lambda_msg_[x].resize(s.parents(x).size());
    }
  }

  Vec2 belief(std::size_t x) {
    const Vec2 pi = pi_total(x);
    const Vec2 lambda = lambda_total(x);
    return {pi[0] * lambda[0], pi[1] * lambda[1]};
  }

 private:
  Vec2 evidence_lambda(std::size_t x) const {
    if (hard_[x] == 0) return {1.0, 0.0};
    if (hard_[x] == 1) return {0.0, 1.0};
    if (soft_[x] >= 0.0) return {soft_[x], 1.0 - soft_[x]};
    return {1.0, 1.0};
  }

  // Evidence times lambda messages from all children except `skip`.
  Vec2 lambda_except(std::size_t x, std::size_t skip_child) {
    Vec2 acc = evidence_lambda(x);
    for (const auto& [c, k] : slots_[x]) {
      if (c == skip_child) continue;
      const Vec2 m = lambda_msg(c, k);
      acc[0] *= m[0];
      acc[1] *= m[1];
    }
    return acc;
  }

  Vec2 lambda_total(std::size_t x) {
    if (!lambda_total_[x]) lambda_total_[x] = lambda_except(x, s_.size());
    return *lambda_total_[x];
  }

  Vec2 pi_total(std::size_t x) {
    if (pi_total_[x]) return *pi_total_[x];
    const auto& parents = s_.parents(x);
    const std::size_t m = parents.size();
    std::vector<Vec2> incoming(m);
    for (std::size_t k = 0; k < m; ++k) incoming[k] = pi_msg(x, k);
    Vec2 acc{0.0, 0.0};
    const std::size_t rows = std::size_t{1} << m;
    for (std::size_t r = 0; r < rows; ++r) {
      double w = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        w *= incoming[k][(r >> (m - 1 - k)) & 1U];
      }
      const double p = p_[x][r];
      acc[0] += w * p;
      acc[1] += w * (1.0 - p);
    }
    pi_total_[x] = acc;
    return acc;
  }

  // pi message from parents(x)[k] to x.
  Vec2 pi_msg(std::size_t x, std::size_t k) {
    if (pi_msg_[x][k]) return *pi_msg_[x][k];
    const std::size_t u = s_.parents(x)[k];
    const Vec2 pi = pi_total(u);
    const Vec2 lambda = lambda_except(u, x);
    const Vec2 msg = normalized({pi[0] * lambda[0], pi[1] * lambda[1]});
    pi_msg_[x][k] = msg;
    return msg;
  }

  // lambda message from x to parents(x)[k].
  Vec2 lambda_msg(std::size_t x, std::size_t k) {
    if (lambda_msg_[x][k]) return *lambda_msg_[x][k];
    const auto& parents = s_.parents(x);
    const std::size_t m = parents.size();
    std::vector<Vec2> incoming(m);
    for (std::size_t j = 0; j < m; ++j) {
      if (j != k) incoming[j] = pi_msg(x, j);
    }
    const Vec2 lambda = lambda_total(x);
    Vec2 acc{0.0, 0.0};
    const std::size_t rows = std::size_t{1} << m;
    for (std::size_t r = 0; r < rows; ++r) {
      double w = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != k) w *= incoming[j][(r >> (m - 1 - j)) & 1U];
      }
      const double p = p_[x][r];
      const std::size_t u_state = (r >> (m - 1 - k)) & 1U;
      acc[u_state] += w * (p * lambda[0] + (1.0 - p) * lambda[1]);
    }
    const Vec2 msg = normalized(acc);
    lambda_msg_[x][k] = msg;
    return msg;
  }

  const Structure& s_;
  const std::vector<std::vector<std::pair<std::size_t, std::size_t>>>& slots_;
  const std::vector<std::vector<double>>& p_;
  const std::vector<int>& hard_;
  const std::vector<double>& soft_;

  std::vector<std::optional<Vec2>> pi_total_;
  std::vector<std::optional<Vec2>> lambda_total_;
  std::vector<std::vector<std::optional<Vec2>>> pi_msg_;
  std::vector<std::vector<std::optional<Vec2>>> lambda_msg_;
};

}  // namespace

PolytreeBp::PolytreeBp(const Structure& s) : s_(&s), child_slots_(s.size()) {
  for (std::size_t x = 0; x < s.size(); ++x) {
    const auto& parents = s.parents(x);
    for (std::size_t k = 0; k < parents.size(); ++k) {
      child_slots_[parents[k]].emplace_back(x, k);
    }
  }
}

std::vector<double> PolytreeBp::posteriors(
    const std::vector<std::vector<double>>& p_first, const std::vector<int>& hard,
    const std::vector<double>& soft) const {
  Pass pass(*s_, child_slots_, p_first, hard, soft);
  std::vector<double> out(s_->size());
  for (std::size_t x = 0; x < s_->size(); ++x) {
    const Vec2 b = pass.belief(x);
    const double total = b[0] + b[1];
    if (!(total > 0.0)) return {};
    out[x] = b[0] / total;
  }
  return out;
}

}  // namespace uaml::detail
