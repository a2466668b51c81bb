#include "test_support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace uaml::testing {

namespace {

std::string node_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "N%02zu", i);
  return buf;
}

// Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
  static constexpr std::size_t kOrder = 20;
  std::array<double, kOrder> x{};
  std::array<double, kOrder> w{};

  GaussLegendre() {
    const double pi = std::acos(-1.0);
    for (std::size_t i = 0; i < kOrder; ++i) {
      double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (kOrder + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (std::size_t k = 1; k <= kOrder; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / static_cast<double>(k);
        }
        dp = kOrder * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-15) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

}  // namespace

PointNetwork random_polytree(Rng& rng, const RandomNetworkOptions& opts) {
  const std::size_t span = opts.max_nodes - opts.min_nodes + 1;
  const std::size_t n = opts.min_nodes + static_cast<std::size_t>(rng.next_u64() % span);
  std::vector<NodeSpec> nodes(n);
  std::vector<std::size_t> n_parents(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i].name = node_name(i);
    nodes[i].states = {"t", "f"};
  }
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    bool j_to_i = rng.bernoulli(0.5);
    if (j_to_i && n_parents[i] >= opts.max_parents) j_to_i = false;
    if (!j_to_i && n_parents[j] >= opts.max_parents) j_to_i = true;
    if (j_to_i) {
      nodes[i].parents.push_back(nodes[j].name);
      ++n_parents[i];
    } else {
      nodes[j].parents.push_back(nodes[i].name);
      ++n_parents[j];
    }
  }
  PointNetwork pn;
  pn.structure = Structure(std::move(nodes));
  pn.cpts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < pn.structure.row_count(i); ++r) {
      const double p = opts.p_lo + (opts.p_hi - opts.p_lo) * rng.uniform();
      pn.cpts[i].push_back({p, 1.0 - p});
    }
  }
  return pn;
}

NetworkSpec random_opinion_network(const PointNetwork& pn, Rng& rng, double min_strength,
                                   double max_strength) {
  NetworkSpec net{pn.structure, {}};
  net.cpts.resize(pn.cpts.size());
  for (std::size_t i = 0; i < pn.cpts.size(); ++i) {
    for (const auto& row : pn.cpts[i]) {
      const double p = row[0];
      const double floor = 1.0 / std::min(p, 1.0 - p);
      const double s = std::max(floor, min_strength + (max_strength - min_strength) * rng.uniform());
      net.cpts[i].push_back(Opinion::binary(p, s));
    }
  }
  return net;
}

EvidenceSet random_hard_evidence(const PointNetwork& pn, Rng& rng, double p_observe) {
  const auto record = sample_instantiations(pn, 1, rng.next_u64()).front();
  EvidenceSet ev;
  const Structure& s = pn.structure;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (rng.bernoulli(p_observe)) {
      ev.hard[s.node(i).name] = s.node(i).states[static_cast<std::size_t>(record.states[i])];
    }
  }
  return ev;
}

void add_random_soft_evidence(const Structure& s, Rng& rng, std::size_t count, EvidenceSet& ev) {
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = static_cast<std::size_t>(rng.next_u64() % s.size());
    const std::string& name = s.node(i).name;
    if (ev.hard.count(name) != 0 || ev.soft.count(name) != 0) continue;
    const double u = 0.02 + 0.5 * rng.uniform();
    const double b0 = (1.0 - u) * rng.uniform();
    ev.soft.emplace(name, Opinion({b0, 1.0 - u - b0}, u));
  }
}

double integrate(const std::function<double(double)>& f, double a, double b, std::size_t panels) {
  static const GaussLegendre gl;
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    for (std::size_t k = 0; k < GaussLegendre::kOrder; ++k) {
      total += 0.5 * h * gl.w[k] * f(mid + 0.5 * h * gl.x[k]);
    }
  }
  return total;
}

}  // namespace uaml::testing
