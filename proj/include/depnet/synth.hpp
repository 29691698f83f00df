#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "depnet/discrete.hpp"
#include "depnet/model.hpp"
#include "depnet/rng.hpp"

namespace depnet {

/**
 * Ferromagnetic Ising grid over binary variables with spin map
 * {0 -> -1, 1 -> +1}: p(x) proportional to
 *   exp(J * sum over grid edges of s_i s_j + h * sum_i s_i).
 * Variable ids are row-major: id = r * cols + c. Edges join horizontal and
 * vertical neighbors, no wraparound.
 */
struct IsingSpec {
  int rows = 0;
  int cols = 0;
  double coupling = 0.4;
  double field = 0.0;
};

inline std::vector<std::pair<int, int>> ising_edges(const IsingSpec& spec) {
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < spec.rows; ++r)
    for (int c = 0; c < spec.cols; ++c) {
      const int id = r * spec.cols + c;
      if (c + 1 < spec.cols) edges.emplace_back(id, id + 1);
      if (r + 1 < spec.rows) edges.emplace_back(id, id + spec.cols);
    }
  return edges;
}

/** Exact Ising joint by full enumeration. Grids above 26 sites are rejected. */
inline JointTable ising_joint(const IsingSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw std::invalid_argument("ising_joint: empty grid");
  const int n = spec.rows * spec.cols;
  if (n > 26)
    throw std::invalid_argument("ising_joint guard: " + std::to_string(n) +
                                " sites exceeds the exact-table limit of 26");
  const auto edges = ising_edges(spec);
  const VarSpace space = VarSpace::binary(n);
  const auto total = space.total_states();

  std::vector<double> energy(total);
  double max_energy = -std::numeric_limits<double>::infinity();
  for (std::uint64_t x = 0; x < total; ++x) {
    // Variable 0 is the most significant bit of the state index.
    double e = 0.0;
    auto spin = [&](int id) { return ((x >> (n - 1 - id)) & 1ULL) ? 1.0 : -1.0; };
    for (const auto& [a, b] : edges) e += spec.coupling * spin(a) * spin(b);
    if (spec.field != 0.0)
      for (int id = 0; id < n; ++id) e += spec.field * spin(id);
    energy[x] = e;
    max_energy = std::max(max_energy, e);
  }
  std::vector<double> w(total);
  for (std::uint64_t x = 0; x < total; ++x) w[x] = std::exp(energy[x] - max_energy);
  return JointTable::from_unnormalized(space, std::move(w));
}

/**
 * Random binary Bayesian network: a uniformly shuffled topological order,
 * a random subset of exactly `edges` forward pairs, and CPT rows drawn
 * from a symmetric Dirichlet(1). Deterministic given the seed.
 */
struct RandomBnSpec {
  int nodes = 0;
  int edges = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<double> dirichlet1_row(RngStream& rng, int k) {
  std::vector<double> row(k);
  double s = 0.0;
  for (int v = 0; v < k; ++v) {
    row[v] = -std::log(1.0 - rng.next_double());
    s += row[v];
  }
  for (double& e : row) e /= s;
  return row;
}

}  // namespace detail

inline BayesianNetwork random_bn(const RandomBnSpec& spec) {
  if (spec.nodes < 1) throw std::invalid_argument("random_bn: need at least one node");
  const int n = spec.nodes;
  const std::uint64_t max_edges = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (spec.edges < 0 || static_cast<std::uint64_t>(spec.edges) > max_edges)
    throw std::invalid_argument("random_bn: " + std::to_string(spec.edges) +
                                " edges infeasible for " + std::to_string(n) + " nodes");

  RngStream structure_rng(spec.seed, RngUse::Structure);
  RngStream value_rng(spec.seed, RngUse::ValueDraw);

  // Random topological order by Fisher-Yates.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const auto j = structure_rng.next_below(static_cast<std::uint64_t>(i) + 1);
    std::swap(order[i], order[static_cast<int>(j)]);
  }

  // Random m-subset of the forward pairs, again by partial Fisher-Yates.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(max_edges);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(order[a], order[b]);
  for (int k = 0; k < spec.edges; ++k) {
    const auto j = k + structure_rng.next_below(pairs.size() - static_cast<std::uint64_t>(k));
    std::swap(pairs[k], pairs[static_cast<std::size_t>(j)]);
  }

  BayesianNetwork bn;
  bn.space = VarSpace::binary(n);
  bn.parents.assign(n, {});
  for (int k = 0; k < spec.edges; ++k) bn.parents[pairs[k].second].push_back(pairs[k].first);
  for (auto& p : bn.parents) std::sort(p.begin(), p.end());

  bn.cpts.reserve(n);
  for (int i = 0; i < n; ++i) {
    Cpt cpt;
    cpt.child = i;
    cpt.inputs = bn.parents[i];
    cpt.child_card = 2;
    cpt.input_cards.assign(bn.parents[i].size(), 2);
    const auto rows = cpt.num_rows();
    cpt.entries.reserve(rows * 2);
    for (std::uint64_t y = 0; y < rows; ++y) {
      const auto row = detail::dirichlet1_row(value_rng, 2);
      cpt.entries.insert(cpt.entries.end(), row.begin(), row.end());
    }
    bn.cpts.push_back(std::move(cpt));
  }
  validate_bayesnet(bn);
  return bn;
}

/** Dense product-form joint of a Bayesian network. */
inline JointTable bn_joint(const BayesianNetwork& bn) {
  validate_bayesnet(bn);
  JointTable::check_dense(bn.space);
  const auto total = bn.space.total_states();
  std::vector<double> w(total, 1.0);
  for (std::uint64_t x = 0; x < total; ++x) {
    for (int i = 0; i < bn.space.size(); ++i) {
      const Cpt& cpt = bn.cpts[i];
      const auto y = cpt.y_index_of_state(bn.space, x);
      if (!cpt.defined(y))
        throw std::runtime_error("bn_joint: undefined CPT row at node " + std::to_string(i));
      w[x] *= cpt.row(y)[bn.space.digit(x, i)];
    }
  }
  return JointTable::from_unnormalized(bn.space, std::move(w));
}

/** N i.i.d. draws from a dense joint via inverse CDF over the state index. */
inline Dataset sample_joint(const JointTable& p, std::uint64_t n_samples, std::uint64_t seed) {
  std::vector<double> cum(p.size());
  double s = 0.0;
  for (std::uint64_t x = 0; x < p.size(); ++x) {
    s += p[x];
    cum[x] = s;
  }
  RngStream value_rng(seed, RngUse::ValueDraw);
  Dataset out;
  out.space = p.space();
  out.rows.reserve(n_samples);
  for (std::uint64_t t = 0; t < n_samples; ++t) {
    const double u = value_rng.next_double();
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    auto idx = static_cast<std::uint64_t>(it - cum.begin());
    if (idx >= p.size()) idx = p.size() - 1;
    while (idx > 0 && p[idx] <= 0.0) --idx;  // never land on a zero-mass state
    out.rows.push_back(p.space().assignment_of(idx));
  }
  return out;
}

}  // namespace depnet
