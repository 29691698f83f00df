#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "depnet/discrete.hpp"
#include "depnet/learn.hpp"
#include "depnet/model.hpp"
#include "depnet/rng.hpp"

namespace depnet {

/**
 * Bayesian-network structure cost: the sum over nodes of the empirical
 * conditional entropy of the node given its parents, plus the penalty.
 * Rejects cyclic parent graphs.
 */
inline double bn_scost(const Dataset& d, const std::vector<std::vector<int>>& parents,
                       Penalty pen) {
  if (static_cast<int>(parents.size()) != d.space.size())
    throw std::invalid_argument("bn_scost: parent list size mismatch");
  if (!is_acyclic(parents)) throw std::invalid_argument("bn_scost: parent graph cyclic");
  detail::SumAccumulator acc;
  for (int i = 0; i < d.space.size(); ++i) acc.add(scost(d, i, parents[i], pen));
  return acc.value();
}

struct LearnBnResult {
  BayesianNetwork net;
  std::uint64_t scost_evaluations = 0;
  std::vector<double> accepted_costs;
};

/**
 * Hill-climbing structure search from the empty graph over single-edge
 * add / remove / reverse candidates (cyclic candidates skipped), followed
 * by counting CPT estimation. Candidates are scored by the decomposed
 * cost, so only the terms of nodes whose parent sets change are
 * recomputed; each scored candidate counts as one evaluation. Ties are
 * broken by operation (add, remove, reverse) and then by edge order.
 */
inline LearnBnResult learn_bn(const Dataset& d, Penalty pen, bool positivity = true) {
  if (d.rows.empty()) throw std::invalid_argument("empty dataset");
  const int n = d.space.size();

  std::vector<std::vector<std::uint8_t>> edge(n, std::vector<std::uint8_t>(n, 0));
  std::vector<std::vector<int>> parents(n);

  auto sorted_insert = [](std::vector<int>& v, int x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  };
  auto erase_value = [](std::vector<int>& v, int x) {
    v.erase(std::find(v.begin(), v.end(), x));
  };

  std::vector<double> node_cost(n);
  for (int i = 0; i < n; ++i) node_cost[i] = scost(d, i, parents[i], pen);
  double cur_total = 0.0;
  for (double c : node_cost) cur_total += c;

  LearnBnResult out;
  out.accepted_costs.push_back(cur_total);

  enum class Op { Add, Remove, Reverse };
  struct Move {
    Op op;
    int u, v;
    double total;
    double new_u_cost, new_v_cost;  // new_u_cost used only by Reverse
  };

  auto acyclic_with = [&](int add_u, int add_v, int del_u, int del_v) {
    std::vector<std::vector<int>> p = parents;
    if (del_u >= 0) erase_value(p[del_v], del_u);
    if (add_u >= 0) sorted_insert(p[add_v], add_u);
    return is_acyclic(p);
  };

  while (true) {
    bool have_best = false;
    Move best{};

    auto consider = [&](Move m) {
      ++out.scost_evaluations;
      if (!have_best || m.total < best.total) {
        have_best = true;
        best = m;
      }
    };

    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (u == v || edge[u][v]) continue;
        if (!acyclic_with(u, v, -1, -1)) continue;
        std::vector<int> pv = parents[v];
        sorted_insert(pv, u);
        const double cv = scost(d, v, pv, pen);
        consider({Op::Add, u, v, cur_total - node_cost[v] + cv, 0.0, cv});
      }
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (!edge[u][v]) continue;
        std::vector<int> pv = parents[v];
        erase_value(pv, u);
        const double cv = scost(d, v, pv, pen);
        consider({Op::Remove, u, v, cur_total - node_cost[v] + cv, 0.0, cv});
      }
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (!edge[u][v]) continue;
        if (!acyclic_with(v, u, u, v)) continue;
        std::vector<int> pv = parents[v];
        erase_value(pv, u);
        std::vector<int> pu = parents[u];
        sorted_insert(pu, v);
        const double cv = scost(d, v, pv, pen);
        const double cu = scost(d, u, pu, pen);
        consider({Op::Reverse, u, v, cur_total - node_cost[v] - node_cost[u] + cv + cu, cu, cv});
      }

    if (!have_best || !(best.total < cur_total)) break;

    switch (best.op) {
      case Op::Add:
        edge[best.u][best.v] = 1;
        sorted_insert(parents[best.v], best.u);
        node_cost[best.v] = best.new_v_cost;
        break;
      case Op::Remove:
        edge[best.u][best.v] = 0;
        erase_value(parents[best.v], best.u);
        node_cost[best.v] = best.new_v_cost;
        break;
      case Op::Reverse:
        edge[best.u][best.v] = 0;
        edge[best.v][best.u] = 1;
        erase_value(parents[best.v], best.u);
        sorted_insert(parents[best.u], best.v);
        node_cost[best.v] = best.new_v_cost;
        node_cost[best.u] = best.new_u_cost;
        break;
    }
    cur_total = best.total;
    out.accepted_costs.push_back(cur_total);
  }

  out.net.space = d.space;
  out.net.parents = parents;
  out.net.cpts.reserve(n);
  for (int i = 0; i < n; ++i) out.net.cpts.push_back(learn_parameters(d, i, parents[i], positivity));
  validate_bayesnet(out.net);
  return out;
}

/**
 * Ancestral sampling: a topological sort (lowest ready id first), then N
 * independent joint draws firing each node in that order. Deterministic
 * given the seed.
 */
inline Dataset ancestral_sample(const BayesianNetwork& bn, std::uint64_t n_samples,
                                std::uint64_t seed) {
  validate_bayesnet(bn);
  auto order = try_topological_order(bn.parents);
  if (!order) throw std::invalid_argument("ancestral_sample: parent graph cyclic");

  RngStream value_rng(seed, RngUse::ValueDraw);
  Dataset out;
  out.space = bn.space;
  out.rows.reserve(n_samples);
  Assignment state(bn.space.size(), 0);
  for (std::uint64_t t = 0; t < n_samples; ++t) {
    for (int i : *order) {
      const Cpt& cpt = bn.cpts[i];
      const std::uint64_t y = cpt.y_index(state);
      if (!cpt.defined(y))
        throw std::runtime_error("ancestral_sample: undefined CPT row at node " +
                                 std::to_string(i));
      state[i] = value_rng.draw_categorical(cpt.row(y));
    }
    out.rows.push_back(state);
  }
  return out;
}

}  // namespace depnet
