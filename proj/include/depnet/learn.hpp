#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "depnet/discrete.hpp"
#include "depnet/model.hpp"

namespace depnet {

enum class Penalty { None, Aic, Mdl };

inline const char* penalty_name(Penalty p) {
  switch (p) {
    case Penalty::None: return "none";
    case Penalty::Aic: return "aic";
    case Penalty::Mdl: return "mdl";
  }
  return "?";
}

/**
 * Regularization term R_i for a CPT with k = (child_card - 1) * input_states
 * degrees of freedom: AIC k/N, MDL (k/2N) ln N. input_states is 1 for an
 * empty input set.
 */
inline double penalty(Penalty pen, int child_card, std::uint64_t input_states, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("penalty: N must be >= 1");
  const double k = static_cast<double>(child_card - 1) * static_cast<double>(input_states);
  switch (pen) {
    case Penalty::None: return 0.0;
    case Penalty::Aic: return k / static_cast<double>(n);
    case Penalty::Mdl:
      return k / (2.0 * static_cast<double>(n)) * std::log(static_cast<double>(n));
  }
  return 0.0;
}

/**
 * Sufficient statistics for one node and one candidate input set:
 * joint counts N_{x_i y_i} and row totals N_{y_i}.
 */
struct SuffStats {
  int child_card = 0;
  std::uint64_t input_states = 0;
  std::vector<std::uint64_t> joint;   // y * child_card + x
  std::vector<std::uint64_t> totals;  // per y
  std::uint64_t n = 0;
};

inline SuffStats count_stats(const Dataset& d, int child, const std::vector<int>& inputs) {
  if (d.rows.empty()) throw std::invalid_argument("empty dataset");
  detail::require_known_ids(d.space, inputs, "count_stats");
  for (int id : inputs)
    if (id == child) throw std::invalid_argument("count_stats: child listed among inputs");

  SuffStats st;
  st.child_card = d.space.card(child);
  st.input_states = 1;
  std::vector<std::uint64_t> cards;
  for (int id : inputs) {
    cards.push_back(static_cast<std::uint64_t>(d.space.card(id)));
    st.input_states *= cards.back();
  }
  st.joint.assign(st.input_states * st.child_card, 0);
  st.totals.assign(st.input_states, 0);
  st.n = d.rows.size();

  for (const auto& row : d.rows) {
    std::uint64_t y = 0;
    for (std::size_t j = 0; j < inputs.size(); ++j)
      y = y * cards[j] + static_cast<std::uint64_t>(row[inputs[j]]);
    ++st.joint[y * st.child_card + row[child]];
    ++st.totals[y];
  }
  return st;
}

/**
 * Counting estimate theta_i(x_i|y_i) = N_{x_i y_i} / N_{y_i}. With
 * positivity on, every zero count is replaced by one before normalizing,
 * so all rows are defined and strictly positive (an all-zero row becomes
 * uniform). With positivity off, rows with N_{y_i} = 0 are flagged
 * undefined.
 */
inline Cpt learn_parameters(const Dataset& d, int child, const std::vector<int>& inputs,
                            bool positivity) {
  const SuffStats st = count_stats(d, child, inputs);
  Cpt cpt;
  cpt.child = child;
  cpt.inputs = inputs;
  cpt.child_card = st.child_card;
  for (int id : inputs) cpt.input_cards.push_back(d.space.card(id));
  cpt.entries.assign(st.joint.size(), 0.0);
  cpt.row_ok.assign(st.input_states, 1);

  for (std::uint64_t y = 0; y < st.input_states; ++y) {
    double total = 0.0;
    for (int v = 0; v < st.child_card; ++v) {
      double c = static_cast<double>(st.joint[y * st.child_card + v]);
      if (positivity && c == 0.0) c = 1.0;
      cpt.entries[y * st.child_card + v] = c;
      total += c;
    }
    if (total > 0.0) {
      for (int v = 0; v < st.child_card; ++v) cpt.entries[y * st.child_card + v] /= total;
    } else {
      cpt.row_ok[y] = 0;
    }
  }
  return cpt;
}

/**
 * Structure cost of one node: empirical conditional entropy of the child
 * given the inputs, from raw counts, plus the penalty. Zero-count cells
 * contribute nothing to the entropy term.
 */
inline double scost(const SuffStats& st, Penalty pen) {
  detail::SumAccumulator acc;
  const double n = static_cast<double>(st.n);
  for (std::uint64_t y = 0; y < st.input_states; ++y) {
    const double ny = static_cast<double>(st.totals[y]);
    if (ny == 0.0) continue;
    for (int v = 0; v < st.child_card; ++v) {
      const double c = static_cast<double>(st.joint[y * st.child_card + v]);
      if (c > 0.0) acc.add(-(c / n) * std::log(c / ny));
    }
  }
  return acc.value() + penalty(pen, st.child_card, st.input_states, st.n);
}

inline double scost(const Dataset& d, int child, const std::vector<int>& inputs, Penalty pen) {
  return scost(count_stats(d, child, inputs), pen);
}

struct NodeSearchResult {
  std::vector<int> inputs;
  std::uint64_t evaluations = 0;       // candidate scost evaluations
  std::vector<double> accepted_costs;  // cost after the baseline and each accepted move
};

/**
 * Greedy input search for one node, starting from the empty set and
 * evaluating all single-add and single-remove candidates per round. Moves
 * only on strict improvement; among equal minimizers, additions come
 * before removals and lower variable ids first. With guard on, the input
 * set falls back to X_{-i} when even that scores better than the search
 * result.
 */
inline NodeSearchResult learn_structure_node(const Dataset& d, int child, Penalty pen,
                                             bool guard = false) {
  const int n = d.space.size();
  std::vector<std::uint8_t> in_set(n, 0);
  std::vector<int> current;
  auto current_sorted = [&] {
    std::vector<int> ids;
    for (int j = 0; j < n; ++j)
      if (in_set[j]) ids.push_back(j);
    return ids;
  };

  NodeSearchResult res;
  double cur_cost = scost(d, child, current, pen);
  res.accepted_costs.push_back(cur_cost);

  while (true) {
    double best_cost = 0.0;
    int best_var = -1;
    bool best_is_add = true, have_best = false;

    auto consider = [&](int j, bool is_add) {
      std::vector<int> cand;
      for (int k = 0; k < n; ++k) {
        if (k == child) continue;
        const bool member = is_add ? (in_set[k] || k == j) : (in_set[k] && k != j);
        if (member) cand.push_back(k);
      }
      const double c = scost(d, child, cand, pen);
      ++res.evaluations;
      if (!have_best || c < best_cost) {
        have_best = true;
        best_cost = c;
        best_var = j;
        best_is_add = is_add;
      }
    };

    for (int j = 0; j < n; ++j)
      if (j != child && !in_set[j]) consider(j, true);
    for (int j = 0; j < n; ++j)
      if (in_set[j]) consider(j, false);

    if (!have_best || !(best_cost < cur_cost)) break;
    in_set[best_var] = best_is_add ? 1 : 0;
    cur_cost = best_cost;
    res.accepted_costs.push_back(cur_cost);
  }

  res.inputs = current_sorted();

  if (guard) {
    std::vector<int> full;
    for (int j = 0; j < n; ++j)
      if (j != child) full.push_back(j);
    if (res.inputs != full && cur_cost > scost(d, child, full, pen)) res.inputs = full;
  }
  return res;
}

struct LearnDnResult {
  DependencyNetwork net;
  std::uint64_t scost_evaluations = 0;
};

/**
 * Full dependency-network learning: independent greedy input search plus
 * counting CPT estimation per node. Nodes do not interact, so the result
 * does not depend on the order they are processed in.
 */
inline LearnDnResult learn_dn(const Dataset& d, Penalty pen, bool positivity = true,
                              SelectionWeights weights = {}, bool guard = false) {
  if (d.rows.empty()) throw std::invalid_argument("empty dataset");
  const int n = d.space.size();
  LearnDnResult out;
  out.net.space = d.space;
  out.net.weights = weights.size() == n ? std::move(weights) : SelectionWeights::uniform(n);
  out.net.nodes.reserve(n);
  for (int i = 0; i < n; ++i) {
    NodeSearchResult search = learn_structure_node(d, i, pen, guard);
    out.scost_evaluations += search.evaluations;
    out.net.nodes.push_back(learn_parameters(d, i, search.inputs, positivity));
  }
  out.net.validate();
  return out;
}

}  // namespace depnet
