#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "depnet/discrete.hpp"

namespace depnet {

/**
 * Conditional probability table for one node: a distribution over the
 * child variable for each assignment of the input variables.
 *
 * Rows are indexed in mixed radix over `inputs` in listed order (first
 * input most significant). A row may be flagged undefined when it was
 * estimated from data that never realizes its input assignment; querying
 * an undefined row is an error at the point of use.
 */
struct Cpt {
  int child = -1;
  std::vector<int> inputs;
  int child_card = 0;
  std::vector<int> input_cards;
  std::vector<double> entries;        // num_rows() x child_card, row-major
  std::vector<std::uint8_t> row_ok;   // per row; empty means all defined

  std::uint64_t num_rows() const {
    std::uint64_t n = 1;
    for (int c : input_cards) n *= static_cast<std::uint64_t>(c);
    return n;
  }

  bool defined(std::uint64_t y) const { return row_ok.empty() || row_ok[y] != 0; }

  std::span<const double> row(std::uint64_t y) const {
    return {entries.data() + y * static_cast<std::uint64_t>(child_card),
            static_cast<std::size_t>(child_card)};
  }

  // Input-assignment index read from a full joint assignment.
  std::uint64_t y_index(const Assignment& x) const {
    std::uint64_t y = 0;
    for (std::size_t j = 0; j < inputs.size(); ++j)
      y = y * static_cast<std::uint64_t>(input_cards[j]) +
          static_cast<std::uint64_t>(x[inputs[j]]);
    return y;
  }

  // Same, read from a joint state index.
  std::uint64_t y_index_of_state(const VarSpace& space, std::uint64_t idx) const {
    std::uint64_t y = 0;
    for (std::size_t j = 0; j < inputs.size(); ++j)
      y = y * static_cast<std::uint64_t>(input_cards[j]) +
          static_cast<std::uint64_t>(space.digit(idx, inputs[j]));
    return y;
  }

  void validate(const VarSpace& space) const {
    if (child < 0 || child >= space.size())
      throw std::invalid_argument("Cpt: bad child id " + std::to_string(child));
    if (child_card != space.card(child)) throw std::invalid_argument("Cpt: child card mismatch");
    detail::require_known_ids(space, inputs, "Cpt");
    if (inputs.size() != input_cards.size()) throw std::invalid_argument("Cpt: card list size");
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      if (inputs[j] == child) throw std::invalid_argument("Cpt: child listed among inputs");
      if (input_cards[j] != space.card(inputs[j]))
        throw std::invalid_argument("Cpt: input card mismatch");
    }
    const auto rows = num_rows();
    if (entries.size() != rows * static_cast<std::uint64_t>(child_card))
      throw std::invalid_argument("Cpt: wrong entry count");
    if (!row_ok.empty() && row_ok.size() != rows)
      throw std::invalid_argument("Cpt: wrong row flag count");
    for (std::uint64_t y = 0; y < rows; ++y) {
      if (!defined(y)) continue;
      double s = 0.0;
      for (int v = 0; v < child_card; ++v) {
        const double e = entries[y * child_card + v];
        if (!(e >= 0.0)) throw std::invalid_argument("Cpt: negative entry");
        s += e;
      }
      if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("Cpt: row " + std::to_string(y) + " sums to " +
                                    std::to_string(s));
    }
  }
};

inline Cpt make_cpt(const VarSpace& space, int child, std::vector<int> inputs,
                    std::vector<double> entries, std::vector<std::uint8_t> row_ok = {}) {
  Cpt cpt;
  cpt.child = child;
  cpt.inputs = std::move(inputs);
  cpt.child_card = space.card(child);
  cpt.input_cards.reserve(cpt.inputs.size());
  for (int id : cpt.inputs) cpt.input_cards.push_back(space.card(id));
  cpt.entries = std::move(entries);
  cpt.row_ok = std::move(row_ok);
  cpt.validate(space);
  return cpt;
}

/** Node selection weights c_i: non-negative, summing to 1. */
struct SelectionWeights {
  std::vector<double> c;

  SelectionWeights() = default;
  explicit SelectionWeights(std::vector<double> w) : c(std::move(w)) {
    double s = 0.0;
    for (double v : c) {
      if (!(v >= 0.0)) throw std::invalid_argument("SelectionWeights: negative weight");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("SelectionWeights: weights sum to " + std::to_string(s));
  }

  static SelectionWeights uniform(int n) {
    return SelectionWeights(std::vector<double>(n, 1.0 / n));
  }

  int size() const { return static_cast<int>(c.size()); }
};

/** Partial assignment fixing evidence variables: sorted (variable, value) pairs. */
class Evidence {
 public:
  Evidence() = default;

  explicit Evidence(std::vector<std::pair<int, int>> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    for (std::size_t k = 1; k < items_.size(); ++k)
      if (items_[k].first == items_[k - 1].first)
        throw std::invalid_argument("Evidence: variable clamped twice: " +
                                    std::to_string(items_[k].first));
  }

  void validate(const VarSpace& space) const {
    for (auto [var, val] : items_) {
      if (var < 0 || var >= space.size())
        throw std::invalid_argument("Evidence: unknown variable id " + std::to_string(var));
      if (val < 0 || val >= space.card(var))
        throw std::invalid_argument("Evidence: value out of range for variable " +
                                    std::to_string(var));
    }
  }

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }

  bool clamped(int var) const { return value(var).has_value(); }

  std::optional<int> value(int var) const {
    for (auto [v, val] : items_)
      if (v == var) return val;
    return std::nullopt;
  }

  bool consistent(const Assignment& x) const {
    for (auto [var, val] : items_)
      if (x[var] != val) return false;
    return true;
  }

  void apply(Assignment& x) const {
    for (auto [var, val] : items_) x[var] = val;
  }

  const std::vector<std::pair<int, int>>& items() const { return items_; }

 private:
  std::vector<std::pair<int, int>> items_;
};

/**
 * Dependency network: one CPT per node over freely chosen inputs, plus
 * node selection weights. The input graph may be cyclic.
 */
struct DependencyNetwork {
  VarSpace space;
  std::vector<Cpt> nodes;
  SelectionWeights weights;

  void validate() const {
    if (static_cast<int>(nodes.size()) != space.size())
      throw std::invalid_argument("DependencyNetwork: node count mismatch");
    for (int i = 0; i < space.size(); ++i) {
      if (nodes[i].child != i)
        throw std::invalid_argument("DependencyNetwork: node " + std::to_string(i) +
                                    " has child id " + std::to_string(nodes[i].child));
      nodes[i].validate(space);
    }
    if (weights.size() != space.size())
      throw std::invalid_argument("DependencyNetwork: weight count mismatch");
  }
};

/** Bayesian network: acyclic parent sets with one CPT per node. */
struct BayesianNetwork {
  VarSpace space;
  std::vector<std::vector<int>> parents;
  std::vector<Cpt> cpts;
};

/**
 * Kahn topological order, taking the lowest-id ready node first.
 * Returns nullopt when the parent graph has a cycle.
 */
inline std::optional<std::vector<int>> try_topological_order(
    const std::vector<std::vector<int>>& parents) {
  const int n = static_cast<int>(parents.size());
  std::vector<int> missing(n, 0);
  std::vector<std::vector<int>> children(n);
  for (int v = 0; v < n; ++v) {
    missing[v] = static_cast<int>(parents[v].size());
    for (int u : parents[v]) {
      if (u < 0 || u >= n) return std::nullopt;
      children[u].push_back(v);
    }
  }
  std::vector<int> order;
  order.reserve(n);
  std::vector<std::uint8_t> emitted(n, 0);
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int v = 0; v < n; ++v) {
      if (!emitted[v] && missing[v] == 0) {
        pick = v;
        break;
      }
    }
    if (pick < 0) return std::nullopt;  // cycle
    emitted[pick] = 1;
    order.push_back(pick);
    for (int w : children[pick]) --missing[w];
  }
  return order;
}

inline bool is_acyclic(const std::vector<std::vector<int>>& parents) {
  return try_topological_order(parents).has_value();
}

inline void validate_bayesnet(const BayesianNetwork& bn) {
  if (static_cast<int>(bn.parents.size()) != bn.space.size() ||
      static_cast<int>(bn.cpts.size()) != bn.space.size())
    throw std::invalid_argument("BayesianNetwork: node count mismatch");
  if (!is_acyclic(bn.parents)) throw std::invalid_argument("BayesianNetwork: parent graph cyclic");
  for (int i = 0; i < bn.space.size(); ++i) {
    if (bn.cpts[i].child != i || bn.cpts[i].inputs != bn.parents[i])
      throw std::invalid_argument("BayesianNetwork: CPT/parent mismatch at node " +
                                  std::to_string(i));
    bn.cpts[i].validate(bn.space);
  }
}

/**
 * CPT holding p's full conditional of node i, with inputs X_{-i} in
 * ascending id order. Rows with p(x_{-i}) = 0 come back flagged undefined.
 */
inline Cpt full_conditional_cpt(const JointTable& p, int i) {
  const VarSpace& space = p.space();
  if (i < 0 || i >= space.size())
    throw std::invalid_argument("full_conditional_cpt: bad node id");
  std::vector<int> rest;
  rest.reserve(space.size() - 1);
  for (int j = 0; j < space.size(); ++j)
    if (j != i) rest.push_back(j);

  Cpt cpt;
  cpt.child = i;
  cpt.inputs = rest;
  cpt.child_card = space.card(i);
  for (int id : rest) cpt.input_cards.push_back(space.card(id));
  const auto rows = cpt.num_rows();
  cpt.entries.assign(rows * static_cast<std::uint64_t>(cpt.child_card), 0.0);
  cpt.row_ok.assign(rows, 0);

  const auto stride = space.stride(i);
  const int card = space.card(i);
  const auto groups = space.total_states() / static_cast<std::uint64_t>(card);
  for (std::uint64_t a = 0; a < groups; ++a) {
    const std::uint64_t base = (a / stride) * (stride * card) + (a % stride);
    const std::uint64_t y = cpt.y_index_of_state(space, base);
    double s = 0.0;
    for (int v = 0; v < card; ++v) s += p[base + stride * v];
    if (s > 0.0) {
      cpt.row_ok[y] = 1;
      for (int v = 0; v < card; ++v) cpt.entries[y * card + v] = p[base + stride * v] / s;
    }
  }
  return cpt;
}

}  // namespace depnet
