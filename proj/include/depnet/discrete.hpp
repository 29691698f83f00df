#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace depnet {

using Assignment = std::vector<int>;

// Largest dense probability table this library will materialize.
inline constexpr std::uint64_t kMaxDenseStates = std::uint64_t{1} << 26;

namespace detail {

// Neumaier-compensated summation; keeps normalization checks meaningful
// even for tables with millions of entries.
inline double stable_sum(std::span<const double> xs) {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

class SumAccumulator {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

}  // namespace detail

/**
 * Ordered set of discrete variables with ids 0..n-1, cardinality >= 2 each.
 *
 * Joint states are indexed in mixed radix with variable 0 as the most
 * significant digit:
 *   index(x) = x_0 * (c_1 * ... * c_{n-1}) + ... + x_{n-2} * c_{n-1} + x_{n-1}.
 */
class VarSpace {
 public:
  VarSpace() = default;

  explicit VarSpace(std::vector<int> cards) : cards_(std::move(cards)) {
    if (cards_.empty()) throw std::invalid_argument("VarSpace: no variables");
    for (int c : cards_) {
      if (c < 2) throw std::invalid_argument("VarSpace: cardinality must be >= 2");
    }
    strides_.assign(cards_.size(), 1);
    total_ = 1;
    for (int i = static_cast<int>(cards_.size()) - 1; i >= 0; --i) {
      strides_[i] = total_;
      const auto c = static_cast<std::uint64_t>(cards_[i]);
      if (total_ > std::numeric_limits<std::uint64_t>::max() / c)
        throw std::invalid_argument("VarSpace: state count overflows 64-bit index");
      total_ *= c;
    }
  }

  static VarSpace binary(int n) { return VarSpace(std::vector<int>(n, 2)); }

  int size() const { return static_cast<int>(cards_.size()); }
  int card(int i) const { return cards_.at(i); }
  const std::vector<int>& cards() const { return cards_; }
  std::uint64_t total_states() const { return total_; }
  std::uint64_t stride(int i) const { return strides_.at(i); }

  int digit(std::uint64_t index, int i) const {
    return static_cast<int>((index / strides_[i]) % static_cast<std::uint64_t>(cards_[i]));
  }

  bool valid(const Assignment& x) const {
    if (static_cast<int>(x.size()) != size()) return false;
    for (int i = 0; i < size(); ++i)
      if (x[i] < 0 || x[i] >= cards_[i]) return false;
    return true;
  }

  std::uint64_t index_of(const Assignment& x) const {
    if (!valid(x)) throw std::invalid_argument("VarSpace: assignment out of range");
    std::uint64_t idx = 0;
    for (int i = 0; i < size(); ++i) idx += static_cast<std::uint64_t>(x[i]) * strides_[i];
    return idx;
  }

  Assignment assignment_of(std::uint64_t index) const {
    Assignment x(cards_.size());
    for (int i = 0; i < size(); ++i) x[i] = digit(index, i);
    return x;
  }

  // Space over a subset of variables, reindexed 0..k-1 in ascending id order.
  VarSpace subspace(const std::vector<int>& ids) const {
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> cards;
    cards.reserve(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
      if (sorted[k] < 0 || sorted[k] >= size())
        throw std::invalid_argument("VarSpace: unknown variable id " + std::to_string(sorted[k]));
      if (k > 0 && sorted[k] == sorted[k - 1])
        throw std::invalid_argument("VarSpace: duplicate variable id " + std::to_string(sorted[k]));
      cards.push_back(cards_[sorted[k]]);
    }
    return VarSpace(std::move(cards));
  }

  bool operator==(const VarSpace& o) const { return cards_ == o.cards_; }
  bool operator!=(const VarSpace& o) const { return !(*this == o); }

 private:
  std::vector<int> cards_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t total_ = 0;
};

/**
 * Dense normalized probability table over a VarSpace.
 *
 * Entries are indexed by the space's mixed-radix encoding. Construction
 * enforces non-negativity, normalization to 1 +/- 1e-12, and the dense
 * size guard (kMaxDenseStates).
 */
class JointTable {
 public:
  JointTable() = default;

  JointTable(VarSpace space, std::vector<double> probs)
      : space_(std::move(space)), probs_(std::move(probs)) {
    check_dense(space_);
    if (probs_.size() != space_.total_states())
      throw std::invalid_argument("JointTable: wrong number of entries");
    for (double v : probs_) {
      if (!(v >= 0.0)) throw std::invalid_argument("JointTable: negative entry");
    }
    const double s = detail::stable_sum(probs_);
    if (std::abs(s - 1.0) > 1e-12)
      throw std::invalid_argument("JointTable: entries sum to " + std::to_string(s));
  }

  static void check_dense(const VarSpace& space) {
    if (space.total_states() > kMaxDenseStates)
      throw std::invalid_argument("dense table guard: " +
                                  std::to_string(space.total_states()) + " states exceeds 2^26");
  }

  static JointTable uniform(const VarSpace& space) {
    check_dense(space);
    const auto n = space.total_states();
    return JointTable(space, std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  // Normalizes a non-negative weight vector. Rejects all-zero weights.
  static JointTable from_unnormalized(VarSpace space, std::vector<double> w) {
    check_dense(space);
    if (w.size() != space.total_states())
      throw std::invalid_argument("JointTable: wrong number of entries");
    const double s = detail::stable_sum(w);
    if (!(s > 0.0)) throw std::invalid_argument("JointTable: total mass is zero");
    for (double& v : w) v /= s;
    return JointTable(std::move(space), std::move(w));
  }

  const VarSpace& space() const { return space_; }
  std::uint64_t size() const { return probs_.size(); }
  double operator[](std::uint64_t idx) const { return probs_[idx]; }
  double at(std::uint64_t idx) const { return probs_.at(idx); }
  double prob(const Assignment& x) const { return probs_[space_.index_of(x)]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  VarSpace space_;
  std::vector<double> probs_;
};

/** Rows of discrete observations over a VarSpace. */
struct Dataset {
  VarSpace space;
  std::vector<Assignment> rows;

  Dataset() = default;
  Dataset(VarSpace s, std::vector<Assignment> r) : space(std::move(s)), rows(std::move(r)) {
    for (const auto& row : rows)
      if (!space.valid(row)) throw std::invalid_argument("Dataset: row out of range");
  }

  std::uint64_t size() const { return rows.size(); }
};

/**
 * Conditional table p(T|G): one row per assignment of the given variables,
 * each row a distribution over assignments of the target variables.
 * Rows whose conditioning event has zero probability are flagged undefined.
 *
 * Row and column indices are mixed radix over the variable lists in the
 * order they were passed (first variable most significant).
 */
struct ConditionalTable {
  std::vector<int> target;
  std::vector<int> given;
  std::uint64_t target_states = 0;
  std::uint64_t given_states = 0;
  std::vector<double> entries;        // given_states x target_states, row-major
  std::vector<std::uint8_t> defined;  // per row

  std::span<const double> row(std::uint64_t g) const {
    return {entries.data() + g * target_states, target_states};
  }
  bool row_defined(std::uint64_t g) const { return defined[g] != 0; }
};

namespace detail {

inline void require_known_ids(const VarSpace& space, const std::vector<int>& ids,
                              const char* what) {
  for (int id : ids)
    if (id < 0 || id >= space.size())
      throw std::invalid_argument(std::string(what) + ": unknown variable id " +
                                  std::to_string(id));
  std::vector<int> s = ids;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw std::invalid_argument(std::string(what) + ": duplicate variable id");
}

// Mixed-radix index of the listed variables' digits within a joint state.
inline std::uint64_t project_index(const VarSpace& space, std::uint64_t joint_idx,
                                   const std::vector<int>& ids) {
  std::uint64_t out = 0;
  for (int id : ids)
    out = out * static_cast<std::uint64_t>(space.card(id)) +
          static_cast<std::uint64_t>(space.digit(joint_idx, id));
  return out;
}

inline std::uint64_t state_count(const VarSpace& space, const std::vector<int>& ids) {
  std::uint64_t n = 1;
  for (int id : ids) n *= static_cast<std::uint64_t>(space.card(id));
  return n;
}

}  // namespace detail

/** Empirical distribution of a dataset: probs[x] = count(x) / N. */
inline JointTable empirical_distribution(const Dataset& d) {
  if (d.rows.empty()) throw std::invalid_argument("empty dataset");
  JointTable::check_dense(d.space);
  std::vector<double> w(d.space.total_states(), 0.0);
  for (const auto& row : d.rows) w[d.space.index_of(row)] += 1.0;
  const auto n = static_cast<double>(d.rows.size());
  for (double& v : w) v /= n;
  return JointTable(d.space, std::move(w));
}

/** Marginal of p over the listed variables (ascending id order in the result). */
inline JointTable marginal(const JointTable& p, const std::vector<int>& ids) {
  if (ids.empty()) throw std::invalid_argument("marginal: empty variable set");
  detail::require_known_ids(p.space(), ids, "marginal");
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  VarSpace sub = p.space().subspace(sorted);
  std::vector<double> w(sub.total_states(), 0.0);
  const auto total = p.space().total_states();
  for (std::uint64_t x = 0; x < total; ++x)
    w[detail::project_index(p.space(), x, sorted)] += p[x];
  return JointTable::from_unnormalized(std::move(sub), std::move(w));
}

/** Conditional table p(T|G). T and G must be disjoint; T nonempty. */
inline ConditionalTable conditional(const JointTable& p, const std::vector<int>& target,
                                    const std::vector<int>& given) {
  if (target.empty()) throw std::invalid_argument("conditional: empty target set");
  detail::require_known_ids(p.space(), target, "conditional");
  detail::require_known_ids(p.space(), given, "conditional");
  for (int t : target)
    for (int g : given)
      if (t == g)
        throw std::invalid_argument("conditional: target and given overlap at variable " +
                                    std::to_string(t));

  ConditionalTable ct;
  ct.target = target;
  ct.given = given;
  ct.target_states = detail::state_count(p.space(), target);
  ct.given_states = detail::state_count(p.space(), given);
  ct.entries.assign(ct.given_states * ct.target_states, 0.0);
  ct.defined.assign(ct.given_states, 0);

  std::vector<double> row_mass(ct.given_states, 0.0);
  const auto total = p.space().total_states();
  for (std::uint64_t x = 0; x < total; ++x) {
    const auto g = detail::project_index(p.space(), x, given);
    const auto t = detail::project_index(p.space(), x, target);
    ct.entries[g * ct.target_states + t] += p[x];
    row_mass[g] += p[x];
  }
  for (std::uint64_t g = 0; g < ct.given_states; ++g) {
    if (row_mass[g] > 0.0) {
      ct.defined[g] = 1;
      for (std::uint64_t t = 0; t < ct.target_states; ++t)
        ct.entries[g * ct.target_states + t] /= row_mass[g];
    }
  }
  return ct;
}

/** Entropy (nats) of p's marginal over the listed variables. 0 ln 0 := 0. */
inline double entropy(const JointTable& p, const std::vector<int>& ids) {
  const JointTable m = marginal(p, ids);
  detail::SumAccumulator acc;
  for (std::uint64_t i = 0; i < m.size(); ++i)
    if (m[i] > 0.0) acc.add(-m[i] * std::log(m[i]));
  return acc.value();
}

inline double entropy(const JointTable& p) {
  std::vector<int> all(p.space().size());
  for (int i = 0; i < p.space().size(); ++i) all[i] = i;
  return entropy(p, all);
}

/** Conditional entropy H(T|G) = H(T u G) - H(G), in nats. */
inline double conditional_entropy(const JointTable& p, const std::vector<int>& target,
                                  const std::vector<int>& given) {
  if (target.empty()) throw std::invalid_argument("conditional_entropy: empty target set");
  for (int t : target)
    for (int g : given)
      if (t == g)
        throw std::invalid_argument("conditional_entropy: target and given overlap at variable " +
                                    std::to_string(t));
  if (given.empty()) return entropy(p, target);
  std::vector<int> both = target;
  both.insert(both.end(), given.begin(), given.end());
  return entropy(p, both) - entropy(p, given);
}

/**
 * KL(p||q) in nats, with 0 ln(0/q) := 0. Returns +infinity when p puts
 * mass where q has none.
 */
inline double kl_divergence(const JointTable& p, const JointTable& q) {
  if (p.space() != q.space())
    throw std::invalid_argument("kl_divergence: mismatched variable spaces");
  detail::SumAccumulator acc;
  for (std::uint64_t x = 0; x < p.size(); ++x) {
    if (p[x] <= 0.0) continue;
    if (q[x] <= 0.0) return std::numeric_limits<double>::infinity();
    acc.add(p[x] * std::log(p[x] / q[x]));
  }
  return acc.value();
}

}  // namespace depnet
