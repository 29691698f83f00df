#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "depnet/discrete.hpp"
#include "depnet/model.hpp"

namespace depnet {

namespace detail {

// Visit joint states grouped by x_{-i}: f(base) is called once per group
// with the state whose digit for variable i is zero; the group members are
// base + v * stride for v in [0, card_i).
template <class F>
void for_each_conditional_group(const VarSpace& space, int i, F&& f) {
  const auto stride = space.stride(i);
  const auto card = static_cast<std::uint64_t>(space.card(i));
  const auto groups = space.total_states() / card;
  for (std::uint64_t a = 0; a < groups; ++a)
    f((a / stride) * (stride * card) + (a % stride));
}

inline std::span<const double> checked_row(const Cpt& cpt, std::uint64_t y) {
  if (!cpt.defined(y))
    throw std::runtime_error("undefined CPT row: node " + std::to_string(cpt.child) +
                             ", input assignment index " + std::to_string(y));
  return cpt.row(y);
}

// out += weight * (firing transition applied to p).  Firing node i maps a
// distribution to p(x_{-i}) * theta_i(x_i | y_i), its m-projection onto the
// node's full-conditional manifold.
inline void accumulate_fired(const std::vector<double>& p, const VarSpace& space, const Cpt& cpt,
                             double weight, std::vector<double>& out) {
  const int i = cpt.child;
  const auto stride = space.stride(i);
  const int card = space.card(i);
  for_each_conditional_group(space, i, [&](std::uint64_t base) {
    double s = 0.0;
    for (int v = 0; v < card; ++v) s += p[base + stride * v];
    if (s <= 0.0) return;
    const auto row = checked_row(cpt, cpt.y_index_of_state(space, base));
    for (int v = 0; v < card; ++v) out[base + stride * v] += weight * s * row[v];
  });
}

}  // namespace detail

/**
 * m-projection of p onto the full-conditional manifold E(theta_i):
 * result(x) = p(x_{-i}) * theta_i(x_i | y_i).
 */
inline JointTable m_project(const JointTable& p, const Cpt& cpt) {
  cpt.validate(p.space());
  std::vector<double> out(p.size(), 0.0);
  detail::accumulate_fired(p.probs(), p.space(), cpt, 1.0, out);
  return JointTable::from_unnormalized(p.space(), std::move(out));
}

/**
 * KL(p || E(theta_i)) = <ln(p(X_i|X_{-i}) / theta_i(X_i|Y_i))>_p, the
 * divergence from p to its m-projection. +infinity when theta has a zero
 * where p's conditional is positive.
 */
inline double kl_to_manifold(const JointTable& p, const Cpt& cpt) {
  cpt.validate(p.space());
  const int i = cpt.child;
  const auto stride = p.space().stride(i);
  const int card = p.space().card(i);
  detail::SumAccumulator acc;
  bool support_violation = false;
  detail::for_each_conditional_group(p.space(), i, [&](std::uint64_t base) {
    if (support_violation) return;
    double s = 0.0;
    for (int v = 0; v < card; ++v) s += p[base + stride * v];
    if (s <= 0.0) return;
    const auto row = detail::checked_row(cpt, cpt.y_index_of_state(p.space(), base));
    for (int v = 0; v < card; ++v) {
      const double pv = p[base + stride * v];
      if (pv <= 0.0) continue;
      if (row[v] <= 0.0) {
        support_violation = true;
        return;
      }
      acc.add(pv * (std::log(pv / s) - std::log(row[v])));
    }
  });
  if (support_violation) return std::numeric_limits<double>::infinity();
  return acc.value();
}

/**
 * Full-conditional divergence
 *   FC(p||q) = sum_i c_i <ln(p(X_i|X_{-i}) / q(X_i|X_{-i}))>_p.
 * Finite iff q covers p's support.
 */
inline double fc_divergence(const JointTable& p, const JointTable& q,
                            const SelectionWeights& weights) {
  if (p.space() != q.space())
    throw std::invalid_argument("fc_divergence: mismatched variable spaces");
  if (weights.size() != p.space().size())
    throw std::invalid_argument("fc_divergence: weight count mismatch");
  detail::SumAccumulator total;
  for (int i = 0; i < p.space().size(); ++i) {
    const double ci = weights.c[i];
    if (ci <= 0.0) continue;
    const auto stride = p.space().stride(i);
    const int card = p.space().card(i);
    detail::SumAccumulator acc;
    bool support_violation = false;
    detail::for_each_conditional_group(p.space(), i, [&](std::uint64_t base) {
      if (support_violation) return;
      double ps = 0.0, qs = 0.0;
      for (int v = 0; v < card; ++v) {
        ps += p[base + stride * v];
        qs += q[base + stride * v];
      }
      if (ps <= 0.0) return;
      for (int v = 0; v < card; ++v) {
        const double pv = p[base + stride * v];
        if (pv <= 0.0) continue;
        const double qv = q[base + stride * v];
        if (qv <= 0.0) {
          support_violation = true;
          return;
        }
        acc.add(pv * (std::log(pv / ps) - std::log(qv / qs)));
      }
    });
    if (support_violation) return std::numeric_limits<double>::infinity();
    total.add(ci * acc.value());
  }
  return total.value();
}

/** Point on the e-geodesic: ln p = (1-l) ln p0 + l ln p1 - ln Z. */
inline JointTable e_geodesic_point(const JointTable& p0, const JointTable& p1, double lambda) {
  if (p0.space() != p1.space())
    throw std::invalid_argument("e_geodesic_point: mismatched variable spaces");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("e_geodesic_point: lambda outside [0,1]");
  std::vector<double> logs(p0.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::uint64_t x = 0; x < p0.size(); ++x) {
    if (!(p0[x] > 0.0) || !(p1[x] > 0.0))
      throw std::runtime_error("e-geodesic requires positive distributions");
    logs[x] = (1.0 - lambda) * std::log(p0[x]) + lambda * std::log(p1[x]);
    max_log = std::max(max_log, logs[x]);
  }
  std::vector<double> w(p0.size());
  for (std::uint64_t x = 0; x < p0.size(); ++x) w[x] = std::exp(logs[x] - max_log);
  return JointTable::from_unnormalized(p0.space(), std::move(w));
}

/** Point on the m-geodesic: (1-l) p0 + l p1. */
inline JointTable m_geodesic_point(const JointTable& p0, const JointTable& p1, double lambda) {
  if (p0.space() != p1.space())
    throw std::invalid_argument("m_geodesic_point: mismatched variable spaces");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("m_geodesic_point: lambda outside [0,1]");
  std::vector<double> w(p0.size());
  for (std::uint64_t x = 0; x < p0.size(); ++x) w[x] = (1.0 - lambda) * p0[x] + lambda * p1[x];
  return JointTable::from_unnormalized(p0.space(), std::move(w));
}

// Oracle-scale guard for dense transition matrices and stationary solves.
inline constexpr std::uint64_t kMaxChainStates = std::uint64_t{1} << 16;

/**
 * Selection weights restricted to unclamped nodes and renormalized;
 * clamped nodes get weight zero.
 */
inline std::vector<double> effective_weights(const DependencyNetwork& dn, const Evidence& ev) {
  ev.validate(dn.space);
  std::vector<double> w(dn.space.size(), 0.0);
  double s = 0.0;
  for (int i = 0; i < dn.space.size(); ++i) {
    if (ev.clamped(i)) continue;
    w[i] = dn.weights.c[i];
    s += w[i];
  }
  if (static_cast<int>(ev.size()) == dn.space.size())
    throw std::invalid_argument("all nodes clamped");
  if (!(s > 0.0))
    throw std::invalid_argument("no unclamped node has positive selection weight");
  for (double& v : w) v /= s;
  return w;
}

/**
 * Dense row-stochastic transition matrix of single-step random-selection
 * sampling: entry (x, x') = sum over fireable i of
 * c_i * theta_i(x'_i | y_i(x)) * [x'_{-i} = x_{-i}]. Row-major, S x S.
 */
inline std::vector<double> transition_matrix(const DependencyNetwork& dn,
                                             const Evidence& ev = {}) {
  dn.validate();
  const VarSpace& space = dn.space;
  const auto total = space.total_states();
  if (total > kMaxChainStates)
    throw std::invalid_argument("transition_matrix guard: " + std::to_string(total) +
                                " states exceeds 2^16");
  const auto w = effective_weights(dn, ev);

  std::vector<double> m(total * total, 0.0);
  for (std::uint64_t x = 0; x < total; ++x) {
    for (int i = 0; i < space.size(); ++i) {
      if (w[i] <= 0.0) continue;
      const auto row = detail::checked_row(dn.nodes[i], dn.nodes[i].y_index_of_state(space, x));
      const auto stride = space.stride(i);
      const auto base = x - static_cast<std::uint64_t>(space.digit(x, i)) * stride;
      for (int v = 0; v < space.card(i); ++v) m[x * total + base + stride * v] += w[i] * row[v];
    }
  }
  return m;
}

struct StationaryOptions {
  double tolerance = 1e-13;  // L1 residual per iteration
  std::uint64_t max_iterations = 1'000'000;
};

namespace detail {

inline JointTable power_iterate(const VarSpace& space, std::vector<double> v,
                                const std::vector<const Cpt*>& cpts,
                                const std::vector<double>& weights,
                                const StationaryOptions& opt) {
  std::vector<double> next(v.size());
  for (std::uint64_t it = 0; it < opt.max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t k = 0; k < cpts.size(); ++k)
      if (weights[k] > 0.0) accumulate_fired(v, space, *cpts[k], weights[k], next);
    double residual = 0.0;
    for (std::uint64_t x = 0; x < v.size(); ++x) residual += std::abs(next[x] - v[x]);
    v.swap(next);
    if (residual < opt.tolerance) return JointTable::from_unnormalized(space, std::move(v));
  }
  double residual = 0.0;
  for (std::uint64_t x = 0; x < v.size(); ++x) residual += std::abs(next[x] - v[x]);
  throw std::runtime_error("stationary iteration did not converge: residual " +
                           std::to_string(residual) + " after " +
                           std::to_string(opt.max_iterations) + " iterations");
}

}  // namespace detail

/**
 * Exact stationary distribution of random-selection sampling, as the left
 * fixed vector of the transition matrix, found by power iteration. With
 * evidence, the chain is restricted to the matching slice of states and
 * the result is zero off the slice.
 */
inline JointTable stationary_exact(const DependencyNetwork& dn, const Evidence& ev = {},
                                   const StationaryOptions& opt = {}) {
  dn.validate();
  const VarSpace& space = dn.space;
  const auto total = space.total_states();
  if (total > kMaxChainStates)
    throw std::invalid_argument("stationary_exact guard: " + std::to_string(total) +
                                " states exceeds 2^16");
  const auto w = effective_weights(dn, ev);

  std::vector<double> v(total, 0.0);
  std::uint64_t support = 0;
  for (std::uint64_t x = 0; x < total; ++x) {
    bool ok = true;
    for (auto [var, val] : ev.items())
      if (space.digit(x, var) != val) {
        ok = false;
        break;
      }
    if (ok) {
      v[x] = 1.0;
      ++support;
    }
  }
  for (double& e : v) e /= static_cast<double>(support);

  std::vector<const Cpt*> cpts;
  std::vector<double> cw;
  for (int i = 0; i < space.size(); ++i) {
    cpts.push_back(&dn.nodes[i]);
    cw.push_back(w[i]);
  }
  return detail::power_iterate(space, std::move(v), cpts, cw, opt);
}

/**
 * Limit distribution of ordered (cyclic 0..n-1) node selection: the average
 * of the n per-phase stationary distributions of the composed sweep map.
 */
inline JointTable stationary_ordered_exact(const DependencyNetwork& dn,
                                           const StationaryOptions& opt = {}) {
  dn.validate();
  const VarSpace& space = dn.space;
  const auto total = space.total_states();
  if (total > kMaxChainStates)
    throw std::invalid_argument("stationary_ordered_exact guard: " + std::to_string(total) +
                                " states exceeds 2^16");
  const int n = space.size();

  auto fire = [&](const std::vector<double>& from, int i, std::vector<double>& to) {
    std::fill(to.begin(), to.end(), 0.0);
    detail::accumulate_fired(from, space, dn.nodes[i], 1.0, to);
  };

  // Fixed point of one full sweep starting at node 0.
  std::vector<double> v(total, 1.0 / static_cast<double>(total));
  std::vector<double> tmp(total), sweep_start(total);
  bool converged = false;
  double residual = 0.0;
  for (std::uint64_t it = 0; it < opt.max_iterations && !converged; ++it) {
    sweep_start = v;
    for (int i = 0; i < n; ++i) {
      fire(v, i, tmp);
      v.swap(tmp);
    }
    residual = 0.0;
    for (std::uint64_t x = 0; x < total; ++x) residual += std::abs(v[x] - sweep_start[x]);
    converged = residual < opt.tolerance;
  }
  if (!converged)
    throw std::runtime_error("ordered stationary iteration did not converge: residual " +
                             std::to_string(residual));

  // Roll v = pi_0 through the phases and average.
  std::vector<double> avg(total, 0.0);
  for (int i = 0; i < n; ++i) {
    for (std::uint64_t x = 0; x < total; ++x) avg[x] += v[x];
    fire(v, i, tmp);
    v.swap(tmp);
  }
  for (double& e : avg) e /= static_cast<double>(n);
  return JointTable::from_unnormalized(space, std::move(avg));
}

/**
 * Slack of the stationary-location bound:
 *   sum_i c_i KL(p || E(theta_i)) - FC(p || pi),
 * where pi is the exact stationary distribution of dn. Non-negative.
 */
inline double theorem3_slack(const JointTable& p, const DependencyNetwork& dn,
                             const StationaryOptions& opt = {}) {
  if (p.space() != dn.space)
    throw std::invalid_argument("theorem3_slack: mismatched variable spaces");
  const JointTable pi = stationary_exact(dn, {}, opt);
  detail::SumAccumulator rhs;
  for (int i = 0; i < dn.space.size(); ++i)
    if (dn.weights.c[i] > 0.0) rhs.add(dn.weights.c[i] * kl_to_manifold(p, dn.nodes[i]));
  return rhs.value() - fc_divergence(p, pi, dn.weights);
}

}  // namespace depnet
