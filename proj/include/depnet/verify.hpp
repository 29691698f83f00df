#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "depnet/discrete.hpp"
#include "depnet/infogeo.hpp"
#include "depnet/io.hpp"
#include "depnet/learn.hpp"
#include "depnet/model.hpp"
#include "depnet/rng.hpp"
#include "depnet/synth.hpp"

namespace depnet {

// ----------------------------------------------------------------------
// Random instances. `floor` bounds every probability away from zero,
// which keeps the Monte Carlo chains well mixed; exact checks can use 0.
// ----------------------------------------------------------------------

inline std::vector<double> random_simplex_point(RngStream& rng, int k, double floor = 0.0) {
  auto v = detail::dirichlet1_row(rng, k);
  if (floor > 0.0) {
    const double scale = 1.0 - floor * k;
    for (double& e : v) e = floor + scale * e;
  }
  return v;
}

inline JointTable random_joint(const VarSpace& space, RngStream& rng, double floor = 0.0) {
  return JointTable::from_unnormalized(
      space, random_simplex_point(rng, static_cast<int>(space.total_states()), floor));
}

inline Cpt random_cpt(const VarSpace& space, int child, std::vector<int> inputs, RngStream& rng,
                      double floor = 0.0) {
  Cpt cpt;
  cpt.child = child;
  cpt.inputs = std::move(inputs);
  cpt.child_card = space.card(child);
  for (int id : cpt.inputs) cpt.input_cards.push_back(space.card(id));
  const auto rows = cpt.num_rows();
  cpt.entries.reserve(rows * cpt.child_card);
  for (std::uint64_t y = 0; y < rows; ++y) {
    const auto row = random_simplex_point(rng, cpt.child_card, floor);
    cpt.entries.insert(cpt.entries.end(), row.begin(), row.end());
  }
  return cpt;
}

// Each other variable joins the input set with probability 1/2.
inline std::vector<int> random_input_set(int n, int child, RngStream& rng) {
  std::vector<int> inputs;
  for (int j = 0; j < n; ++j)
    if (j != child && rng.next_double() < 0.5) inputs.push_back(j);
  return inputs;
}

inline DependencyNetwork random_depnet(const VarSpace& space, RngStream& rng,
                                       double floor = 0.0) {
  DependencyNetwork dn;
  dn.space = space;
  for (int i = 0; i < space.size(); ++i)
    dn.nodes.push_back(random_cpt(space, i, random_input_set(space.size(), i, rng), rng, floor));
  dn.weights = SelectionWeights::uniform(space.size());
  return dn;
}

// Network whose CPTs are p's full conditionals; its chain leaves p fixed.
inline DependencyNetwork compatible_depnet(const JointTable& p) {
  DependencyNetwork dn;
  dn.space = p.space();
  for (int i = 0; i < p.space().size(); ++i) dn.nodes.push_back(full_conditional_cpt(p, i));
  dn.weights = SelectionWeights::uniform(p.space().size());
  return dn;
}

// A member of E(theta_i) with a random marginal over the other variables.
inline JointTable random_manifold_member(const VarSpace& space, const Cpt& cpt, RngStream& rng,
                                         double floor = 0.0) {
  const int i = cpt.child;
  const auto stride = space.stride(i);
  const int card = space.card(i);
  const auto groups = space.total_states() / static_cast<std::uint64_t>(card);
  const auto marg = random_simplex_point(rng, static_cast<int>(groups), floor);
  std::vector<double> w(space.total_states(), 0.0);
  std::uint64_t a = 0;
  detail::for_each_conditional_group(space, i, [&](std::uint64_t base) {
    const auto row = cpt.row(cpt.y_index_of_state(space, base));
    for (int v = 0; v < card; ++v) w[base + stride * v] = marg[a] * row[v];
    ++a;
  });
  return JointTable::from_unnormalized(space, std::move(w));
}

// Total variation distance.
inline double tv_distance(const JointTable& p, const JointTable& q) {
  if (p.space() != q.space()) throw std::invalid_argument("tv_distance: mismatched spaces");
  double s = 0.0;
  for (std::uint64_t x = 0; x < p.size(); ++x) s += std::abs(p[x] - q[x]);
  return 0.5 * s;
}

// Max-norm residual between p's full conditional of node i and theta_i.
inline double full_conditional_residual(const JointTable& p, const Cpt& cpt) {
  const int i = cpt.child;
  const auto stride = p.space().stride(i);
  const int card = p.space().card(i);
  double worst = 0.0;
  detail::for_each_conditional_group(p.space(), i, [&](std::uint64_t base) {
    double s = 0.0;
    for (int v = 0; v < card; ++v) s += p[base + stride * v];
    if (s <= 0.0) return;
    const auto row = cpt.row(cpt.y_index_of_state(p.space(), base));
    for (int v = 0; v < card; ++v)
      worst = std::max(worst, std::abs(p[base + stride * v] / s - row[v]));
  });
  return worst;
}

// ----------------------------------------------------------------------
// Theorem trial drivers. Each returns one row per trial; `value` must
// stay within `bound` (direction depends on the check) for `pass`.
// ----------------------------------------------------------------------

struct TrialRow {
  std::string check;
  int trial = 0;
  int n = 0;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// Geodesics stay on E(theta_i): residual of the full conditional at a
// random interior point of the e- and m-geodesic between two members.
inline std::vector<TrialRow> flatness_trials(int count, std::uint64_t seed) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const VarSpace space = VarSpace::binary(n);
    const int child = static_cast<int>(rng.next_below(n));
    const Cpt cpt = random_cpt(space, child, random_input_set(n, child, rng), rng, 0.05);
    const JointTable p0 = random_manifold_member(space, cpt, rng, 0.01);
    const JointTable p1 = random_manifold_member(space, cpt, rng, 0.01);
    const double lambda = rng.next_double();
    const double e_res = full_conditional_residual(e_geodesic_point(p0, p1, lambda), cpt);
    const double m_res = full_conditional_residual(m_geodesic_point(p0, p1, lambda), cpt);
    rows.push_back({"e-flat", t, n, e_res, 1e-10, e_res < 1e-10});
    rows.push_back({"m-flat", t, n, m_res, 1e-10, m_res < 1e-10});
  }
  return rows;
}

/**
 * Grid certification of the m-projection: parameterize members of
 * E(theta_i) by their marginal over X_{-i} on a simplex grid with the
 * given step, and compare KL(p || member) against the closed form.
 * `value` is grid minimum minus closed form; it must lie in
 * [-1e-9, grid tolerance).
 */
inline std::vector<TrialRow> projection_grid_trials(int count, std::uint64_t seed,
                                                    double step = 0.02, double tolerance = 1e-2) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  const int ticks = static_cast<int>(std::llround(1.0 / step));
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const VarSpace space = VarSpace::binary(n);
    const int child = static_cast<int>(rng.next_below(n));
    const Cpt cpt = random_cpt(space, child, random_input_set(n, child, rng), rng, 0.02);
    const JointTable p = random_joint(space, rng, 0.01);
    const double closed = kl_to_manifold(p, cpt);

    const int groups = static_cast<int>(space.total_states()) / space.card(child);
    const auto stride = space.stride(child);
    const int card = space.card(child);
    std::vector<std::uint64_t> bases;
    detail::for_each_conditional_group(space, child, [&](std::uint64_t b) { bases.push_back(b); });

    double grid_min = std::numeric_limits<double>::infinity();
    bool beaten = false;  // some grid member strictly below the closed form
    std::vector<int> comp(groups, 0);
    std::vector<double> w(space.total_states());
    // Enumerate compositions of `ticks` into `groups` parts.
    auto evaluate = [&] {
      for (int g = 0; g < groups; ++g) {
        const double mass = static_cast<double>(comp[g]) * step;
        const auto row = cpt.row(cpt.y_index_of_state(space, bases[g]));
        for (int v = 0; v < card; ++v) w[bases[g] + stride * v] = mass * row[v];
      }
      double kl;
      try {
        kl = kl_divergence(p, JointTable::from_unnormalized(space, w));
      } catch (const std::invalid_argument&) {
        return;  // all-zero corner
      }
      grid_min = std::min(grid_min, kl);
      if (kl < closed - 1e-9) beaten = true;
    };
    std::function<void(int, int)> rec = [&](int g, int left) {
      if (g == groups - 1) {
        comp[g] = left;
        evaluate();
        return;
      }
      for (int k = 0; k <= left; ++k) {
        comp[g] = k;
        rec(g + 1, left - k);
      }
    };
    rec(0, ticks);

    const double gap = grid_min - closed;
    rows.push_back({"m-projection-grid", t, n, gap, tolerance,
                    !beaten && gap >= -1e-9 && gap < tolerance});
  }
  return rows;
}

// m-geodesic p -> q and e-geodesic q -> r are orthogonal for
// q = m_project(p, theta_i) and any member r of E(theta_i).
inline std::vector<TrialRow> orthogonality_trials(int count, std::uint64_t seed,
                                                  int members_per_trial = 10) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const VarSpace space = VarSpace::binary(n);
    const int child = static_cast<int>(rng.next_below(n));
    const Cpt cpt = random_cpt(space, child, random_input_set(n, child, rng), rng, 0.05);
    const JointTable p = random_joint(space, rng, 0.01);
    const JointTable q = m_project(p, cpt);
    double worst = 0.0;
    for (int k = 0; k < members_per_trial; ++k) {
      const JointTable r = random_manifold_member(space, cpt, rng, 0.01);
      detail::SumAccumulator acc;
      for (std::uint64_t x = 0; x < p.size(); ++x)
        acc.add((p[x] - q[x]) * (std::log(q[x]) - std::log(r[x])));
      worst = std::max(worst, std::abs(acc.value()));
    }
    rows.push_back({"orthogonality", t, n, worst, 1e-9, worst < 1e-9});
  }
  return rows;
}

// Bregman identity: FC(p||q) = f(p) - f(q) - grad f(q) . (p - q) with
// f(p) = sum_i c_i <ln p(X_i|X_{-i})>_p, gradient by central differences
// along simplex directions (e_x - e_ref).
inline std::vector<TrialRow> bregman_trials(int count, std::uint64_t seed, double h = 1e-6,
                                            double bound = 1e-5) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const VarSpace space = VarSpace::binary(n);
    const SelectionWeights weights = SelectionWeights::uniform(n);
    const JointTable p = random_joint(space, rng, 0.02);
    const JointTable q = random_joint(space, rng, 0.02);

    auto f = [&](const std::vector<double>& probs) {
      const JointTable table = JointTable::from_unnormalized(space, probs);
      detail::SumAccumulator acc;
      for (int i = 0; i < n; ++i) {
        const auto stride = space.stride(i);
        const int card = space.card(i);
        detail::SumAccumulator node;
        detail::for_each_conditional_group(space, i, [&](std::uint64_t base) {
          double s = 0.0;
          for (int v = 0; v < card; ++v) s += table[base + stride * v];
          if (s <= 0.0) return;
          for (int v = 0; v < card; ++v) {
            const double pv = table[base + stride * v];
            if (pv > 0.0) node.add(pv * std::log(pv / s));
          }
        });
        acc.add(weights.c[i] * node.value());
      }
      return acc.value();
    };

    // grad f(q) . (p - q), decomposing p - q over (e_x - e_0) directions.
    detail::SumAccumulator dot;
    for (std::uint64_t x = 1; x < q.size(); ++x) {
      const double coef = p[x] - q[x];
      if (coef == 0.0) continue;
      std::vector<double> plus = q.probs(), minus = q.probs();
      plus[x] += h;
      plus[0] -= h;
      minus[x] -= h;
      minus[0] += h;
      dot.add(coef * (f(plus) - f(minus)) / (2.0 * h));
    }
    const double bregman = f(p.probs()) - f(q.probs()) - dot.value();
    const double fc = fc_divergence(p, q, weights);
    const double err = std::abs(bregman - fc);
    rows.push_back({"bregman", t, n, err, bound, err < bound});
  }
  return rows;
}

// Residual of the stationary fixed-point identity
// pi(x) = sum_i c_i pi(x_{-i}) theta_i(x_i|y_i).
inline double fixed_point_residual(const DependencyNetwork& dn, const JointTable& pi) {
  std::vector<double> mixed(pi.size(), 0.0);
  for (int i = 0; i < dn.space.size(); ++i)
    if (dn.weights.c[i] > 0.0)
      detail::accumulate_fired(pi.probs(), dn.space, dn.nodes[i], dn.weights.c[i], mixed);
  double worst = 0.0;
  for (std::uint64_t x = 0; x < pi.size(); ++x) worst = std::max(worst, std::abs(mixed[x] - pi[x]));
  return worst;
}

inline std::vector<TrialRow> fixed_point_trials(int count, std::uint64_t seed) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const DependencyNetwork dn = random_depnet(VarSpace::binary(n), rng, 0.02);
    const double res = fixed_point_residual(dn, stationary_exact(dn));
    rows.push_back({"fixed-point", t, n, res, 1e-10, res < 1e-10});
  }
  return rows;
}

// Slack of the stationary-location bound; must be non-negative.
inline std::vector<TrialRow> theorem3_trials(int count, std::uint64_t seed) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const VarSpace space = VarSpace::binary(n);
    const JointTable p = random_joint(space, rng);
    const DependencyNetwork dn = random_depnet(space, rng, 0.01);
    const double slack = theorem3_slack(p, dn);
    rows.push_back({"theorem3-slack", t, n, slack, -1e-9, slack >= -1e-9});
  }
  return rows;
}

// Optimal-CPT identity: for parameters learned without the positivity
// trick, KL(emp || E(theta_i)) = H_emp(X_i|Y_i) - H_emp(X_i|X_{-i}).
inline std::vector<TrialRow> optimal_cpt_identity_trials(int count, std::uint64_t seed) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  const Penalty pens[] = {Penalty::None, Penalty::Aic, Penalty::Mdl};
  for (int t = 0; t < count; ++t) {
    const int n = 3 + static_cast<int>(rng.next_below(2));
    const VarSpace space = VarSpace::binary(n);
    const JointTable truth = random_joint(space, rng, 0.01);
    const auto n_rows = 50 + rng.next_below(451);
    const Dataset data = sample_joint(truth, n_rows, rng.next_u64());
    const Penalty pen = pens[rng.next_below(3)];
    const auto learned = learn_dn(data, pen, /*positivity=*/false);
    const JointTable emp = empirical_distribution(data);

    std::vector<int> rest;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      rest.clear();
      for (int j = 0; j < n; ++j)
        if (j != i) rest.push_back(j);
      const double lhs = kl_to_manifold(emp, learned.net.nodes[i]);
      const double rhs = conditional_entropy(emp, {i}, learned.net.nodes[i].inputs) -
                         conditional_entropy(emp, {i}, rest);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    rows.push_back({"optimal-cpt-identity", t, n, worst, 1e-10, worst < 1e-10});
  }
  return rows;
}

// The two forms of the full-conditional divergence agree:
// direct expectation vs. sum of divergences to the manifolds of q's
// full conditionals.
inline std::vector<TrialRow> fc_forms_trials(int count, std::uint64_t seed) {
  RngStream rng(seed, RngUse::Structure);
  std::vector<TrialRow> rows;
  for (int t = 0; t < count; ++t) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const VarSpace space = VarSpace::binary(n);
    const JointTable p = random_joint(space, rng, 0.005);
    const JointTable q = random_joint(space, rng, 0.005);
    const SelectionWeights weights = SelectionWeights::uniform(n);
    const double direct = fc_divergence(p, q, weights);
    detail::SumAccumulator via_manifolds;
    for (int i = 0; i < n; ++i)
      via_manifolds.add(weights.c[i] * kl_to_manifold(p, full_conditional_cpt(q, i)));
    const double err = std::abs(direct - via_manifolds.value());
    rows.push_back({"fc-two-forms", t, n, err, 1e-10, err < 1e-10});
  }
  return rows;
}

inline void write_trials_tsv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "check\ttrial\tn\tvalue\tbound\tpass\n";
  for (const auto& r : rows)
    out << r.check << '\t' << r.trial << '\t' << r.n << '\t' << fmt_g(r.value, 6) << '\t'
        << fmt_g(r.bound, 6) << '\t' << (r.pass ? 1 : 0) << '\n';
}

}  // namespace depnet
