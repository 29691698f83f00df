#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "depnet/discrete.hpp"
#include "depnet/infogeo.hpp"
#include "depnet/model.hpp"
#include "depnet/rng.hpp"

namespace depnet {

/**
 * Pseudo-Gibbs sampling configuration. burn_in and thin default to n
 * (the node count) when unset. The initial state is drawn uniformly from
 * the seed unless given explicitly; clamped variables are forced to their
 * evidence values either way.
 */
struct SamplerConfig {
  enum class Mode { Ordered, Random };

  Mode mode = Mode::Random;
  Evidence clamps;
  std::uint64_t n_samples = 0;
  std::optional<std::uint64_t> burn_in;  // default n
  std::optional<std::uint64_t> thin;     // default n, must be >= 1
  std::uint64_t seed = 0;
  std::optional<Assignment> initial;
};

struct SampleRun {
  Dataset outputs;
  std::uint64_t steps_taken = 0;
  SamplerConfig config;
};

/**
 * Fire node i: redraw the child component of `state` from the CPT row
 * selected by the current input values (inverse-CDF draw, value order).
 */
inline void fire_node_inplace(Assignment& state, const Cpt& cpt, RngStream& rng) {
  const std::uint64_t y = cpt.y_index(state);
  if (!cpt.defined(y)) {
    std::string ys = "(";
    for (std::size_t j = 0; j < cpt.inputs.size(); ++j) {
      if (j) ys += ",";
      ys += "X" + std::to_string(cpt.inputs[j]) + "=" + std::to_string(state[cpt.inputs[j]]);
    }
    ys += ")";
    throw std::runtime_error("fire_node: undefined CPT row at node " + std::to_string(cpt.child) +
                             ", inputs " + ys);
  }
  state[cpt.child] = rng.draw_categorical(cpt.row(y));
}

inline Assignment fire_node(const Assignment& state, const Cpt& cpt, RngStream& rng) {
  Assignment next = state;
  fire_node_inplace(next, cpt, rng);
  return next;
}

/**
 * Run pseudo-Gibbs sampling: burn_in firings, then append the current
 * state and perform thin firings, repeated until n_samples states are
 * recorded. Ordered mode cycles over unclamped node ids; random mode
 * draws each firing's node from the renormalized selection weights.
 * Fully deterministic given the seed.
 */
inline SampleRun run(const DependencyNetwork& dn, const SamplerConfig& cfg) {
  dn.validate();
  const VarSpace& space = dn.space;
  const int n = space.size();
  cfg.clamps.validate(space);
  const std::uint64_t thin = cfg.thin.value_or(static_cast<std::uint64_t>(n));
  const std::uint64_t burn_in = cfg.burn_in.value_or(static_cast<std::uint64_t>(n));
  if (thin < 1) throw std::invalid_argument("run: thin must be >= 1");

  std::vector<int> order;
  for (int i = 0; i < n; ++i)
    if (!cfg.clamps.clamped(i)) order.push_back(i);
  if (order.empty()) throw std::invalid_argument("all nodes clamped");

  // Weights over the unclamped nodes, renormalized, in id order.
  std::vector<double> weights;
  if (cfg.mode == SamplerConfig::Mode::Random) {
    const auto full = effective_weights(dn, cfg.clamps);
    weights.reserve(order.size());
    for (int i : order) weights.push_back(full[i]);
  }

  RngStream node_rng(cfg.seed, RngUse::NodeSelection);
  RngStream value_rng(cfg.seed, RngUse::ValueDraw);
  RngStream init_rng(cfg.seed, RngUse::InitialState);

  Assignment state;
  if (cfg.initial) {
    if (!space.valid(*cfg.initial)) throw std::invalid_argument("run: bad initial state");
    state = *cfg.initial;
  } else {
    state.resize(n);
    for (int i = 0; i < n; ++i)
      state[i] = static_cast<int>(init_rng.next_below(static_cast<std::uint64_t>(space.card(i))));
  }
  cfg.clamps.apply(state);

  std::size_t pos = 0;
  auto fire_once = [&] {
    int i;
    if (cfg.mode == SamplerConfig::Mode::Ordered) {
      i = order[pos];
      pos = (pos + 1) % order.size();
    } else {
      i = order[static_cast<std::size_t>(node_rng.draw_categorical(weights))];
    }
    fire_node_inplace(state, dn.nodes[i], value_rng);
  };

  SampleRun out;
  out.config = cfg;
  out.outputs.space = space;
  out.outputs.rows.reserve(cfg.n_samples);

  for (std::uint64_t s = 0; s < burn_in; ++s) fire_once();
  for (std::uint64_t t = 0; t < cfg.n_samples; ++t) {
    out.outputs.rows.push_back(state);
    for (std::uint64_t s = 0; s < thin; ++s) fire_once();
  }
  out.steps_taken = burn_in + cfg.n_samples * thin;
  return out;
}

/**
 * Clamped-sampling estimate of p(U | v): normalized counts of the queried
 * variables' assignments in the output of a clamped run. `query` must be
 * disjoint from the clamped set; empty means all unclamped variables.
 */
struct InferResult {
  std::vector<int> query;  // ascending
  JointTable estimate;     // over the query subspace
  SampleRun sample_run;
};

inline InferResult infer(const DependencyNetwork& dn, const Evidence& clamps,
                         std::vector<int> query, SamplerConfig cfg) {
  cfg.clamps = clamps;
  if (query.empty()) {
    for (int i = 0; i < dn.space.size(); ++i)
      if (!clamps.clamped(i)) query.push_back(i);
  }
  detail::require_known_ids(dn.space, query, "infer");
  for (int id : query)
    if (clamps.clamped(id))
      throw std::invalid_argument("infer: queried variable " + std::to_string(id) +
                                  " is clamped");
  std::sort(query.begin(), query.end());

  InferResult res;
  res.sample_run = run(dn, cfg);
  VarSpace sub = dn.space.subspace(query);
  std::vector<double> counts(sub.total_states(), 0.0);
  for (const auto& row : res.sample_run.outputs.rows) {
    Assignment u(query.size());
    for (std::size_t k = 0; k < query.size(); ++k) u[k] = row[query[k]];
    counts[sub.index_of(u)] += 1.0;
  }
  res.query = std::move(query);
  res.estimate = JointTable::from_unnormalized(std::move(sub), std::move(counts));
  return res;
}

}  // namespace depnet
