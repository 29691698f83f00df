#pragma once

#include <chrono>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "depnet/bayesnet.hpp"
#include "depnet/discrete.hpp"
#include "depnet/infogeo.hpp"
#include "depnet/io.hpp"
#include "depnet/learn.hpp"
#include "depnet/model.hpp"
#include "depnet/sampler.hpp"
#include "depnet/synth.hpp"

namespace depnet {

/** KL(empirical(outputs) || p_true), the output-accuracy metric. */
inline double eval_output(const Dataset& outputs, const JointTable& p_true) {
  return kl_divergence(empirical_distribution(outputs), p_true);
}

/**
 * Per-node learning summary: the child's empirical entropy, its empirical
 * conditional entropy given the learned inputs, and the divergences from
 * the empirical and true distributions to the node's manifold.
 */
struct NodeRow {
  int node = 0;
  std::vector<int> inputs;
  double h_child = 0.0;
  double h_child_given_inputs = 0.0;
  double kl_emp = 0.0;   // KL(empirical || E(theta_i))
  double kl_true = 0.0;  // KL(true || E(theta_i))
};

inline std::vector<NodeRow> node_table(const DependencyNetwork& dn, const JointTable& p_emp,
                                       const JointTable& p_true) {
  std::vector<NodeRow> rows;
  rows.reserve(dn.nodes.size());
  for (int i = 0; i < dn.space.size(); ++i) {
    NodeRow row;
    row.node = i;
    row.inputs = dn.nodes[i].inputs;
    row.h_child = entropy(p_emp, {i});
    row.h_child_given_inputs = conditional_entropy(p_emp, {i}, row.inputs);
    row.kl_emp = kl_to_manifold(p_emp, dn.nodes[i]);
    row.kl_true = kl_to_manifold(p_true, dn.nodes[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

// Selection-weighted averages of the two divergence columns.
inline std::pair<double, double> node_table_averages(const std::vector<NodeRow>& rows,
                                                     const SelectionWeights& weights) {
  detail::SumAccumulator emp, tru;
  for (const auto& row : rows) {
    emp.add(weights.c[row.node] * row.kl_emp);
    tru.add(weights.c[row.node] * row.kl_true);
  }
  return {emp.value(), tru.value()};
}

/** A labeled ground-truth distribution. */
struct NamedTruth {
  std::string name;
  JointTable joint;
};

// Desk-scale benchmark truths; `full` switches to the 20/25-node versions.
inline std::vector<NamedTruth> benchmark_truths(bool full = false) {
  std::vector<NamedTruth> out;
  if (full) {
    out.push_back({"BN20-37", bn_joint(random_bn({20, 37, 42}))});
    out.push_back({"Ising5x5", ising_joint({5, 5, 0.4, 0.0})});
  } else {
    out.push_back({"BN12-20", bn_joint(random_bn({12, 20, 7}))});
    out.push_back({"Ising4x4", ising_joint({4, 4, 0.4, 0.0})});
  }
  return out;
}

struct CompareSettings {
  std::vector<std::uint64_t> train_sizes = {1000, 100000};
  std::uint64_t output_size = 1'000'000;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  Penalty pen = Penalty::Mdl;
  bool positivity = true;
  SamplerConfig::Mode mode = SamplerConfig::Mode::Random;
  int timing_reps = 3;  // learner timing: median over this many runs
};

struct CompareCell {
  std::string dataset;
  std::string system;  // "dn" or "bn"
  std::uint64_t seed = 0;
  int n = 0;
  std::uint64_t n_train = 0;
  std::uint64_t n_out = 0;
  double kl_train = 0.0;  // KL(empirical training || true)
  double kl_out = 0.0;    // KL(empirical outputs || true)
  std::uint64_t evaluations = 0;
  double learn_ms = 0.0;  // median of timing_reps runs
  double sample_ms = 0.0;
};

struct NodeTableCell {
  std::string dataset;
  std::uint64_t n_train = 0;
  std::uint64_t seed = 0;
  NodeRow row;
};

struct CompareReport {
  std::vector<CompareCell> cells;
  std::vector<NodeTableCell> node_cells;
  std::vector<std::pair<std::string, std::pair<double, double>>> node_averages;
};

namespace detail {

inline double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

inline double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace detail

/**
 * Full comparison pipeline: per (truth, training size, seed), draw
 * training data, learn both systems, draw output data from each, and
 * record the divergence columns, evaluation counts and wall times.
 * Everything except the timing fields is seed-deterministic.
 */
inline CompareReport compare(const std::vector<NamedTruth>& truths,
                             const CompareSettings& settings) {
  CompareReport report;
  for (const auto& truth : truths) {
    const int n = truth.joint.space().size();
    for (std::uint64_t n_train : settings.train_sizes) {
      for (std::uint64_t seed : settings.seeds) {
        const auto train_seed = detail::derive_seed(seed, 101);
        const auto dn_out_seed = detail::derive_seed(seed, 102);
        const auto bn_out_seed = detail::derive_seed(seed, 103);

        const Dataset train = sample_joint(truth.joint, n_train, train_seed);
        const JointTable p_emp = empirical_distribution(train);
        const double kl_train = kl_divergence(p_emp, truth.joint);

        // Dependency network.
        LearnDnResult dn;
        std::vector<double> dn_times;
        for (int rep = 0; rep < settings.timing_reps; ++rep)
          dn_times.push_back(detail::time_ms(
              [&] { dn = learn_dn(train, settings.pen, settings.positivity); }));
        SamplerConfig cfg;
        cfg.mode = settings.mode;
        cfg.n_samples = settings.output_size;
        cfg.seed = dn_out_seed;
        SampleRun dn_run;
        const double dn_sample_ms = detail::time_ms([&] { dn_run = run(dn.net, cfg); });

        CompareCell cell;
        cell.dataset = truth.name;
        cell.system = "dn";
        cell.seed = seed;
        cell.n = n;
        cell.n_train = n_train;
        cell.n_out = settings.output_size;
        cell.kl_train = kl_train;
        cell.kl_out = eval_output(dn_run.outputs, truth.joint);
        cell.evaluations = dn.scost_evaluations;
        cell.learn_ms = detail::median_of(dn_times);
        cell.sample_ms = dn_sample_ms;
        report.cells.push_back(cell);

        const auto dn_rows = node_table(dn.net, p_emp, truth.joint);
        for (const auto& row : dn_rows)
          report.node_cells.push_back({truth.name, n_train, seed, row});
        report.node_averages.push_back(
            {truth.name + ":" + std::to_string(n_train) + ":" + std::to_string(seed),
             node_table_averages(dn_rows, dn.net.weights)});

        // Bayesian network.
        LearnBnResult bn;
        std::vector<double> bn_times;
        for (int rep = 0; rep < settings.timing_reps; ++rep)
          bn_times.push_back(detail::time_ms(
              [&] { bn = learn_bn(train, settings.pen, settings.positivity); }));
        Dataset bn_outputs;
        const double bn_sample_ms = detail::time_ms(
            [&] { bn_outputs = ancestral_sample(bn.net, settings.output_size, bn_out_seed); });

        cell.system = "bn";
        cell.kl_out = eval_output(bn_outputs, truth.joint);
        cell.evaluations = bn.scost_evaluations;
        cell.learn_ms = detail::median_of(bn_times);
        cell.sample_ms = bn_sample_ms;
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

// ----------------------------------------------------------------------
// TSV writers. The main report and node table contain only
// seed-deterministic fields; measured wall times go to a separate file.
// ----------------------------------------------------------------------

inline void write_compare_tsv(std::ostream& out, const CompareReport& report) {
  out << "dataset\tsystem\tseed\tn\tn_train\tn_out\tkl_train_true\tkl_out_true\tscost_evals\n";
  for (const auto& c : report.cells)
    out << c.dataset << '\t' << c.system << '\t' << c.seed << '\t' << c.n << '\t' << c.n_train
        << '\t' << c.n_out << '\t' << fmt_g(c.kl_train, 6) << '\t' << fmt_g(c.kl_out, 6) << '\t'
        << c.evaluations << '\n';
}

inline void write_timings_tsv(std::ostream& out, const CompareReport& report) {
  out << "dataset\tsystem\tseed\tn_train\tlearn_ms\tsample_ms\n";
  for (const auto& c : report.cells)
    out << c.dataset << '\t' << c.system << '\t' << c.seed << '\t' << c.n_train << '\t'
        << fmt_g(c.learn_ms, 6) << '\t' << fmt_g(c.sample_ms, 6) << '\n';
}

inline void write_node_table_tsv(std::ostream& out, const CompareReport& report) {
  out << "dataset\tn_train\tseed\tnode\tinputs\th_xi\th_xi_given_yi\tkl_emp_manifold\t"
         "kl_true_manifold\n";
  for (const auto& c : report.node_cells) {
    out << c.dataset << '\t' << c.n_train << '\t' << c.seed << '\t' << c.row.node << '\t';
    for (std::size_t k = 0; k < c.row.inputs.size(); ++k)
      out << (k ? "," : "") << c.row.inputs[k];
    out << '\t' << fmt_g(c.row.h_child, 6) << '\t' << fmt_g(c.row.h_child_given_inputs, 6)
        << '\t' << fmt_g(c.row.kl_emp, 6) << '\t' << fmt_g(c.row.kl_true, 6) << '\n';
  }
}

}  // namespace depnet
