// Command-line front end: dataset generation, learning, sampling,
// inference and evaluation over the text formats in depnet/io.hpp.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depnet/bayesnet.hpp"
#include "depnet/eval.hpp"
#include "depnet/infogeo.hpp"
#include "depnet/io.hpp"
#include "depnet/learn.hpp"
#include "depnet/sampler.hpp"
#include "depnet/synth.hpp"
#include "depnet/verify.hpp"

namespace {

using namespace depnet;

Penalty parse_penalty(const std::string& s) {
  if (s == "aic") return Penalty::Aic;
  if (s == "mdl") return Penalty::Mdl;
  if (s == "none") return Penalty::None;
  throw CLI::ValidationError("--penalty must be aic, mdl or none");
}

bool parse_positivity(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw CLI::ValidationError("--positivity must be on or off");
}

Evidence parse_clamps(const std::vector<std::string>& specs) {
  std::vector<std::pair<int, int>> items;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--clamp expects VAR=VAL, got '" + s + "'");
    items.emplace_back(std::stoi(s.substr(0, eq)), std::stoi(s.substr(eq + 1)));
  }
  return Evidence(std::move(items));
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open for writing: " + path);
  return file;
}

// A model file may hold either network kind; peek at the header.
bool file_is_bayesnet(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string word;
  in >> word;
  if (word == "bayesnet") return true;
  if (word == "depnet") return false;
  throw std::runtime_error(path + ": not a model file");
}

bool file_is_joint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string word;
  in >> word;
  return word == "joint";
}

JointTable load_truth(const std::string& path) {
  if (file_is_joint(path)) return load_joint(path);
  if (file_is_bayesnet(path)) return bn_joint(load_bayesnet(path));
  throw std::runtime_error(path + ": expected a joint table or bayesnet model");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency-network learning, sampling and evaluation toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string penalty_s = "mdl";
  std::string positivity_s = "on";
  std::string out_path;

  try {
    // gen-bn ------------------------------------------------------------
    auto* gen_bn = app.add_subcommand("gen-bn", "Generate a random Bayesian network");
    int gb_nodes = 12, gb_edges = 20;
    gen_bn->add_option("--nodes", gb_nodes, "Node count")->required();
    gen_bn->add_option("--edges", gb_edges, "Edge count")->required();
    gen_bn->add_option("--seed", seed, "Random seed");
    gen_bn->add_option("--out", out_path, "Output model file")->required();
    gen_bn->callback([&] { save_bayesnet(out_path, random_bn({gb_nodes, gb_edges, seed})); });

    // gen-ising ----------------------------------------------------------
    auto* gen_ising = app.add_subcommand("gen-ising", "Generate an exact Ising grid joint");
    IsingSpec ising;
    gen_ising->add_option("--rows", ising.rows, "Grid rows")->required();
    gen_ising->add_option("--cols", ising.cols, "Grid cols")->required();
    gen_ising->add_option("--coupling", ising.coupling, "Pairwise coupling J");
    gen_ising->add_option("--field", ising.field, "External field h");
    gen_ising->add_option("--out", out_path, "Output joint file")->required();
    gen_ising->callback([&] { save_joint(out_path, ising_joint(ising)); });

    // sample-true ----------------------------------------------------------
    auto* sample_true = app.add_subcommand("sample-true", "Draw i.i.d. data from a truth");
    std::string st_truth;
    std::uint64_t st_n = 1000;
    sample_true->add_option("--truth", st_truth, "Joint file or bayesnet model")->required();
    sample_true->add_option("--n", st_n, "Rows to draw")->required();
    sample_true->add_option("--seed", seed, "Random seed");
    sample_true->add_option("--out", out_path, "Output dataset file")->required();
    sample_true->callback([&] {
      if (file_is_joint(st_truth))
        save_dataset(out_path, sample_joint(load_joint(st_truth), st_n, seed));
      else
        save_dataset(out_path, ancestral_sample(load_bayesnet(st_truth), st_n, seed));
    });

    // learn-dn ------------------------------------------------------------
    auto* learn_dn_cmd = app.add_subcommand("learn-dn", "Learn a dependency network");
    std::string ld_data;
    bool ld_guard = false;
    learn_dn_cmd->add_option("--data", ld_data, "Training dataset")->required();
    learn_dn_cmd->add_option("--penalty", penalty_s, "aic|mdl|none");
    learn_dn_cmd->add_option("--positivity", positivity_s, "on|off");
    learn_dn_cmd->add_flag("--guard", ld_guard, "Fall back to the full input set when it scores better");
    learn_dn_cmd->add_option("--out", out_path, "Output model file")->required();
    learn_dn_cmd->callback([&] {
      const Dataset d = load_dataset(ld_data);
      const auto t0 = std::chrono::steady_clock::now();
      const auto res = learn_dn(d, parse_penalty(penalty_s), parse_positivity(positivity_s), {},
                                ld_guard);
      const auto ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      save_depnet(out_path, res.net);
      std::cerr << "learn-dn: " << res.scost_evaluations << " scost evaluations, "
                << fmt_g(ms, 6) << " ms\n";
    });

    // learn-bn ------------------------------------------------------------
    auto* learn_bn_cmd = app.add_subcommand("learn-bn", "Learn a Bayesian network");
    std::string lb_data;
    learn_bn_cmd->add_option("--data", lb_data, "Training dataset")->required();
    learn_bn_cmd->add_option("--penalty", penalty_s, "aic|mdl|none");
    learn_bn_cmd->add_option("--positivity", positivity_s, "on|off");
    learn_bn_cmd->add_option("--out", out_path, "Output model file")->required();
    learn_bn_cmd->callback([&] {
      const Dataset d = load_dataset(lb_data);
      const auto t0 = std::chrono::steady_clock::now();
      const auto res = learn_bn(d, parse_penalty(penalty_s), parse_positivity(positivity_s));
      const auto ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      save_bayesnet(out_path, res.net);
      std::cerr << "learn-bn: " << res.scost_evaluations << " scost evaluations, "
                << fmt_g(ms, 6) << " ms\n";
    });

    // sample ------------------------------------------------------------
    auto* sample_cmd = app.add_subcommand("sample", "Draw output data from a learned model");
    std::string s_model, s_mode = "random";
    std::vector<std::string> s_clamps;
    SamplerConfig s_cfg;
    std::int64_t s_burn = -1, s_thin = -1;
    sample_cmd->add_option("--model", s_model, "Model file (depnet or bayesnet)")->required();
    sample_cmd->add_option("--mode", s_mode, "ordered|random");
    sample_cmd->add_option("--samples", s_cfg.n_samples, "Samples to draw")->required();
    sample_cmd->add_option("--burn-in", s_burn, "Burn-in firings (default: node count)");
    sample_cmd->add_option("--thin", s_thin, "Firings between samples (default: node count)");
    sample_cmd->add_option("--seed", seed, "Random seed");
    sample_cmd->add_option("--clamp", s_clamps, "Clamp VAR=VAL (repeatable)");
    sample_cmd->add_option("--out", out_path, "Output dataset file")->required();
    sample_cmd->callback([&] {
      if (file_is_bayesnet(s_model)) {
        if (!s_clamps.empty())
          throw std::runtime_error("clamping requires a dependency network model");
        save_dataset(out_path, ancestral_sample(load_bayesnet(s_model), s_cfg.n_samples, seed));
        return;
      }
      const DependencyNetwork dn = load_depnet(s_model);
      s_cfg.seed = seed;
      s_cfg.clamps = parse_clamps(s_clamps);
      if (s_mode == "ordered")
        s_cfg.mode = SamplerConfig::Mode::Ordered;
      else if (s_mode == "random")
        s_cfg.mode = SamplerConfig::Mode::Random;
      else
        throw std::runtime_error("--mode must be ordered or random");
      if (s_burn >= 0) s_cfg.burn_in = static_cast<std::uint64_t>(s_burn);
      if (s_thin >= 0) s_cfg.thin = static_cast<std::uint64_t>(s_thin);
      save_dataset(out_path, run(dn, s_cfg).outputs);
    });

    // infer ------------------------------------------------------------
    auto* infer_cmd = app.add_subcommand("infer", "Estimate p(U | V=v) by clamped sampling");
    std::string i_model, i_mode = "random";
    std::vector<std::string> i_clamps;
    std::vector<int> i_query;
    SamplerConfig i_cfg;
    std::int64_t i_burn = -1, i_thin = -1;
    infer_cmd->add_option("--model", i_model, "Dependency network model")->required();
    infer_cmd->add_option("--clamp", i_clamps, "Clamp VAR=VAL (repeatable)")->required();
    infer_cmd->add_option("--query", i_query, "Queried variable ids (default: all unclamped)");
    infer_cmd->add_option("--samples", i_cfg.n_samples, "Samples to draw")->required();
    infer_cmd->add_option("--mode", i_mode, "ordered|random");
    infer_cmd->add_option("--burn-in", i_burn, "Burn-in firings (default: node count)");
    infer_cmd->add_option("--thin", i_thin, "Firings between samples (default: node count)");
    infer_cmd->add_option("--seed", seed, "Random seed");
    infer_cmd->add_option("--out", out_path, "Output TSV (default stdout)");
    infer_cmd->callback([&] {
      const DependencyNetwork dn = load_depnet(i_model);
      i_cfg.seed = seed;
      i_cfg.mode = i_mode == "ordered" ? SamplerConfig::Mode::Ordered : SamplerConfig::Mode::Random;
      if (i_burn >= 0) i_cfg.burn_in = static_cast<std::uint64_t>(i_burn);
      if (i_thin >= 0) i_cfg.thin = static_cast<std::uint64_t>(i_thin);
      const auto res = infer(dn, parse_clamps(i_clamps), i_query, i_cfg);
      std::ofstream file;
      auto& out = open_out(file, out_path);
      for (int id : res.query) out << 'x' << id << '\t';
      out << "estimate\n";
      const auto& sub = res.estimate.space();
      for (std::uint64_t u = 0; u < res.estimate.size(); ++u) {
        const auto a = sub.assignment_of(u);
        for (int v : a) out << v << '\t';
        out << fmt_g(res.estimate[u], 6) << '\n';
      }
    });

    // eval ------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "KL(empirical(outputs) || truth)");
    std::string e_outputs, e_truth;
    eval_cmd->add_option("--outputs", e_outputs, "Output dataset")->required();
    eval_cmd->add_option("--truth", e_truth, "Joint file or bayesnet model")->required();
    eval_cmd->add_option("--out", out_path, "Output TSV (default stdout)");
    eval_cmd->callback([&] {
      const double kl = eval_output(load_dataset(e_outputs), load_truth(e_truth));
      if (std::isinf(kl))
        std::cerr << "warning: outputs put mass where the truth has none\n";
      std::ofstream file;
      auto& out = open_out(file, out_path);
      out << "kl_out_true\n" << fmt_g(kl, 6) << '\n';
    });

    // compare ------------------------------------------------------------
    auto* compare_cmd = app.add_subcommand("compare", "DN-vs-BN pipeline over benchmark truths");
    std::string c_truth, c_name = "truth";
    bool c_full = false;
    CompareSettings c_settings;
    std::string c_timings, c_node_table;
    compare_cmd->add_option("--truth", c_truth, "Explicit truth (joint or bayesnet model)");
    compare_cmd->add_option("--name", c_name, "Label for --truth");
    compare_cmd->add_flag("--full", c_full, "Use the 20/25-node benchmark suite");
    compare_cmd->add_option("--n-train", c_settings.train_sizes, "Training sizes");
    compare_cmd->add_option("--n-out", c_settings.output_size, "Output samples per system");
    compare_cmd->add_option("--seeds", c_settings.seeds, "Seeds (repeatable)");
    compare_cmd->add_option("--penalty", penalty_s, "aic|mdl|none");
    compare_cmd->add_option("--positivity", positivity_s, "on|off");
    compare_cmd->add_option("--out", out_path, "Report TSV (default stdout)");
    compare_cmd->add_option("--timings", c_timings, "Measured wall times TSV");
    compare_cmd->add_option("--node-table", c_node_table, "Per-node TSV");
    compare_cmd->callback([&] {
      c_settings.pen = parse_penalty(penalty_s);
      c_settings.positivity = parse_positivity(positivity_s);
      std::vector<NamedTruth> truths;
      if (!c_truth.empty())
        truths.push_back({c_name, load_truth(c_truth)});
      else
        truths = benchmark_truths(c_full);
      const CompareReport report = compare(truths, c_settings);
      std::ofstream file;
      write_compare_tsv(open_out(file, out_path), report);
      if (!c_timings.empty()) {
        std::ofstream tf(c_timings);
        if (!tf) throw std::runtime_error("cannot open for writing: " + c_timings);
        write_timings_tsv(tf, report);
      }
      if (!c_node_table.empty()) {
        std::ofstream nf(c_node_table);
        if (!nf) throw std::runtime_error("cannot open for writing: " + c_node_table);
        write_node_table_tsv(nf, report);
      }
    });

    // verify-theorems ------------------------------------------------------
    auto* verify_cmd = app.add_subcommand("verify-theorems",
                                          "Numeric checks of the geometry results (TSV)");
    int v_flat = 100, v_grid = 20, v_orth = 20, v_bregman = 25, v_fixed = 50, v_slack = 1000,
        v_identity = 20, v_forms = 50;
    verify_cmd->add_option("--seed", seed, "Random seed");
    verify_cmd->add_option("--flatness", v_flat, "Geodesic flatness trials");
    verify_cmd->add_option("--grid", v_grid, "Projection grid trials");
    verify_cmd->add_option("--orthogonality", v_orth, "Orthogonality trials");
    verify_cmd->add_option("--bregman", v_bregman, "Bregman identity trials");
    verify_cmd->add_option("--fixed-point", v_fixed, "Stationary fixed-point trials");
    verify_cmd->add_option("--slack", v_slack, "Stationary-bound slack trials");
    verify_cmd->add_option("--identity", v_identity, "Optimal-CPT identity trials");
    verify_cmd->add_option("--fc-forms", v_forms, "Divergence two-form trials");
    verify_cmd->add_option("--out", out_path, "Output TSV (default stdout)");
    verify_cmd->callback([&] {
      std::vector<TrialRow> rows;
      auto append = [&rows](std::vector<TrialRow> batch) {
        rows.insert(rows.end(), batch.begin(), batch.end());
      };
      append(flatness_trials(v_flat, seed));
      append(projection_grid_trials(v_grid, seed + 1));
      append(orthogonality_trials(v_orth, seed + 2));
      append(bregman_trials(v_bregman, seed + 3));
      append(fixed_point_trials(v_fixed, seed + 4));
      append(theorem3_trials(v_slack, seed + 5));
      append(optimal_cpt_identity_trials(v_identity, seed + 6));
      append(fc_forms_trials(v_forms, seed + 7));
      std::ofstream file;
      auto& out = open_out(file, out_path);
      write_trials_tsv(out, rows);
      std::uint64_t failed = 0;
      for (const auto& r : rows) failed += r.pass ? 0 : 1;
      std::cerr << "verify-theorems: " << rows.size() - failed << "/" << rows.size()
                << " trials passed\n";
      if (failed) throw std::runtime_error(std::to_string(failed) + " trials failed");
    });

    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
