#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "depnet/infogeo.hpp"
#include "depnet/io.hpp"
#include "depnet/sampler.hpp"
#include "depnet/verify.hpp"

using namespace depnet;
using Catch::Matchers::WithinAbs;

namespace {

DependencyNetwork single_node(double p1) {
  DependencyNetwork dn;
  dn.space = VarSpace({2});
  dn.nodes.push_back(make_cpt(dn.space, 0, {}, {1.0 - p1, p1}));
  dn.weights = SelectionWeights::uniform(1);
  return dn;
}

}  // namespace

TEST_CASE("fire_node") {
  const VarSpace space = VarSpace::binary(2);
  RngStream rng(1, RngUse::ValueDraw);
  SECTION("deterministic row never moves") {
    const Cpt cpt = make_cpt(space, 0, {}, {1.0, 0.0});
    Assignment state{1, 1};
    for (int t = 0; t < 100; ++t) {
      state = fire_node(state, cpt, rng);
      REQUIRE(state[0] == 0);
      REQUIRE(state[1] == 1);  // only the fired component may change
    }
  }
  SECTION("fair row frequency") {
    const Cpt cpt = make_cpt(space, 0, {}, {0.5, 0.5});
    Assignment state{0, 0};
    std::uint64_t ones = 0;
    for (int t = 0; t < 100000; ++t) {
      fire_node_inplace(state, cpt, rng);
      ones += state[0];
    }
    REQUIRE_THAT(static_cast<double>(ones) / 100000.0, WithinAbs(0.5, 0.01));
  }
  SECTION("undefined row names the node and inputs") {
    Cpt cpt = make_cpt(space, 0, {1}, {0.5, 0.5, 0.0, 0.0}, {1, 0});
    Assignment state{0, 1};
    REQUIRE_THROWS_WITH(fire_node(state, cpt, rng),
                        Catch::Matchers::ContainsSubstring("node 0") &&
                            Catch::Matchers::ContainsSubstring("X1=1"));
  }
}

TEST_CASE("run on a single node draws from its row") {
  SamplerConfig cfg;
  cfg.n_samples = 1'000'000;
  cfg.burn_in = 0;
  cfg.thin = 1;
  cfg.seed = 7;
  const SampleRun out = run(single_node(0.3), cfg);
  REQUIRE(out.outputs.size() == cfg.n_samples);
  REQUIRE(out.steps_taken == cfg.n_samples);
  double ones = 0.0;
  for (const auto& row : out.outputs.rows) ones += row[0];
  REQUIRE_THAT(ones / static_cast<double>(cfg.n_samples), WithinAbs(0.3, 0.002));
}

TEST_CASE("run matches the exact stationary distribution") {
  RngStream rng(11, RngUse::Structure);
  SECTION("compatible CPTs reproduce p") {
    const JointTable p = random_joint(VarSpace::binary(3), rng, 0.02);
    const DependencyNetwork dn = compatible_depnet(p);
    SamplerConfig cfg;
    cfg.mode = SamplerConfig::Mode::Random;
    cfg.n_samples = 1'000'000;
    cfg.burn_in = 30;
    cfg.thin = 3;
    cfg.seed = 21;
    const JointTable emp = empirical_distribution(run(dn, cfg).outputs);
    REQUIRE(tv_distance(emp, p) < 0.01);
  }
  SECTION("incompatible CPTs approach the solved fixed vector") {
    const DependencyNetwork dn = random_depnet(VarSpace::binary(3), rng, 0.05);
    SamplerConfig cfg;
    cfg.n_samples = 1'000'000;
    cfg.burn_in = 300;
    cfg.thin = 3;
    cfg.seed = 22;
    const JointTable emp = empirical_distribution(run(dn, cfg).outputs);
    REQUIRE(tv_distance(emp, stationary_exact(dn)) < 0.01);
  }
}

TEST_CASE("run respects clamps and rejects all-clamped runs") {
  RngStream rng(13, RngUse::Structure);
  const DependencyNetwork dn = random_depnet(VarSpace::binary(3), rng, 0.05);
  SamplerConfig cfg;
  cfg.n_samples = 5000;
  cfg.seed = 5;
  cfg.clamps = Evidence({{1, 1}});
  const SampleRun out = run(dn, cfg);
  for (const auto& row : out.outputs.rows) REQUIRE(row[1] == 1);

  cfg.clamps = Evidence({{0, 0}, {1, 0}, {2, 1}});
  REQUIRE_THROWS_WITH(run(dn, cfg), "all nodes clamped");
}

TEST_CASE("run is bit-deterministic given the seed") {
  RngStream rng(17, RngUse::Structure);
  const DependencyNetwork dn = random_depnet(VarSpace::binary(3), rng, 0.05);
  SamplerConfig cfg;
  cfg.n_samples = 2000;
  cfg.seed = 123;
  const SampleRun a = run(dn, cfg);
  const SampleRun b = run(dn, cfg);
  std::ostringstream sa, sb;
  write_dataset(sa, a.outputs);
  write_dataset(sb, b.outputs);
  REQUIRE(sa.str() == sb.str());

  cfg.seed = 124;
  const SampleRun c = run(dn, cfg);
  std::ostringstream sc;
  write_dataset(sc, c.outputs);
  REQUIRE(sa.str() != sc.str());
}

TEST_CASE("ordered mode visits unclamped nodes cyclically") {
  // With deterministic copy CPTs the trace exposes the firing order.
  DependencyNetwork dn;
  dn.space = VarSpace::binary(2);
  dn.nodes.push_back(make_cpt(dn.space, 0, {1}, {1.0, 0.0, 0.0, 1.0}));  // X_0 <- X_1
  dn.nodes.push_back(make_cpt(dn.space, 1, {0}, {0.0, 1.0, 1.0, 0.0}));  // X_1 <- not X_0
  dn.weights = SelectionWeights::uniform(2);
  SamplerConfig cfg;
  cfg.mode = SamplerConfig::Mode::Ordered;
  cfg.n_samples = 6;
  cfg.burn_in = 0;
  cfg.thin = 1;
  cfg.initial = Assignment{0, 0};
  // Fires 0,1,0,1,...: states (0,0) -> (0,0) -> (0,1) -> (1,1) -> (1,0) -> (0,0) ...
  const SampleRun out = run(dn, cfg);
  REQUIRE(out.outputs.rows[0] == Assignment{0, 0});
  REQUIRE(out.outputs.rows[1] == Assignment{0, 0});
  REQUIRE(out.outputs.rows[2] == Assignment{0, 1});
  REQUIRE(out.outputs.rows[3] == Assignment{1, 1});
  REQUIRE(out.outputs.rows[4] == Assignment{1, 0});
  REQUIRE(out.outputs.rows[5] == Assignment{0, 0});
}

TEST_CASE("clamped run equals the free run on the reduced network") {
  RngStream rng(19, RngUse::Structure);
  const VarSpace space = VarSpace::binary(3);
  const DependencyNetwork dn = random_depnet(space, rng, 0.05);
  const Evidence ev({{2, 1}});

  // Reduced network over {X_0, X_1} with X_2 = 1 substituted into the CPTs.
  DependencyNetwork reduced;
  reduced.space = VarSpace::binary(2);
  for (int i = 0; i < 2; ++i) {
    const Cpt& src = dn.nodes[i];
    std::vector<int> new_inputs;
    for (int id : src.inputs)
      if (id != 2) new_inputs.push_back(id);
    std::vector<double> entries;
    const auto rows = [&] {
      std::uint64_t r = 1;
      for (int id : new_inputs) r *= 2;
      return r;
    }();
    for (std::uint64_t y = 0; y < rows; ++y) {
      Assignment full(3, 0);
      full[2] = 1;
      // Decode y over new_inputs (first input most significant).
      std::uint64_t rest = y;
      for (std::size_t j = new_inputs.size(); j-- > 0;) {
        full[new_inputs[j]] = static_cast<int>(rest % 2);
        rest /= 2;
      }
      const auto row = src.row(src.y_index(full));
      entries.insert(entries.end(), row.begin(), row.end());
    }
    reduced.nodes.push_back(make_cpt(reduced.space, i, new_inputs, std::move(entries)));
  }
  reduced.weights = SelectionWeights::uniform(2);

  const JointTable reduced_pi = stationary_exact(reduced);
  SamplerConfig cfg;
  cfg.n_samples = 400'000;
  cfg.seed = 29;
  cfg.clamps = ev;
  const SampleRun clamped = run(dn, cfg);
  std::vector<double> counts(4, 0.0);
  for (const auto& row : clamped.outputs.rows) counts[2 * row[0] + row[1]] += 1.0;
  const JointTable emp = JointTable::from_unnormalized(reduced.space, std::move(counts));
  REQUIRE(tv_distance(emp, reduced_pi) < 0.015);
}

TEST_CASE("infer") {
  RngStream rng(23, RngUse::Structure);
  const JointTable p = random_joint(VarSpace::binary(2), rng, 0.05);
  const DependencyNetwork dn = compatible_depnet(p);
  SECTION("conditional estimate approaches the exact conditional") {
    SamplerConfig cfg;
    cfg.n_samples = 1'000'000;
    cfg.seed = 31;
    const auto res = infer(dn, Evidence({{1, 1}}), {}, cfg);
    REQUIRE(res.query == std::vector<int>{0});
    const ConditionalTable exact = conditional(p, {0}, {1});
    REQUIRE_THAT(res.estimate[0], WithinAbs(exact.row(1)[0], 0.01));
    REQUIRE_THAT(res.estimate[1], WithinAbs(exact.row(1)[1], 0.01));
  }
  SECTION("free single-node query matches the run marginal") {
    const DependencyNetwork one = single_node(0.3);
    SamplerConfig cfg;
    cfg.n_samples = 200'000;
    cfg.seed = 37;
    const auto res = infer(one, {}, {0}, cfg);
    const JointTable emp = empirical_distribution(run(one, cfg).outputs);
    REQUIRE_THAT(res.estimate[0], WithinAbs(emp[0], 1e-12));
    REQUIRE_THAT(res.estimate[1], WithinAbs(emp[1], 1e-12));
  }
  SECTION("clamping everything except one node draws its row i.i.d.") {
    RngStream rng2(41, RngUse::Structure);
    const DependencyNetwork dn3 = random_depnet(VarSpace::binary(3), rng2, 0.05);
    SamplerConfig cfg;
    cfg.n_samples = 400'000;
    cfg.seed = 43;
    const Evidence ev({{0, 1}, {2, 0}});
    const auto res = infer(dn3, ev, {}, cfg);
    Assignment probe{1, 0, 0};
    const auto row = dn3.nodes[1].row(dn3.nodes[1].y_index(probe));
    REQUIRE_THAT(res.estimate[0], WithinAbs(row[0], 0.005));
    REQUIRE_THAT(res.estimate[1], WithinAbs(row[1], 0.005));
  }
  SECTION("querying a clamped variable is rejected") {
    SamplerConfig cfg;
    cfg.n_samples = 10;
    REQUIRE_THROWS_AS(infer(dn, Evidence({{1, 1}}), {1}, cfg), std::invalid_argument);
  }
}
