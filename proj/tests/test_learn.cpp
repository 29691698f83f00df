#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "depnet/infogeo.hpp"
#include "depnet/io.hpp"
#include "depnet/learn.hpp"
#include "depnet/synth.hpp"
#include "depnet/verify.hpp"
#include "oracles.hpp"

using namespace depnet;
using Catch::Matchers::WithinAbs;

namespace {

// N copies of each listed row.
Dataset repeated(const VarSpace& space, const std::vector<std::pair<Assignment, int>>& spec) {
  std::vector<Assignment> rows;
  for (const auto& [row, count] : spec)
    for (int k = 0; k < count; ++k) rows.push_back(row);
  return Dataset(space, rows);
}

}  // namespace

TEST_CASE("penalty formulas") {
  REQUIRE_THAT(penalty(Penalty::Mdl, 2, 1, 8), WithinAbs(std::log(8.0) / 16.0, 1e-15));
  REQUIRE_THAT(penalty(Penalty::Mdl, 2, 1, 8), WithinAbs(0.12996509635498973, 1e-12));
  REQUIRE_THAT(penalty(Penalty::Aic, 2, 2, 1000), WithinAbs(0.002, 1e-15));
  REQUIRE_THAT(penalty(Penalty::None, 4, 64, 10), WithinAbs(0.0, 1e-15));
  REQUIRE_THROWS_AS(penalty(Penalty::Aic, 2, 1, 0), std::invalid_argument);
}

TEST_CASE("learn_parameters") {
  const VarSpace space = VarSpace::binary(2);
  SECTION("zero counts get one added under positivity") {
    // X_0 = 1 on all 7 rows where X_1 = 0.
    const Dataset d = repeated(space, {{{1, 0}, 7}, {{0, 1}, 1}, {{1, 1}, 1}});
    const Cpt cpt = learn_parameters(d, 0, {1}, true);
    REQUIRE_THAT(cpt.row(0)[0], WithinAbs(1.0 / 8.0, 1e-15));
    REQUIRE_THAT(cpt.row(0)[1], WithinAbs(7.0 / 8.0, 1e-15));
  }
  SECTION("plain counting estimate") {
    const Dataset d = repeated(space, {{{0, 0}, 5}, {{1, 0}, 3}});
    const Cpt cpt = learn_parameters(d, 0, {}, false);
    REQUIRE_THAT(cpt.row(0)[0], WithinAbs(0.625, 1e-15));
    REQUIRE_THAT(cpt.row(0)[1], WithinAbs(0.375, 1e-15));
  }
  SECTION("unseen input row") {
    const Dataset d = repeated(space, {{{0, 0}, 4}, {{1, 0}, 4}});
    const Cpt with = learn_parameters(d, 0, {1}, true);
    REQUIRE_THAT(with.row(1)[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(with.row(1)[1], WithinAbs(0.5, 1e-15));
    const Cpt without = learn_parameters(d, 0, {1}, false);
    REQUIRE(without.defined(0));
    REQUIRE_FALSE(without.defined(1));
  }
  SECTION("positivity lower bound holds on random data") {
    RngStream rng(3, RngUse::Structure);
    const VarSpace sp({2, 3, 2});
    const JointTable truth = random_joint(sp, rng);
    const Dataset d = sample_joint(truth, 200, 17);
    for (int i = 0; i < 3; ++i) {
      const Cpt cpt = learn_parameters(d, i, random_input_set(3, i, rng), true);
      std::uint64_t y_states = cpt.num_rows();
      const double bound =
          1.0 / (static_cast<double>(d.size()) +
                 static_cast<double>(cpt.child_card) * static_cast<double>(y_states));
      for (double e : cpt.entries) REQUIRE(e >= bound);
    }
  }
}

TEST_CASE("scost") {
  const VarSpace space = VarSpace::binary(2);
  SECTION("entropy plus penalty, frozen") {
    const Dataset d = repeated(space, {{{0, 0}, 5}, {{1, 0}, 3}});
    REQUIRE_THAT(scost(d, 0, {}, Penalty::Mdl),
                 WithinAbs(0.6615632381579821 + 0.12996509635498973, 1e-12));
  }
  SECTION("deterministic copy scores zero without penalty") {
    const Dataset d = repeated(space, {{{0, 0}, 6}, {{1, 1}, 6}});
    REQUIRE_THAT(scost(d, 0, {1}, Penalty::None), WithinAbs(0.0, 1e-15));
  }
  SECTION("empty inputs give the marginal entropy") {
    const Dataset d = repeated(space, {{{0, 0}, 5}, {{1, 0}, 3}});
    const JointTable emp = empirical_distribution(d);
    REQUIRE_THAT(scost(d, 0, {}, Penalty::None), WithinAbs(entropy(emp, {0}), 1e-12));
  }
  SECTION("raw counts, not positivity-adjusted ones") {
    const Dataset d = repeated(space, {{{1, 0}, 8}});
    REQUIRE_THAT(scost(d, 0, {}, Penalty::None), WithinAbs(0.0, 1e-15));
  }
}

TEST_CASE("learn_structure_node") {
  SECTION("independent variables keep an empty input set") {
    // Product of two fair coins, in exact proportions.
    const VarSpace space = VarSpace::binary(2);
    const Dataset d =
        repeated(space, {{{0, 0}, 250}, {{0, 1}, 250}, {{1, 0}, 250}, {{1, 1}, 250}});
    const auto res = learn_structure_node(d, 0, Penalty::Mdl);
    REQUIRE(res.inputs.empty());
    // The single candidate {X_1} was evaluated and rejected: the entropy
    // drop is zero while the penalty doubles.
    REQUIRE(res.evaluations == 1);
    REQUIRE(scost(d, 0, {1}, Penalty::Mdl) > scost(d, 0, {}, Penalty::Mdl));
  }
  SECTION("a deterministic partner is picked up") {
    const VarSpace space = VarSpace::binary(2);
    const Dataset d = repeated(space, {{{0, 0}, 500}, {{1, 1}, 500}});
    const auto res = learn_structure_node(d, 0, Penalty::Mdl);
    REQUIRE(res.inputs == std::vector<int>{1});
    REQUIRE_THAT(penalty(Penalty::Mdl, 2, 2, 1000), WithinAbs(0.006907755278982137, 1e-12));
  }
  SECTION("single-node network needs no candidate evaluations") {
    const Dataset d = repeated(VarSpace({2}), {{{0}, 3}, {{1}, 5}});
    const auto res = learn_structure_node(d, 0, Penalty::Mdl);
    REQUIRE(res.inputs.empty());
    REQUIRE(res.evaluations == 0);
  }
  SECTION("accepted costs decrease strictly") {
    RngStream rng(11, RngUse::Structure);
    const VarSpace space = VarSpace::binary(4);
    const JointTable truth = random_joint(space, rng, 0.005);
    const Dataset d = sample_joint(truth, 2000, 23);
    for (int i = 0; i < 4; ++i) {
      const auto res = learn_structure_node(d, i, Penalty::Aic);
      for (std::size_t k = 1; k < res.accepted_costs.size(); ++k)
        REQUIRE(res.accepted_costs[k] < res.accepted_costs[k - 1]);
    }
  }
  SECTION("guard falls back to the full input set when it scores better") {
    // Parity-like data: X_0 = X_1 xor X_2, so single additions explain
    // nothing and greedy stalls at the empty set under no penalty.
    const VarSpace space = VarSpace::binary(3);
    const Dataset d = repeated(
        space, {{{0, 0, 0}, 25}, {{1, 0, 1}, 25}, {{1, 1, 0}, 25}, {{0, 1, 1}, 25}});
    const auto plain = learn_structure_node(d, 0, Penalty::None, false);
    REQUIRE(plain.inputs.empty());
    const auto guarded = learn_structure_node(d, 0, Penalty::None, true);
    REQUIRE(guarded.inputs == std::vector<int>{1, 2});
  }
}

TEST_CASE("learn_dn") {
  SECTION("independent uniform pair") {
    const Dataset d = sample_joint(JointTable::uniform(VarSpace::binary(2)), 10000, 7);
    const auto res = learn_dn(d, Penalty::Mdl);
    for (int i = 0; i < 2; ++i) {
      REQUIRE(res.net.nodes[i].inputs.empty());
      REQUIRE_THAT(res.net.nodes[i].row(0)[0], WithinAbs(0.5, 0.02));
    }
  }
  SECTION("perfectly correlated pair with positivity leakage") {
    const VarSpace space = VarSpace::binary(2);
    const Dataset d = repeated(space, {{{0, 0}, 500}, {{1, 1}, 500}});
    const auto res = learn_dn(d, Penalty::Mdl, true);
    REQUIRE(res.net.nodes[0].inputs == std::vector<int>{1});
    REQUIRE(res.net.nodes[1].inputs == std::vector<int>{0});
    // Counts per row are (500, 0) -> (500, 1)/501 after the trick.
    REQUIRE_THAT(res.net.nodes[0].row(0)[0], WithinAbs(500.0 / 501.0, 1e-15));
    REQUIRE_THAT(res.net.nodes[0].row(0)[1], WithinAbs(1.0 / 501.0, 1e-15));
  }
  SECTION("single-row dataset keeps empty inputs") {
    const Dataset d = repeated(VarSpace::binary(3), {{{1, 0, 1}, 1}});
    const auto res = learn_dn(d, Penalty::Mdl, true);
    for (int i = 0; i < 3; ++i) REQUIRE(res.net.nodes[i].inputs.empty());
    REQUIRE(res.scost_evaluations == 3 * 2);  // each node evaluated its two add candidates
    REQUIRE_THAT(res.net.nodes[0].row(0)[1], WithinAbs(0.5, 1e-15));  // counts (0,1) -> (1,1)/2
  }
  SECTION("deterministic: identical settings give identical models") {
    RngStream rng(13, RngUse::Structure);
    const JointTable truth = random_joint(VarSpace::binary(3), rng, 0.01);
    const Dataset d = sample_joint(truth, 500, 99);
    const auto a = learn_dn(d, Penalty::Mdl);
    const auto b = learn_dn(d, Penalty::Mdl);
    REQUIRE(a.scost_evaluations == b.scost_evaluations);
    std::ostringstream sa, sb;
    write_depnet(sa, a.net);
    write_depnet(sb, b.net);
    REQUIRE(sa.str() == sb.str());
  }
}

TEST_CASE("learned CPT minimizes the manifold divergence for its inputs") {
  RngStream rng(17, RngUse::Structure);
  const VarSpace space = VarSpace::binary(3);
  const JointTable truth = random_joint(space, rng, 0.01);
  const Dataset d = sample_joint(truth, 300, 31);
  const JointTable emp = empirical_distribution(d);

  for (int i = 0; i < 3; ++i) {
    const auto inputs = random_input_set(3, i, rng);
    const Cpt best = learn_parameters(d, i, inputs, false);
    const double best_kl = kl_to_manifold(emp, best);
    for (int t = 0; t < 100; ++t) {
      // Random perturbation of the optimal rows, kept positive.
      Cpt other = best;
      for (std::uint64_t y = 0; y < other.num_rows(); ++y) {
        if (!other.defined(y)) continue;
        double s = 0.0;
        for (int v = 0; v < other.child_card; ++v) {
          auto& e = other.entries[y * other.child_card + v];
          e = std::max(1e-6, e + 0.3 * (rng.next_double() - 0.5));
          s += e;
        }
        for (int v = 0; v < other.child_card; ++v) other.entries[y * other.child_card + v] /= s;
      }
      REQUIRE(kl_to_manifold(emp, other) >= best_kl - 1e-12);
    }
  }
}

TEST_CASE("manifold divergence identity for learned parameters") {
  for (const auto& row : optimal_cpt_identity_trials(8, 37)) {
    INFO("trial " << row.trial << " err " << row.value);
    REQUIRE(row.pass);
  }
}

TEST_CASE("guarded search bounds the manifold divergence by the full penalty") {
  // Nested training sets from one positive truth; with the guard on and
  // positivity off, KL(emp || E(theta_i)) <= R_i(X_{-i}, N) at every N.
  RngStream rng(19, RngUse::Structure);
  const VarSpace space = VarSpace::binary(4);
  const JointTable truth = random_joint(space, rng, 0.01);
  const Dataset full = sample_joint(truth, 100000, 77);

  for (std::uint64_t n : {100ULL, 1000ULL, 10000ULL, 100000ULL}) {
    const Dataset d(space, {full.rows.begin(), full.rows.begin() + n});
    const JointTable emp = empirical_distribution(d);
    for (int i = 0; i < 4; ++i) {
      const auto res = learn_structure_node(d, i, Penalty::Mdl, true);
      const Cpt cpt = learn_parameters(d, i, res.inputs, false);
      const double bound = penalty(Penalty::Mdl, 2, 8, n);  // |X_{-i}| states = 2^3
      REQUIRE(kl_to_manifold(emp, cpt) <= bound + 1e-12);
    }
  }
}
