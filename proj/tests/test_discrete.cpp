#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "depnet/discrete.hpp"
#include "depnet/rng.hpp"
#include "depnet/verify.hpp"
#include "oracles.hpp"

using namespace depnet;
using Catch::Matchers::WithinAbs;

namespace {

Dataset make_dataset(std::vector<int> cards, std::vector<Assignment> rows) {
  return Dataset(VarSpace(std::move(cards)), std::move(rows));
}

}  // namespace

TEST_CASE("VarSpace indexing round-trips and rejects bad input") {
  VarSpace space({2, 3, 2});
  REQUIRE(space.total_states() == 12);
  REQUIRE(space.stride(0) == 6);  // variable 0 is the most significant digit
  REQUIRE(space.stride(2) == 1);
  for (std::uint64_t idx = 0; idx < space.total_states(); ++idx)
    REQUIRE(space.index_of(space.assignment_of(idx)) == idx);
  REQUIRE(space.index_of({1, 2, 0}) == 10);

  REQUIRE_THROWS_AS(VarSpace({2, 1}), std::invalid_argument);
  REQUIRE_THROWS_AS(VarSpace(std::vector<int>{}), std::invalid_argument);
  REQUIRE_THROWS_AS(space.index_of({2, 0, 0}), std::invalid_argument);
  // 64 binary variables would overflow the 64-bit index.
  REQUIRE_THROWS_AS(VarSpace(std::vector<int>(64, 2)), std::invalid_argument);
}

TEST_CASE("JointTable validates entries") {
  VarSpace space({2, 2});
  REQUIRE_THROWS_AS(JointTable(space, {0.5, 0.5, 0.1, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(JointTable(space, {0.5, 0.5}), std::invalid_argument);
  REQUIRE_THROWS_AS(JointTable(space, {1.1, -0.1, 0.0, 0.0}), std::invalid_argument);
  const JointTable u = JointTable::uniform(space);
  REQUIRE_THAT(u[3], WithinAbs(0.25, 1e-15));
}

TEST_CASE("empirical_distribution counts rows") {
  SECTION("two binary variables") {
    const auto d = make_dataset({2, 2}, {{0, 0}, {0, 0}, {1, 1}, {1, 1}});
    const JointTable p = empirical_distribution(d);
    REQUIRE_THAT(p[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(p[1], WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(p[2], WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(p[3], WithinAbs(0.5, 1e-15));
  }
  SECTION("single row") {
    const auto d = make_dataset({2}, {{0}});
    const JointTable p = empirical_distribution(d);
    REQUIRE_THAT(p[0], WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(p[1], WithinAbs(0.0, 1e-15));
  }
  SECTION("ternary variable") {
    const auto d = make_dataset({3}, {{0}, {1}, {1}, {2}});
    const JointTable p = empirical_distribution(d);
    REQUIRE_THAT(p[0], WithinAbs(0.25, 1e-15));
    REQUIRE_THAT(p[1], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(p[2], WithinAbs(0.25, 1e-15));
  }
  SECTION("empty dataset") {
    REQUIRE_THROWS_WITH(empirical_distribution(make_dataset({2}, {})), "empty dataset");
  }
}

TEST_CASE("empirical counts can be reconstructed exactly") {
  RngStream rng(11, RngUse::Structure);
  const VarSpace space({2, 3, 2});
  std::vector<Assignment> rows;
  std::vector<std::uint64_t> counts(space.total_states(), 0);
  for (int t = 0; t < 999; ++t) {
    const auto idx = rng.next_below(space.total_states());
    ++counts[idx];
    rows.push_back(space.assignment_of(idx));
  }
  const JointTable p = empirical_distribution(Dataset(space, rows));
  for (std::uint64_t x = 0; x < space.total_states(); ++x)
    REQUIRE(static_cast<std::uint64_t>(std::llround(p[x] * 999.0)) == counts[x]);
}

TEST_CASE("marginal sums out the other variables") {
  const VarSpace space({2, 2});
  SECTION("uniform pair") {
    const JointTable m = marginal(JointTable::uniform(space), {0});
    REQUIRE_THAT(m[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(m[1], WithinAbs(0.5, 1e-15));
  }
  SECTION("correlated pair to second variable") {
    const JointTable p(space, {0.5, 0.0, 0.0, 0.5});
    const JointTable m = marginal(p, {1});
    REQUIRE_THAT(m[0], WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(m[1], WithinAbs(0.5, 1e-15));
  }
  SECTION("hand-summed rows") {
    const JointTable p(space, {0.4, 0.1, 0.2, 0.3});
    const JointTable m = marginal(p, {0});
    REQUIRE_THAT(m[0], WithinAbs(0.4 + 0.1, 1e-15));
    REQUIRE_THAT(m[1], WithinAbs(0.2 + 0.3, 1e-15));
  }
  SECTION("errors") {
    const JointTable p = JointTable::uniform(space);
    REQUIRE_THROWS_AS(marginal(p, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(marginal(p, {2}), std::invalid_argument);
    REQUIRE_THROWS_AS(marginal(p, {0, 0}), std::invalid_argument);
  }
}

TEST_CASE("conditional tables") {
  const VarSpace space({2, 2});
  SECTION("deterministic copy") {
    const JointTable p(space, {0.5, 0.0, 0.0, 0.5});
    const ConditionalTable ct = conditional(p, {1}, {0});
    REQUIRE_THAT(ct.row(0)[0], WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(ct.row(0)[1], WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(ct.row(1)[0], WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(ct.row(1)[1], WithinAbs(1.0, 1e-15));
  }
  SECTION("independent uniform pair") {
    const ConditionalTable ct = conditional(JointTable::uniform(space), {0}, {1});
    for (std::uint64_t g = 0; g < 2; ++g) {
      REQUIRE_THAT(ct.row(g)[0], WithinAbs(0.5, 1e-15));
      REQUIRE_THAT(ct.row(g)[1], WithinAbs(0.5, 1e-15));
    }
  }
  SECTION("hand-computed row") {
    const JointTable p(space, {0.4, 0.1, 0.2, 0.3});
    const ConditionalTable ct = conditional(p, {0}, {1});
    REQUIRE_THAT(ct.row(0)[0], WithinAbs(2.0 / 3.0, 1e-15));  // 0.4 / (0.4 + 0.2)
    REQUIRE_THAT(ct.row(0)[1], WithinAbs(1.0 / 3.0, 1e-15));
  }
  SECTION("zero-mass rows are flagged undefined") {
    const JointTable p(space, {0.5, 0.5, 0.0, 0.0});
    const ConditionalTable ct = conditional(p, {1}, {0});
    REQUIRE(ct.row_defined(0));
    REQUIRE_FALSE(ct.row_defined(1));
  }
  SECTION("overlap is rejected") {
    REQUIRE_THROWS_AS(conditional(JointTable::uniform(space), {0}, {0}), std::invalid_argument);
  }
}

TEST_CASE("entropy") {
  SECTION("uniform binary") {
    REQUIRE_THAT(entropy(JointTable::uniform(VarSpace({2})), {0}),
                 WithinAbs(std::log(2.0), 1e-12));
  }
  SECTION("deterministic variable") {
    REQUIRE_THAT(entropy(JointTable(VarSpace({2}), {1.0, 0.0}), {0}), WithinAbs(0.0, 1e-15));
  }
  SECTION("skewed coin, frozen against the direct-sum oracle") {
    const std::vector<double> probs{0.625, 0.375};
    REQUIRE_THAT(oracles::entropy_direct(probs), WithinAbs(0.6615632381579821, 1e-12));
    REQUIRE_THAT(entropy(JointTable(VarSpace({2}), probs), {0}),
                 WithinAbs(0.6615632381579821, 1e-12));
  }
}

TEST_CASE("conditional entropy") {
  const VarSpace space({2, 2});
  SECTION("independent pair") {
    REQUIRE_THAT(conditional_entropy(JointTable::uniform(space), {0}, {1}),
                 WithinAbs(std::log(2.0), 1e-12));
  }
  SECTION("perfectly correlated pair") {
    const JointTable p(space, {0.5, 0.0, 0.0, 0.5});
    REQUIRE_THAT(conditional_entropy(p, {0}, {1}), WithinAbs(0.0, 1e-12));
  }
  SECTION("frozen against the chain-rule oracle") {
    const std::vector<double> probs{0.4, 0.1, 0.2, 0.3};
    const double expected = oracles::cond_entropy_2x2_first_given_second(probs);
    REQUIRE_THAT(expected, WithinAbs(0.6068425588244111, 1e-12));
    REQUIRE_THAT(conditional_entropy(JointTable(space, probs), {0}, {1}),
                 WithinAbs(expected, 1e-12));
  }
  SECTION("empty given set equals plain entropy") {
    const JointTable p(space, {0.4, 0.1, 0.2, 0.3});
    REQUIRE_THAT(conditional_entropy(p, {0}, {}), WithinAbs(entropy(p, {0}), 1e-15));
  }
  SECTION("overlap is rejected") {
    REQUIRE_THROWS_AS(conditional_entropy(JointTable::uniform(space), {0}, {0}),
                      std::invalid_argument);
  }
}

TEST_CASE("kl divergence") {
  const VarSpace space({2});
  SECTION("identity") {
    const JointTable p(space, {0.3, 0.7});
    REQUIRE_THAT(kl_divergence(p, p), WithinAbs(0.0, 1e-15));
  }
  SECTION("frozen two-term value") {
    const JointTable p(space, {0.75, 0.25});
    const JointTable q(space, {0.5, 0.5});
    REQUIRE_THAT(oracles::kl_direct({0.75, 0.25}, {0.5, 0.5}),
                 WithinAbs(0.13081203594113697, 1e-12));
    REQUIRE_THAT(kl_divergence(p, q), WithinAbs(0.13081203594113697, 1e-12));
  }
  SECTION("support mismatch is infinite") {
    const JointTable p(space, {1.0, 0.0});
    const JointTable q(space, {0.0, 1.0});
    REQUIRE(std::isinf(kl_divergence(p, q)));
    REQUIRE_THAT(kl_divergence(q, q), WithinAbs(0.0, 1e-15));
  }
  SECTION("mismatched spaces are rejected") {
    REQUIRE_THROWS_AS(
        kl_divergence(JointTable::uniform(space), JointTable::uniform(VarSpace({3}))),
        std::invalid_argument);
  }
}

TEST_CASE("random-table properties: normalization, non-negativity, chain rule") {
  RngStream rng(202, RngUse::Structure);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    std::vector<int> cards;
    for (int i = 0; i < n; ++i) cards.push_back(2 + static_cast<int>(rng.next_below(2)));
    const VarSpace space{cards};
    const JointTable p = random_joint(space, rng);

    std::vector<int> target{0}, given;
    for (int i = 1; i < n; ++i) (rng.next_double() < 0.5 ? target : given).push_back(i);

    const JointTable m = marginal(p, target);
    REQUIRE_THAT(detail::stable_sum(m.probs()), WithinAbs(1.0, 1e-12));

    REQUIRE(entropy(p, target) >= -1e-12);
    const double h_cond = conditional_entropy(p, target, given);
    REQUIRE(h_cond >= -1e-12);

    // Chain rule: H(T u G) = H(G) + H(T | G).
    std::vector<int> both = target;
    both.insert(both.end(), given.begin(), given.end());
    const double lhs = entropy(p, both);
    const double rhs = (given.empty() ? 0.0 : entropy(p, given)) + h_cond;
    REQUIRE_THAT(lhs, WithinAbs(rhs, 1e-10));

    const JointTable q = random_joint(space, rng);
    REQUIRE(kl_divergence(p, q) >= -1e-12);
  }
}
