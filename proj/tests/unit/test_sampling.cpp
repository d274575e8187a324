#include "test_support.hpp"

#include "vrql/errors.hpp"
#include "vrql/sampling.hpp"

#include <doctest.h>

#include <set>

using namespace vrql;
using namespace vrql::testing;

namespace {

// Upper 0.999 quantile of chi-square via Wilson-Hilferty.
double chi_square_critical(double dof) {
  constexpr double z = 3.090232;
  const double t = 1.0 - 2.0 / (9.0 * dof) + z * std::sqrt(2.0 / (9.0 * dof));
  return dof * t * t * t;
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("alias table reproduces its distribution exactly over a uniform grid") {
  const std::vector<double> probs{0.1, 0.25, 0.05, 0.6};
  const AliasTable table(probs);
  // Each column has mass 1/n; sweeping u over a fine grid integrates it.
  constexpr int kGrid = 400000;
  std::vector<int> counts(probs.size(), 0);
  for (int i = 0; i < kGrid; ++i) ++counts[table.sample((i + 0.5) / kGrid)];
  for (std::size_t j = 0; j < probs.size(); ++j) {
    CHECK(static_cast<double>(counts[j]) / kGrid == doctest::Approx(probs[j]).epsilon(1e-4));
  }
}

TEST_CASE("alias table never emits zero-probability outcomes") {
  const std::vector<double> probs{0.0, 0.5, 0.0, 0.5, 0.0};
  const AliasTable table(probs);
  for (int i = 0; i < 10000; ++i) {
    const auto k = table.sample(i / 10000.0);
    CHECK((k == 1 || k == 3));
  }
  CHECK(table.sample(std::nextafter(1.0, 0.0)) != 4);
}

TEST_CASE("deterministic rows always return their successor") {
  const TabularMdp mdp = deterministic_mdp(5, 2, 0.9, 1);
  GenerativeSampler sampler(mdp, 3);
  for (int i = 0; i < 50; ++i) {
    const SampleMatrix x = sampler.draw();
    for (std::size_t s = 0; s < 5; ++s) {
      for (std::size_t a = 0; a < 2; ++a) CHECK(x(s, a) == (s + a + 1) % 5);
    }
  }
}

TEST_CASE("sampler frequencies pass a chi-square test on every row") {
  const TabularMdp mdp = dense_mdp(4, 2, 0.9, 77);
  GenerativeSampler sampler(mdp, 2024);
  constexpr int kDraws = 100000;
  std::vector<std::vector<int>> counts(mdp.num_pairs(), std::vector<int>(4, 0));
  for (int i = 0; i < kDraws; ++i) {
    const SampleMatrix x = sampler.draw();
    for (std::size_t p = 0; p < mdp.num_pairs(); ++p) ++counts[p][x.next_state[p]];
  }
  const double critical = chi_square_critical(3.0);
  for (std::size_t p = 0; p < mdp.num_pairs(); ++p) {
    double stat = 0.0;
    for (std::size_t n = 0; n < 4; ++n) {
      const double expected = kDraws * mdp.kernel[p * 4 + n];
      stat += (counts[p][n] - expected) * (counts[p][n] - expected) / expected;
    }
    CHECK(stat < critical);
  }
}

TEST_CASE("two-outcome row frequency within five standard errors") {
  TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 1;
  mdp.discount = 0.9;
  mdp.r_max = 0.0;
  mdp.kernel = {0.3, 0.7, 0.0, 1.0};
  mdp.reward = QFunction::Zero(2, 1);
  GenerativeSampler sampler(mdp, 5);
  constexpr int kDraws = 100000;
  int zeros = 0;
  for (int i = 0; i < kDraws; ++i) zeros += sampler.draw()(0, 0) == 0;
  const double se = std::sqrt(0.3 * 0.7 / kDraws);
  CHECK(std::abs(static_cast<double>(zeros) / kDraws - 0.3) <= 5 * se);
}

TEST_CASE("entries of one draw are independent across pairs") {
  // Two identical uniform rows; the joint table must look like a product.
  TabularMdp mdp = deterministic_mdp(3, 2, 0.9, 1);
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t n = 0; n < 3; ++n) mdp.kernel[p * 3 + n] = 1.0 / 3.0;
  }
  GenerativeSampler sampler(mdp, 8);
  constexpr int kDraws = 90000;
  std::vector<int> joint(9, 0);
  for (int i = 0; i < kDraws; ++i) {
    const SampleMatrix x = sampler.draw();
    ++joint[x(0, 0) * 3 + x(0, 1)];
  }
  double stat = 0.0;
  for (int c : joint) stat += (c - kDraws / 9.0) * (c - kDraws / 9.0) / (kDraws / 9.0);
  CHECK(stat < chi_square_critical(8.0));
}

TEST_CASE("same seed gives the same stream") {
  const TabularMdp mdp = garnet_mdp(6, 3, 3, 0.9, 4);
  GenerativeSampler a(mdp, 42);
  GenerativeSampler b(mdp, 42);
  GenerativeSampler c(mdp, 43);
  bool any_difference = false;
  for (int i = 0; i < 20; ++i) {
    const SampleMatrix xa = a.draw();
    CHECK(xa.next_state == b.draw().next_state);
    any_difference |= xa.next_state != c.draw().next_state;
  }
  CHECK(any_difference);
}

TEST_CASE("split is deterministic, label-dependent, and independent of parent position") {
  const TabularMdp mdp = garnet_mdp(6, 3, 3, 0.9, 4);
  GenerativeSampler parent(mdp, 7);
  GenerativeSampler early = parent.split("inner");
  for (int i = 0; i < 5; ++i) parent.draw();
  GenerativeSampler late = parent.split("inner");
  GenerativeSampler other = parent.split("recenter");
  CHECK(early.seed() == late.seed());
  CHECK(early.seed() == derive_stream_seed(7, "inner"));
  CHECK(other.seed() != early.seed());
  CHECK(derive_stream_seed(8, "inner") != early.seed());
  for (int i = 0; i < 10; ++i) CHECK(early.draw().next_state == late.draw().next_state);
}

TEST_CASE("children share the parent's sample counter") {
  const TabularMdp mdp = garnet_mdp(5, 2, 2, 0.9, 1);
  GenerativeSampler root(mdp, 1);
  GenerativeSampler a = root.split("a");
  GenerativeSampler b = a.split("b");
  root.draw();
  a.draw();
  a.draw();
  SampleMatrix scratch;
  b.draw_into(scratch);
  CHECK(root.samples_drawn() == 4);
  CHECK(b.samples_drawn() == 4);
  CHECK(scratch.num_states == 5);
}

TEST_CASE("derived seeds do not collide over many labels") {
  std::set<std::uint64_t> seen;
  for (int m = 0; m < 2000; ++m) seen.insert(derive_stream_seed(123, "epoch-" + std::to_string(m)));
  CHECK(seen.size() == 2000);
}

TEST_CASE("sampler validates its MDP") {
  TabularMdp mdp = garnet_mdp(3, 2, 2, 0.9, 1);
  mdp.kernel[0] += 0.1;
  CHECK_THROWS_AS(GenerativeSampler(mdp, 0), MdpError);
}

TEST_CASE("sample-average operator converges to the population operator") {
  const TabularMdp mdp = dense_mdp(4, 2, 0.8, 9);
  std::mt19937_64 rng(1);
  const QFunction theta = random_q(4, 2, rng);
  GenerativeSampler sampler(mdp, 10);
  constexpr int kDraws = 40000;
  QFunction sum = QFunction::Zero(4, 2);
  for (int i = 0; i < kDraws; ++i) {
    sum += empirical_bellman_apply(mdp.reward, mdp.discount, sampler.draw(), theta);
  }
  const QFunction sigma = sigma_star(mdp, theta);
  const QFunction diff = (sum / kDraws - bellman_apply(mdp, theta)).cwiseAbs();
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    CHECK(diff.data()[i] <= 5.0 * sigma.data()[i] / std::sqrt(double{kDraws}) + 1e-12);
  }
}

TEST_CASE("uniform two-state row: frequency of state 0 over 1e6 draws") {
  TabularMdp mdp = deterministic_mdp(2, 1, 0.9, 1);
  mdp.kernel = {0.5, 0.5, 0.5, 0.5};
  GenerativeSampler sampler(mdp, 31);
  constexpr int kDraws = 1000000;
  int zeros = 0;
  for (int i = 0; i < kDraws; ++i) zeros += sampler.draw()(0, 0) == 0;
  CHECK(std::abs(static_cast<double>(zeros) / kDraws - 0.5) <= 0.002);
}

TEST_CASE("labelled child streams are uncorrelated (permutation test)") {
  TabularMdp mdp = deterministic_mdp(2, 1, 0.9, 1);
  mdp.kernel = {0.5, 0.5, 0.5, 0.5};
  GenerativeSampler parent(mdp, 99);
  GenerativeSampler recenter = parent.split("epoch-1-recenter");
  GenerativeSampler inner = parent.split("epoch-1-inner");
  constexpr int kDraws = 100000;
  std::vector<int> a(kDraws);
  std::vector<int> b(kDraws);
  for (int i = 0; i < kDraws; ++i) {
    a[i] = recenter.draw()(0, 0);
    b[i] = inner.draw()(0, 0);
  }
  const auto agreement = [&](const std::vector<int>& y) {
    long same = 0;
    for (int i = 0; i < kDraws; ++i) same += a[i] == y[i];
    return std::abs(static_cast<double>(same) / kDraws - 0.5);
  };
  const double observed = agreement(b);
  std::mt19937_64 rng(5);
  int at_least = 0;
  constexpr int kPermutations = 200;
  for (int k = 0; k < kPermutations; ++k) {
    std::shuffle(b.begin(), b.end(), rng);
    at_least += agreement(b) >= observed;
  }
  CHECK(at_least >= 1);  // p-value above 1 / (kPermutations + 1) is not rejected
  CHECK(observed <= 4.0 * 0.5 / std::sqrt(double{kDraws}));
}

}  // TEST_SUITE
