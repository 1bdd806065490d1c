#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relex/deptree.hpp"
#include "relex/rng.hpp"

using namespace relex;

namespace {

// Floyd-Warshall over the undirected tree edges, the brute-force oracle
std::vector<std::vector<int>> all_pairs_oracle(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (int i = 0; i < n; ++i)
    if (heads[i] >= 0) d[i][heads[i]] = d[heads[i]][i] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

std::vector<int> random_tree(Rng& rng, int n) {
  std::vector<int> heads(n, -1);
  for (int i = 1; i < n; ++i) heads[i] = rng.below_int(i);
  return heads;
}

}  // namespace

TEST_CASE("build_tree validates structure") {
  const DepTree tree = build_tree({1, -1, 3, 1});
  CHECK(tree.root == 1);
  CHECK(tree.n() == 4);

  CHECK_THROWS_AS(build_tree({1, 0}), std::invalid_argument);         // cycle
  CHECK_THROWS_AS(build_tree({-1, -1, 0}), std::invalid_argument);    // two roots
  CHECK_THROWS_AS(build_tree({0, -1}), std::invalid_argument);        // self-loop
  CHECK_THROWS_AS(build_tree({-1, 5}), std::invalid_argument);        // out of range
  CHECK_THROWS_AS(build_tree({1, 0, -1}), std::invalid_argument);     // disconnected cycle
  CHECK_THROWS_AS(build_tree({}), std::invalid_argument);
}

TEST_CASE("token_distances follows the worked example") {
  const DepTree tree = build_tree({1, -1, 3, 1});
  CHECK(token_distances(tree, 0) == std::vector<int>{0, 1, 3, 2});
  CHECK(token_distances(tree, 0)[0] == 0);
  CHECK_THROWS_AS(token_distances(tree, 4), std::out_of_range);
}

TEST_CASE("token_distances matches the all-pairs oracle on random trees") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + rng.below_int(12);
    const auto heads = random_tree(rng, n);
    const DepTree tree = build_tree(heads);
    const auto oracle = all_pairs_oracle(heads);
    for (int src = 0; src < n; ++src) {
      const auto dist = token_distances(tree, src);
      for (int v = 0; v < n; ++v) CHECK(dist[v] == oracle[src][v]);
    }
  }
}

TEST_CASE("distance symmetry and per-edge step property") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + rng.below_int(10);
    const auto heads = random_tree(rng, n);
    const DepTree tree = build_tree(heads);
    const int a = rng.below_int(n);
    const int b = rng.below_int(n);
    CHECK(token_distances(tree, a)[b] == token_distances(tree, b)[a]);
    const auto dist = token_distances(tree, a);
    for (int v = 0; v < n; ++v)
      if (heads[v] >= 0) CHECK(std::abs(dist[v] - dist[heads[v]]) == 1);
  }
}

TEST_CASE("entity_head_index is the last token of the span") {
  CHECK(entity_head_index(Span{3, 5}) == 5);
  CHECK(entity_head_index(Span{2, 2}) == 2);
  CHECK(entity_head_index(Span{0, 0}) == 0);
}

TEST_CASE("dep_weight follows the windowed halving rule") {
  CHECK(dep_weight(1, 5) == 1.0);
  CHECK(dep_weight(3, 5) == 0.25);
  CHECK(dep_weight(9, 5) == doctest::Approx(0.03125).epsilon(1e-15));
  CHECK(dep_weight(0, 5) == 1.0);                       // entity head token
  CHECK(dep_weight(0, 5, true) == doctest::Approx(std::pow(0.5, 5)));  // literal reading
  CHECK_THROWS_AS(dep_weight(-1, 5), std::invalid_argument);
  CHECK_THROWS_AS(dep_weight(1, 0), std::invalid_argument);
}

TEST_CASE("dep_weight is non-increasing and constant beyond the window") {
  for (int ws : {1, 3, 5, 10}) {
    double prev = dep_weight(0, ws);
    for (int l = 1; l <= 3 * ws; ++l) {
      const double w = dep_weight(l, ws);
      CHECK(w <= prev);
      prev = w;
      if (l > ws) CHECK(w == dep_weight(ws + 1, ws));  // plateau past the window
    }
  }
}

TEST_CASE("attention_mask keeps tokens with small average distance") {
  // averages 2 and 7 against ws=5
  const auto keep = attention_mask({0, 8}, {4, 6}, 5, Span{0, 0}, Span{1, 1});
  CHECK(keep[0] == 1);
  CHECK(keep[1] == 0);
  CHECK_THROWS_AS(attention_mask({0}, {1, 2}, 5, Span{0, 0}, Span{1, 1}), std::invalid_argument);
}

TEST_CASE("attention_mask falls back to the entity spans when everything is masked") {
  // entities 14 edges apart on a chain, ws=5: every token averages > 5
  const int n = 15;
  std::vector<int> heads(n, -1);
  for (int i = 1; i < n; ++i) heads[i] = i - 1;
  const DepTree tree = build_tree(heads);
  const auto l1 = token_distances(tree, 0);
  const auto l2 = token_distances(tree, n - 1);
  bool any_rule_kept = false;
  for (int i = 0; i < n; ++i) any_rule_kept = any_rule_kept || (l1[i] + l2[i] <= 10);
  CHECK_FALSE(any_rule_kept);

  const auto keep = attention_mask(l1, l2, 5, Span{0, 0}, Span{n - 1, n - 1});
  CHECK(keep[0] == 1);
  CHECK(keep[n - 1] == 1);
  int kept = 0;
  for (char k : keep) kept += k;
  CHECK(kept == 2);
}

TEST_CASE("kept tokens always carry weight at least 1/2^ws") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + rng.below_int(10);
    const auto heads = random_tree(rng, n);
    const DepTree tree = build_tree(heads);
    const int ws = 1 + rng.below_int(6);
    const int h1 = rng.below_int(n);
    int h2 = rng.below_int(n);
    if (h2 == h1) h2 = (h1 + 1) % n;
    const auto l1 = token_distances(tree, h1);
    const auto l2 = token_distances(tree, h2);
    const auto keep = attention_mask(l1, l2, ws, Span{h1, h1}, Span{h2, h2});
    const double floor = std::pow(0.5, ws);
    for (int i = 0; i < n; ++i)
      if (keep[i]) {
        CHECK(dep_weight(l1[i], ws) >= floor);
        CHECK(dep_weight(l2[i], ws) >= floor);
      }
  }
}
