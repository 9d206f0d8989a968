#include <doctest.h>

#include <cmath>

#include "hdp/aggregation.hpp"
#include "hdp/error.hpp"
#include "hdp/hdp_forest.hpp"
#include "hdp/pipeline.hpp"
#include "hdp/sparse_cost_volume.hpp"
#include "test_util.hpp"

using namespace hdp;

namespace {

// A(v) = sum_q S(v,q) E(q), S the product of similarities along the path,
// computed per pair by walking both nodes up to their common ancestor.
double brute_force(const RootedForest& f, const SparseCostVolume& costs, NodeId v, std::size_t k, double gamma) {
  double total = 0;
  for (NodeId q = 0; q < f.node_count(); ++q) {
    if (f.tree_id[q] != f.tree_id[v]) continue;
    std::vector<NodeId> up_v{v}, up_q{q};
    while (!f.is_root(up_v.back())) up_v.push_back(f.parent[up_v.back()]);
    while (!f.is_root(up_q.back())) up_q.push_back(f.parent[up_q.back()]);
    while (up_v.size() > 1 && up_q.size() > 1 && up_v[up_v.size() - 2] == up_q[up_q.size() - 2]) {
      up_v.pop_back();
      up_q.pop_back();
    }
    double s = 1;
    for (std::size_t i = 0; i + 1 < up_v.size(); ++i) s *= edge_similarity(f.parent_weight[up_v[i]], gamma);
    for (std::size_t i = 0; i + 1 < up_q.size(); ++i) s *= edge_similarity(f.parent_weight[up_q[i]], gamma);
    total += s * costs.at(q, k);
  }
  return total;
}

struct RandomCase {
  DisparityForest forest;
  SparseCostVolume costs;
};

RandomCase random_case(std::mt19937_64& rng, int nodes_max) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(nodes_max));
  EdgeList edges{static_cast<std::size_t>(n), {}};
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    if (u(rng) < 0.85) edges.edges.push_back({NodeId(pick(rng)), NodeId(v), 255.0 * u(rng)});
  }
  std::vector<std::uint32_t> all(edges.edges.size());
  std::iota(all.begin(), all.end(), 0u);
  RootedForest rf = root_and_order(edges, all);
  const int d = 6;
  DisparityForest forest;
  forest.width = n;
  forest.height = 1;
  forest.d_max = d;
  for (std::size_t t = 0; t < rf.tree_count(); ++t) {
    DisparitySet s(d);
    for (int x = 0; x <= d; ++x)
      if (u(rng) < 0.4) s.insert(x);
    if (s.empty()) s.insert(static_cast<int>(rng() % (d + 1)));
    forest.tree_intervals.push_back(s);
  }
  forest.forest = std::move(rf);
  SparseCostVolume costs(forest);
  for (NodeId p = 0; p < NodeId(n); ++p)
    for (std::size_t k = 0; k < costs.candidates(p).size(); ++k) costs.at(p, k) = u(rng);
  return {std::move(forest), std::move(costs)};
}

}  // namespace

TEST_CASE("two-pass aggregation equals the all-pairs sum") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> g(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const RandomCase c = random_case(rng, 20);
    const double gamma = g(rng);
    WorkCounter work;
    const SparseCostVolume out = aggregate_tree(c.costs, c.forest, gamma, &work);
    CHECK(work.entries == c.costs.entry_count());
    for (NodeId v = 0; v < c.forest.forest.node_count(); ++v)
      for (std::size_t k = 0; k < out.candidates(v).size(); ++k)
        CHECK(std::abs(out.at(v, k) - brute_force(c.forest.forest, c.costs, v, k, gamma)) <= 1e-9);
  }
}

TEST_CASE("a single-pixel tree aggregates to itself") {
  std::mt19937_64 rng(62);
  RandomCase c = random_case(rng, 1);
  REQUIRE(c.forest.forest.node_count() == 1);
  const SparseCostVolume out = aggregate_tree(c.costs, c.forest, 0.3);
  for (std::size_t k = 0; k < out.candidates(0).size(); ++k) CHECK(out.at(0, k) == c.costs.at(0, k));
}

TEST_CASE("vanishing smoothness leaves costs unchanged") {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 20; ++trial) {
    RandomCase c = random_case(rng, 20);
    for (auto& w : c.forest.forest.parent_weight) w = std::max(w, 1.0);
    const SparseCostVolume out = aggregate_tree(c.costs, c.forest, 1e-6);
    for (NodeId v = 0; v < c.forest.forest.node_count(); ++v)
      for (std::size_t k = 0; k < out.candidates(v).size(); ++k) CHECK(out.at(v, k) == doctest::Approx(c.costs.at(v, k)));
  }
}

TEST_CASE("a volume of another shape is refused") {
  std::mt19937_64 rng(64);
  RandomCase a = random_case(rng, 20), b = random_case(rng, 20);
  while (b.forest.forest.node_count() == a.forest.forest.node_count()) b = random_case(rng, 20);
  CHECK_THROWS_AS(aggregate_tree(a.costs, b.forest, 0.1), InvariantError);
}

TEST_CASE("winner takes the smallest cost and the smaller disparity on ties") {
  RasterImage img(2, 1, 1, 0);
  const PyramidLayer layer = layer_from_image(img, 9);
  DisparityForest f = full_range_forest(build_forest(grid_edges(layer), {}), 2, 1, 9);
  f.tree_intervals[0] = DisparitySet(9, {2, 4, 7, 9});
  SparseCostVolume costs(f);
  // Node 0: increasing costs. Node 1: equal minima at 4 and 7.
  const double a[] = {0.1, 0.2, 0.3, 0.4}, b[] = {0.5, 0.1, 0.1, 0.3};
  for (std::size_t k = 0; k < 4; ++k) {
    costs.at(0, k) = a[k];
    costs.at(1, k) = b[k];
  }
  const WtaResult r = winner_takes_all(costs, f);
  CHECK(r.disparity.values == std::vector<int>{2, 4});
  CHECK(r.min_cost == std::vector<double>{0.1, 0.1});
}

TEST_CASE("dense single-tree path reproduces the streaming baseline") {
  std::mt19937_64 rng(65);
  for (auto kind : {TreeKind::Mst, TreeKind::Random}) {
    const RasterImage li = test::random_image(rng, 24, 18, 3);
    const RasterImage ri = test::shifted_view(li, 3, rng);
    const PyramidLayer l = layer_from_image(li, 8), r = layer_from_image(ri, 8);
    const MatchingCost cost(l, r, {});
    const RootedForest rf = build_forest(grid_edges(l), {kind, 9});
    const WtaResult streamed = aggregate_dense_streaming(cost, rf, 0.1);
    const DisparityForest f = full_range_forest(rf, 24, 18, 8);
    const WtaResult sparse = winner_takes_all(aggregate_tree(masked_cost_volume(cost, f), f, 0.1), f);
    CHECK(sparse.disparity == streamed.disparity);
    CHECK(sparse.min_cost == streamed.min_cost);
  }
}
