#include <doctest.h>

#include <cmath>

#include "hdp/cost_volume.hpp"
#include "hdp/hdp_forest.hpp"
#include "hdp/sparse_cost_volume.hpp"
#include "test_util.hpp"

using namespace hdp;

namespace {

// Independent straight-line cost: mean absolute color difference and central
// difference of the luma, both truncated, out-of-image matches at the cap.
double oracle_cost(const RasterImage& l, const RasterImage& r, int u, int y, int x, const CostParams& p) {
  if (u - x < 0) return (1 - p.alpha) * p.tau_color + p.alpha * p.tau_grad;
  auto luma = [](const RasterImage& img, int xx, int yy) {
    xx = std::clamp(xx, 0, img.width - 1);
    if (img.channels == 1) return img.at(xx, yy) / 255.0;
    return (0.299 * img.at(xx, yy, 0) + 0.587 * img.at(xx, yy, 1) + 0.114 * img.at(xx, yy, 2)) / 255.0;
  };
  auto grad = [&](const RasterImage& img, int xx, int yy) { return (luma(img, xx + 1, yy) - luma(img, xx - 1, yy)) / 2.0; };
  double color = 0;
  for (int c = 0; c < l.channels; ++c) color += std::abs(l.at(u, y, c) - r.at(u - x, y, c)) / 255.0;
  color /= l.channels;
  const double g = std::abs(grad(l, u, y) - grad(r, u - x, y));
  return (1 - p.alpha) * std::min(color, p.tau_color) + p.alpha * std::min(g, p.tau_grad);
}

}  // namespace

TEST_CASE("identical views cost nothing at zero disparity") {
  std::mt19937_64 rng(21);
  const RasterImage img = test::random_image(rng, 9, 7, 3);
  const PyramidLayer layer = layer_from_image(img, 4);
  const MatchingCost cost(layer, layer, {});
  for (NodeId p = 0; p < layer.node_count(); ++p) CHECK(cost(p, 0) == 0.0);
}

TEST_CASE("every cost stays under the truncation cap") {
  std::mt19937_64 rng(22);
  const PyramidLayer l = layer_from_image(test::random_image(rng, 12, 6, 3), 8);
  const PyramidLayer r = layer_from_image(test::random_image(rng, 12, 6, 3), 8);
  const CostParams params;
  const MatchingCost cost(l, r, params);
  for (NodeId p = 0; p < l.node_count(); ++p)
    for (int x = 0; x <= 8; ++x) CHECK(cost(p, x) <= params.border_penalty() + 1e-15);
}

TEST_CASE("matching cost agrees with a straight-line reimplementation") {
  std::mt19937_64 rng(23);
  for (int channels : {1, 3}) {
    const RasterImage li = test::random_image(rng, 8, 8, channels), ri = test::random_image(rng, 8, 8, channels);
    // Loose truncation so both terms are exercised unclamped too.
    const CostParams params{0.6, 0.4, 0.2};
    const PyramidLayer l = layer_from_image(li, 7), r = layer_from_image(ri, 7);
    const MatchingCost cost(l, r, params);
    for (int y = 0; y < 8; ++y)
      for (int u = 0; u < 8; ++u)
        for (int x = 0; x <= 7; ++x) {
          const double expected = oracle_cost(li, ri, u, y, x, params);
          CHECK(cost(l.node(u, y), x) == doctest::Approx(expected).epsilon(1e-12));
          CHECK(raw_cost(l, r, l.node(u, y), x, params) == doctest::Approx(expected).epsilon(1e-12));
        }
  }
}

TEST_CASE("reverse cost compares the right pixel with the left one") {
  std::mt19937_64 rng(24);
  const PyramidLayer l = layer_from_image(test::random_image(rng, 10, 3, 3), 4);
  const PyramidLayer r = layer_from_image(test::random_image(rng, 10, 3, 3), 4);
  const MatchingCost cost(l, r, {});
  for (int y = 0; y < 3; ++y)
    for (int u = 0; u < 10; ++u)
      for (int x = 0; x <= 4; ++x) {
        if (u + x < 10) CHECK(cost.reverse(r.node(u, y), x) == cost(l.node(u + x, y), x));
        else CHECK(cost.reverse(r.node(u, y), x) == CostParams{}.border_penalty());
      }
}

TEST_CASE("row accumulation equals per-pixel costs") {
  std::mt19937_64 rng(25);
  for (int channels : {1, 3}) {
    const PyramidLayer l = layer_from_image(test::random_image(rng, 11, 4, channels), 12);
    const PyramidLayer r = layer_from_image(test::random_image(rng, 11, 4, channels), 12);
    const MatchingCost cost(l, r, {});
    for (int x : {0, 3, 11, 12}) {
      std::vector<double> acc(11, 1.0);
      cost.accumulate_row(2, x, acc.data());
      for (int u = 0; u < 11; ++u) CHECK(acc[u] == 1.0 + cost(l.node(u, 2), x));
    }
  }
}

TEST_CASE("invalid cost parameters are rejected") {
  CHECK_THROWS(CostParams{1.5, 0.1, 0.1}.validate());
  CHECK_THROWS(CostParams{0.5, -0.1, 0.1}.validate());
  CHECK_NOTHROW(CostParams{}.validate());
}

TEST_CASE("a full-range single tree stores the dense volume") {
  std::mt19937_64 rng(26);
  const PyramidLayer l = layer_from_image(test::random_image(rng, 6, 5, 3), 5);
  const PyramidLayer r = layer_from_image(test::random_image(rng, 6, 5, 3), 5);
  const MatchingCost cost(l, r, {});
  const DisparityForest forest = full_range_forest(build_forest(grid_edges(l), {}), 6, 5, 5);
  REQUIRE(forest.tree_count() == 1);
  const SparseCostVolume vol = masked_cost_volume(cost, forest);
  CHECK(vol.entry_count() == 30 * 6);
  for (NodeId p = 0; p < 30; ++p)
    for (int x = 0; x <= 5; ++x) CHECK(*vol.cost(p, x) == raw_cost(l, r, p, x, {}));
}

TEST_CASE("storage follows the tree sets") {
  // Two 1x3 strips separated by a disjoint interval boundary.
  RasterImage img(6, 1, 1, 50);
  const PyramidLayer layer = layer_from_image(img, 6);
  PixelIntervalMap intervals;
  intervals.width = 6;
  intervals.height = 1;
  intervals.d_max = 6;
  intervals.sets = {DisparitySet(6, {0, 1}), DisparitySet(6, {5})};
  intervals.set_of_pixel = {0, 0, 0, 0, 1, 1};
  const DisparityForest forest = build_hdpf(grid_edges(layer), intervals, {}, 0.5);
  REQUIRE(forest.tree_count() == 2);
  const MatchingCost cost(layer, layer, {});
  const SparseCostVolume vol = masked_cost_volume(cost, forest);
  CHECK(vol.entry_count() == 2 * 4 + 1 * 2);
  CHECK(vol.entry_count() == forest.total_candidates());
  CHECK(vol.cost(0, 1).has_value());
  CHECK_FALSE(vol.cost(0, 5).has_value());
  CHECK(vol.cost(5, 5).has_value());
}
