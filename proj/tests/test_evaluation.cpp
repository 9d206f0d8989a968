#include <doctest.h>

#include <sstream>

#include "hdp/default_model.hpp"
#include "hdp/error.hpp"
#include "hdp/evaluation.hpp"
#include "hdp/synthetic.hpp"
#include "test_util.hpp"

using namespace hdp;

namespace {

DisparityMap ramp(int w, int h, int d_max) {
  DisparityMap m(w, h, d_max);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.at(x, y) = 1 + (x + y) % d_max;
  return m;
}

}  // namespace

TEST_CASE("error rate at the threshold boundary") {
  const DisparityMap gt = ramp(10, 8, 20);
  CHECK(error_rate(gt, gt, nullptr, 1) == 0.0);
  DisparityMap off = gt;
  for (auto& v : off.values) v += 1;
  CHECK(error_rate(off, gt, nullptr, 1) == 100.0);
  CHECK(error_rate(off, gt, nullptr, 2) == 0.0);
}

TEST_CASE("occluded and unknown pixels are not scored") {
  const DisparityMap gt0 = ramp(4, 1, 20);
  DisparityMap gt = gt0, pred = gt0;
  pred.values = {gt.values[0] + 5, gt.values[1] + 5, gt.values[2], gt.values[3] + 1};
  gt.valid = {0, 1, 1, 1};
  OcclusionMask occ{4, 1, {0, 1, 0, 0}};
  const ErrorCounts c = count_errors(pred, gt, &occ, 1);
  CHECK(c.evaluable == 2);
  CHECK(c.erroneous == 1);
  CHECK(c.percent() == 50.0);
  OcclusionMask all{4, 1, {1, 1, 1, 1}};
  CHECK_THROWS_AS(count_errors(pred, gt, &all, 1).percent(), DataError);
  CHECK_THROWS_AS(count_errors(ramp(3, 1, 5), gt, nullptr, 1), DataError);
}

TEST_CASE("invalid predictions count as errors") {
  const DisparityMap gt = ramp(3, 1, 9);
  DisparityMap pred = gt;
  pred.valid[1] = 0;
  CHECK(count_errors(pred, gt, nullptr, 1).erroneous == 1);
}

TEST_CASE("full intervals search the whole range") {
  const PyramidLayer layer = layer_from_image(RasterImage(5, 4, 1, 3), 7);
  const DisparityForest f = full_range_forest(build_forest(grid_edges(layer), {}), 5, 4, 7);
  CHECK(search_ratio(f) == 100.0);
  std::vector<LayerReport> layers(2);
  layers[0].level = 1;
  layers[0].search_ratio = 1.0;
  layers[1].level = 0;
  layers[1].search_ratio = 0.125;
  CHECK(search_ratios(layers) == std::vector<double>{12.5, 100.0});
}

TEST_CASE("a constant shift has no interior occlusions") {
  DisparityMap gl(20, 4, 10), gr(20, 4, 10);
  std::fill(gl.values.begin(), gl.values.end(), 4);
  std::fill(gr.values.begin(), gr.values.end(), 4);
  const OcclusionMask m = occlusion_from_gt(gl, gr);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 20; ++x) CHECK(m.at(x, y) == (x < 4));
}

TEST_CASE("a foreground square leaves a band as wide as the disparity step") {
  SceneSpec spec;
  spec.width = 80;
  spec.height = 40;
  spec.d_max = 16;
  spec.planes = {ScenePlane{0, 0, 0, 0, 3, true}, ScenePlane{30, 10, 50, 30, 10, false}};
  const SyntheticScene s = render_scene(spec);
  const OcclusionMask m = occlusion_from_gt(s.gt_left, s.gt_right);
  CHECK(m.occluded == s.occlusion.occluded);
  const int y = 20;
  // Background pixels left of the square are hidden by it over 10 - 3 columns.
  for (int x = 20; x < 30; ++x) CHECK(m.at(x, y) == (x >= 30 - 7));
  for (int x = 30; x < 60; ++x) CHECK_FALSE(m.at(x, y));
  int band = 0;
  for (int x = 3; x < 80; ++x) band += m.at(x, y);
  CHECK(band == 7);
  const OcclusionMask again = occlusion_from_gt(s.gt_left, s.gt_right);
  CHECK(again.occluded == m.occluded);
}

TEST_CASE("method names") {
  CHECK(parse_method("hdp+mst") == Method{TreeKind::Mst, true});
  CHECK(parse_method("rt") == Method{TreeKind::Random, false});
  CHECK(Method{TreeKind::Random, true}.name() == "hdp+rt");
  CHECK(parse_methods("mst,hdp+rt").size() == 2);
  CHECK_THROWS_AS(parse_methods(""), ConfigError);
  CHECK_THROWS(parse_method("hdp+st"));
}

TEST_CASE("bench pairs each HDP run with its plain baseline") {
  std::vector<EvalPair> pairs;
  for (std::uint64_t seed : {2, 1}) {
    const SyntheticScene s = render_scene(random_scene_spec(seed, 64, 48, 3, 12));
    StereoPair pair = s.pair;
    pair.name = "scene" + std::to_string(seed);
    pairs.push_back({pair, s.gt_left, s.occlusion});
  }
  test::TempDir dir("bench");
  BenchOptions options{1, dir.path()};
  const auto rows = bench(pairs, parse_methods("mst,hdp+mst,rt"), default_model(), {}, options);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].pair == "scene1");
  for (const auto& r : rows) {
    if (r.method == "hdp+mst") {
      CHECK(r.baseline == "mst");
      CHECK(r.speedup.has_value());
      CHECK(r.search_ratios.size() == 4);
    } else {
      CHECK_FALSE(r.speedup.has_value());
      CHECK(r.search_ratios.front() == 100.0);
    }
    CHECK(r.evaluable > 0);
    CHECK(std::filesystem::exists(dir / (r.pair + "_" + r.method + ".pgm")));
  }
  const auto avg = average_by_method(rows);
  REQUIRE(avg.size() == 3);
  for (const auto& a : avg) CHECK(a.pair == "average");

  std::ostringstream csv;
  write_reports_csv(rows, csv);
  CHECK(csv.str().rfind("pair,method,err_ge_1,err_ge_2", 0) == 0);
  std::ostringstream jsonl;
  write_reports_jsonl(rows, jsonl);
  const std::string lines = jsonl.str();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 6);
}

TEST_CASE("a method timed against itself is about as fast") {
  const SyntheticScene s = render_scene(random_scene_spec(3, 96, 72, 3, 12));
  const std::vector<EvalPair> pairs{{s.pair, s.gt_left, s.occlusion}};
  const auto a = bench(pairs, parse_methods("mst"), default_model(), {}, {3, std::nullopt});
  const auto b = bench(pairs, parse_methods("mst"), default_model(), {}, {3, std::nullopt});
  const double ratio = a[0].seconds.total / b[0].seconds.total;
  CHECK(ratio > 0.25);
  CHECK(ratio < 4.0);
  CHECK(a[0].err_ge_1 == b[0].err_ge_1);
}

TEST_CASE("evaluation pairs load from a dataset directory") {
  test::TempDir dir("evalpair");
  const SyntheticScene s = render_scene(random_scene_spec(4, 40, 30, 2, 8));
  std::filesystem::create_directories(dir / "p");
  save_image(s.pair.left, dir / "p" / "view1.ppm");
  save_image(s.pair.right, dir / "p" / "view5.ppm");
  save_disparity_pgm(s.gt_left, dir / "p" / "disp1.pgm");
  save_disparity_pgm(s.gt_right, dir / "p" / "disp5.pgm");
  const auto entries = list_dataset(dir.path());
  REQUIRE(entries.size() == 1);
  const EvalPair p = load_eval_pair(entries[0], 1, 0);
  CHECK(p.stereo.d_max == *std::max_element(s.gt_left.values.begin(), s.gt_left.values.end()));
  // Disparity-0 pixels are unknown once saved, so compare on the rest.
  const OcclusionMask oracle = occlusion_from_gt(p.gt, load_ground_truth(dir / "p" / "disp5.pgm", 1));
  CHECK(p.occlusion.occluded == oracle.occluded);
  CHECK(load_eval_pair(entries[0], 1, 20).stereo.d_max == 20);
}
