// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//   acceptance            run everything; exit 1 if anything failed
//   acceptance N          run criterion N only; exit 77 when it is skipped

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "cli/commands.hpp"
#include "hdp/aggregation.hpp"
#include "hdp/default_model.hpp"
#include "hdp/evaluation.hpp"
#include "hdp/hdp_forest.hpp"
#include "hdp/hdp_model.hpp"
#include "hdp/pipeline.hpp"
#include "hdp/sparse_cost_volume.hpp"
#include "hdp/synthetic.hpp"
#include "test_util.hpp"

using namespace hdp;

namespace {

enum class Status { Pass, Fail, Skip };

struct Verdict {
  Status status;
  std::string detail;
};

Verdict pass_if(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// -- 1 ----------------------------------------------------------------------

// Sum over same-tree q of the path product of similarities times E(q).
double all_pairs(const RootedForest& f, const SparseCostVolume& e, NodeId v, std::size_t k, double gamma) {
  std::vector<double> s(f.node_count(), 0.0);
  std::vector<NodeId> stack{v};
  std::vector<bool> seen(f.node_count(), false);
  s[v] = 1.0;
  seen[v] = true;
  while (!stack.empty()) {
    const NodeId a = stack.back();
    stack.pop_back();
    auto visit = [&](NodeId b, double w) {
      if (seen[b]) return;
      seen[b] = true;
      s[b] = s[a] * std::exp(-w / (gamma * 255.0));
      stack.push_back(b);
    };
    if (!f.is_root(a)) visit(f.parent[a], f.parent_weight[a]);
    for (std::size_t c = f.child_begin[a]; c < f.child_begin[a + 1]; ++c) visit(f.children[c], f.parent_weight[f.children[c]]);
  }
  double total = 0.0;
  for (NodeId q = 0; q < f.node_count(); ++q)
    if (seen[q]) total += s[q] * e.at(q, k);
  return total;
}

Verdict aggregation_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    EdgeList edges{static_cast<std::size_t>(n), {}};
    for (int v = 1; v < n; ++v)
      if (u(rng) < 0.9) edges.edges.push_back({NodeId(rng() % static_cast<unsigned>(v)), NodeId(v), 255.0 * u(rng)});
    std::vector<std::uint32_t> all(edges.edges.size());
    std::iota(all.begin(), all.end(), 0u);
    DisparityForest forest;
    forest.forest = root_and_order(edges, all);
    forest.width = n;
    forest.height = 1;
    forest.d_max = 15;
    for (std::size_t t = 0; t < forest.forest.tree_count(); ++t) {
      DisparitySet s(15);
      for (int x = 0; x <= 15; ++x)
        if (u(rng) < 0.3) s.insert(x);
      if (s.empty()) s.insert(static_cast<int>(rng() % 16));
      forest.tree_intervals.push_back(s);
    }
    SparseCostVolume costs(forest);
    for (NodeId p = 0; p < NodeId(n); ++p)
      for (std::size_t k = 0; k < costs.candidates(p).size(); ++k) costs.at(p, k) = u(rng);
    const double gamma = 0.01 + 0.99 * u(rng);
    const SparseCostVolume out = aggregate_tree(costs, forest, gamma);
    for (NodeId v = 0; v < NodeId(n); ++v)
      for (std::size_t k = 0; k < out.candidates(v).size(); ++k) {
        worst = std::max(worst, std::abs(out.at(v, k) - all_pairs(forest.forest, costs, v, k, gamma)));
        ++checked;
      }
  }
  const double secs = seconds_since(t0);
  return pass_if(worst <= 1e-9 && secs < 10.0,
                 fmt::format("1000 forests, {} values, max |diff| {:.3g}, {:.2f} s", checked, worst, secs));
}

// -- 2 ----------------------------------------------------------------------

// Kruskal with a comparison sort and its own disjoint-set forest.
double reference_mst_weight(const EdgeList& edges) {
  std::vector<std::size_t> idx(edges.edges.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return edges.edges[a].w < edges.edges[b].w; });
  std::vector<std::size_t> parent(edges.node_count);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  double total = 0.0;
  for (auto i : idx) {
    const auto a = find(edges.edges[i].u), b = find(edges.edges[i].v);
    if (a == b) continue;
    parent[a] = b;
    total += edges.edges[i].w;
  }
  return total;
}

Verdict mst_oracle() {
  std::mt19937_64 rng(77);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 32), h = 1 + static_cast<int>(rng() % 32);
    // Odd trials use a coarser level, whose weights are exact quarter units.
    const RasterImage img = test::random_image(rng, trial % 2 ? 2 * w : w, trial % 2 ? 2 * h : h, 1 + 2 * (trial % 3 == 0));
    const auto layers = build_pyramid(img, 2, trial % 2, 64);
    const EdgeList edges = grid_edges(layers.back());
    const RootedForest f = build_forest(edges, {});
    double total = 0.0;
    for (NodeId v = 0; v < f.node_count(); ++v) total += f.parent_weight[v];
    std::vector<std::uint32_t> order = order_edges(edges, {});
    ForestPolicy policy;
    double selected = 0.0;
    for (auto i : select_edges(edges, order, policy)) selected += edges.edges[i].w;
    const double ref = reference_mst_weight(edges);
    if (total != ref || selected != ref || f.tree_count() != 1) ++mismatches;
  }
  return pass_if(mismatches == 0, fmt::format("100 grids up to 32x32, {} mismatches", mismatches));
}

// -- 3 ----------------------------------------------------------------------

Verdict bayes_intervals() {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_norm = 0.0;
  int monotone_violations = 0, delta_mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    GmmLayer g;
    const int k = 1 + trial % 3;
    for (int i = 0; i < k; ++i) g.components.push_back({1.0 / k, -2.0 + 4.0 * u(rng), kSigmaFloor + 4.0 * u(rng)});
    const int factor = 2 + trial % 2;
    const int d_child = 10 + static_cast<int>(rng() % 120), d_parent = d_child / factor;
    const ProbabilityMatrix pc = conditional_parent_given_child(g, d_child, d_parent, factor);
    for (int j = 0; j < pc.cols; ++j) {
      double s = 0;
      for (int i = 0; i < pc.rows; ++i) s += pc.at(i, j);
      worst_norm = std::max(worst_norm, std::abs(s - 1.0));
    }
    std::vector<double> prior(static_cast<std::size_t>(d_child) + 1);
    double total = 0;
    for (auto& p : prior) total += (p = u(rng) + 1e-3);
    for (auto& p : prior) p /= total;
    const ProbabilityMatrix cp = bayes_child_given_parent(pc, prior);
    for (int i = 0; i < cp.rows; ++i) {
      double s = 0;
      for (int j = 0; j < cp.cols; ++j) s += cp.at(i, j);
      worst_norm = std::max(worst_norm, std::abs(s - 1.0));
    }
    DisparityIntervalTable prev = predict_intervals(cp, 1e-4);
    for (double delta : {0.001, 0.004, 0.016, 0.064, 0.256, 0.5, 0.9}) {
      DisparityIntervalTable next = predict_intervals(cp, delta);
      for (std::size_t i = 0; i < next.rows.size(); ++i)
        for (int v : next.rows[i].values())
          if (!prev.rows[i].contains(v)) ++monotone_violations;
      prev = std::move(next);
    }
    // Narrow zero-mean mixture with a uniform prior. The k-th of S equal picks
    // passes only while 1/k >= delta, so delta stays below 1/S.
    const ProbabilityMatrix dc = conditional_parent_given_child(GmmLayer{{{1.0, 0.0, kSigmaFloor}}}, d_child, d_parent, factor);
    const ProbabilityMatrix dp =
        bayes_child_given_parent(dc, std::vector<double>(static_cast<std::size_t>(d_child) + 1, 1.0 / (d_child + 1)));
    const DisparityIntervalTable table = predict_intervals(dp, 0.001 + u(rng) * 0.29);
    for (int i = 0; i <= d_parent; ++i) {
      std::vector<int> expected;
      for (int j = 0; j <= d_child; ++j)
        if (j / factor == i) expected.push_back(j);
      if (table.rows[static_cast<std::size_t>(i)].values() != expected) ++delta_mismatches;
    }
  }
  return pass_if(worst_norm <= 1e-9 && monotone_violations == 0 && delta_mismatches == 0,
                 fmt::format("max |sum-1| {:.3g}, monotonicity violations {}, narrow-mixture mismatches {}",
                             worst_norm, monotone_violations, delta_mismatches));
}

// -- 4 ----------------------------------------------------------------------

Verdict synthetic_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const SyntheticScene scene = render_scene(random_scene_spec(1));
  MatchParams params;
  params.delta0 = size_preset(SizeClass::Full).delta0;
  params.beta = size_preset(SizeClass::Full).beta;
  const MatchResult hdp = run_hdp_pipeline(scene.pair, default_model(), params);
  const MatchResult mst = run_baseline_pipeline(scene.pair, params);
  const double e_hdp = error_rate(hdp.disparity, scene.gt_left, &scene.occlusion, 1);
  const double e_mst = error_rate(mst.disparity, scene.gt_left, &scene.occlusion, 1);
  const double r0 = 100.0 * hdp.layers.back().search_ratio;
  const double secs = seconds_since(t0);
  return pass_if(e_hdp <= 5.0 && e_hdp <= e_mst + 1.0 && r0 <= 30.0 && secs < 30.0,
                 fmt::format("320x240, planes d=({}), HDP+MST err>=1 {:.2f}%, MST {:.2f}%, R_0 {:.2f}%, {:.2f} s",
                             [&] {
                               std::string s;
                               for (const auto& p : random_scene_spec(1).planes)
                                 s += (s.empty() ? "" : ",") + std::to_string(p.disparity);
                               return s;
                             }(),
                             e_hdp, e_mst, r0, secs));
}

// -- 5 ----------------------------------------------------------------------

std::vector<EvalPair> load_pairs(const std::filesystem::path& dir, int gt_scale) {
  std::vector<EvalPair> pairs;
  for (const auto& entry : list_dataset(dir))
    if (entry.gt_left) pairs.push_back(load_eval_pair(entry, gt_scale, 0));
  return pairs;
}

Verdict middlebury() {
  const char* root_env = std::getenv("HDP_MIDDLEBURY_DIR");
  if (!root_env || !*root_env) return {Status::Skip, "HDP_MIDDLEBURY_DIR is not set"};
  const std::filesystem::path root(root_env);
  const bool have_half = std::filesystem::is_directory(root / "half") && !list_dataset(root / "half").empty();
  const bool have_full = std::filesystem::is_directory(root / "full") && !list_dataset(root / "full").empty();
  if (!have_half && !have_full) return {Status::Skip, "no pairs under " + root.string() + "/{half,full}"};

  std::vector<std::string> notes;
  bool ok = true;
  const auto methods = parse_methods("mst,hdp+mst");
  if (have_half) {
    MatchParams p;
    p.delta0 = size_preset(SizeClass::Half).delta0;
    p.beta = size_preset(SizeClass::Half).beta;
    const auto avg = average_by_method(bench(load_pairs(root / "half", 2), methods, default_model(), p, {1, {}}));
    for (const auto& r : avg) {
      const double target = r.method == "mst" ? 6.9 : 6.4;
      const bool hit = std::abs(r.err_ge_2 - target) <= 2.0;
      ok = ok && hit;
      notes.push_back(fmt::format("(a) half {} err>=2 {:.2f}% vs {:.1f}{}", r.method, r.err_ge_2, target, hit ? "" : " MISS"));
    }
  } else {
    ok = false;
    notes.push_back("(a) no half-size pairs");
  }
  if (have_full) {
    MatchParams p;
    p.delta0 = size_preset(SizeClass::Full).delta0;
    p.beta = size_preset(SizeClass::Full).beta;
    const auto avg = average_by_method(bench(load_pairs(root / "full", 1), methods, default_model(), p, {1, {}}));
    for (const auto& r : avg) {
      if (!r.speedup) continue;
      const bool r0 = std::abs(r.search_ratios.at(0) - 1.5) <= 5.0;
      const bool r1 = std::abs(r.search_ratios.at(1) - 2.7) <= 5.0;
      const bool fast = *r.speedup >= 8.0;
      ok = ok && r0 && r1 && fast;
      notes.push_back(fmt::format("(b) full R_0 {:.2f}% R_1 {:.2f}%{}", r.search_ratios[0], r.search_ratios[1],
                                  r0 && r1 ? "" : " MISS"));
      notes.push_back(fmt::format("(c) speedup {:.2f}x{}", *r.speedup, fast ? "" : " MISS"));
    }
  } else {
    ok = false;
    notes.push_back("(b,c) no full-size pairs");
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return pass_if(ok, detail);
}

// -- 6 ----------------------------------------------------------------------

Verdict masking_work() {
  const SyntheticScene scene = render_scene(random_scene_spec(1));
  MatchParams params;
  params.delta0 = size_preset(SizeClass::Full).delta0;
  params.beta = size_preset(SizeClass::Full).beta;
  std::vector<DisparityForest> forests;
  const MatchResult r = run_hdp_pipeline(scene.pair, default_model(), params, &forests);
  const LayerReport& l0 = r.layers.back();
  const double dense = double(l0.width) * l0.height * (l0.d_max + 1);
  const double ratio = double(l0.stored_entries) / dense;
  const double r0 = search_ratio(forests.at(0)) / 100.0;
  const bool ok = l0.stored_entries <= dense && std::abs(ratio - r0) <= 1e-6;
  return pass_if(ok, fmt::format("stored {} of {:.0f} dense entries, ratio {:.6f}, R_0 {:.6f}", l0.stored_entries,
                                 dense, ratio, r0));
}

// -- 7 ----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict determinism() {
  test::TempDir dir("determinism");
  const SyntheticScene scene = render_scene(random_scene_spec(2));
  save_image(scene.pair.left, dir / "left.ppm");
  save_image(scene.pair.right, dir / "right.ppm");
  const std::vector<std::string> args{"hdp_stereo", "match",  "--left", (dir / "left.ppm").string(),
                                      "--right",    (dir / "right.ppm").string(), "--dmax", "24",
                                      "--method",   "rt",     "--seed", "12345",
                                      "--out",      (dir / "run").string()};
  std::ostringstream out, err;
  std::string manifests[2], maps[2];
  for (int i = 0; i < 2; ++i) {
    if (cli::run(args, out, err) != 0) return {Status::Fail, "match failed: " + err.str()};
    manifests[i] = slurp(dir / "run" / "manifest.json");
    maps[i] = slurp(dir / "run" / "disparity.pgm");
  }
  const bool same_manifest = manifests[0] == manifests[1];
  const bool same_map = !maps[0].empty() && maps[0] == maps[1];
  return pass_if(same_manifest && same_map, fmt::format("RT seed 12345, manifests {}, disparity PGMs {} ({} bytes)",
                                                        same_manifest ? "identical" : "differ",
                                                        same_map ? "byte-identical" : "differ", maps[0].size()));
}

struct Criterion {
  int id;
  const char* name;
  Verdict (*run)();
};

const Criterion kCriteria[] = {
    {1, "aggregation exactness", aggregation_exactness},
    {2, "counting-sort MST vs comparison-sort Kruskal", mst_oracle},
    {3, "posterior normalization and interval prediction", bayes_intervals},
    {4, "synthetic random-dot stereogram end to end", synthetic_end_to_end},
    {5, "Middlebury 2006 reproduction", middlebury},
    {6, "masked work matches the search ratio", masking_work},
    {7, "deterministic output under a fixed seed", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failed = 0, skipped = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (only && c.id != only) continue;
    ++ran;
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.status == Status::Pass ? "PASS" : v.status == Status::Fail ? "FAIL" : "SKIP";
    std::cout << fmt::format("[{}] {}. {}: {}", tag, c.id, c.name, v.detail) << std::endl;
    failed += v.status == Status::Fail;
    skipped += v.status == Status::Skip;
  }
  if (ran == 0) {
    std::cerr << "no criterion " << only << '\n';
    return 2;
  }
  if (failed) return 1;
  if (only && skipped) return 77;
  return 0;
}
