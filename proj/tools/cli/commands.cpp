#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli/run_config.hpp"
#include "hdp/default_model.hpp"
#include "hdp/error.hpp"
#include "hdp/evaluation.hpp"
#include "hdp/hdp_forest.hpp"
#include "hdp/pipeline.hpp"
#include "hdp/pyramid.hpp"
#include "hdp/synthetic.hpp"

#ifndef HDP_VERSION
#define HDP_VERSION "0.0.0"
#endif

namespace hdp::cli {

const char* version() { return HDP_VERSION; }

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raw flag values; only those the user actually passed override the config.
struct RunFlags {
  std::string config_path;
  int factor = 0, levels = 0;
  std::string size_class, tree;
  double delta0 = 0, beta = 0, gamma = 0, alpha = 0, tau_color = 0, tau_grad = 0;
  std::uint64_t seed = 0;
  bool hdp = true, median_prefilter = false;
  std::string model;
  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* app, bool with_hdp_switch = true) {
    opts["config"] = app->add_option("--config", config_path, "INI file with run settings")->check(CLI::ExistingFile);
    opts["S"] = app->add_option("--S,--factor", factor, "pyramid downsampling factor");
    opts["L"] = app->add_option("--L,--levels", levels, "number of coarse levels");
    opts["size"] = app->add_option("--size-class", size_class, "threshold preset: half or full");
    opts["delta0"] = app->add_option("--delta0", delta0, "interval threshold at level 0");
    opts["beta"] = app->add_option("--beta", beta, "tree-merge Jaccard threshold");
    opts["gamma"] = app->add_option("--gamma", gamma, "aggregation smoothness");
    opts["alpha"] = app->add_option("--alpha", alpha, "gradient weight of the matching cost");
    opts["tau_color"] = app->add_option("--tau-color", tau_color, "color truncation");
    opts["tau_grad"] = app->add_option("--tau-grad", tau_grad, "gradient truncation");
    opts["method"] = app->add_option("--method", tree, "spanning tree: mst or rt");
    opts["seed"] = app->add_option("--seed", seed, "random-tree seed");
    opts["median"] = app->add_flag("--median-prefilter", median_prefilter, "3x3 median on the tree image");
    opts["model"] = app->add_option("--model", model, "GMM file (default: built-in)");
    if (with_hdp_switch) opts["hdp"] = app->add_flag("--hdp,!--no-hdp", hdp, "hierarchical prediction on/off");
  }

  bool given(const std::string& name) const {
    const auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }

  RunConfig resolve() const {
    RunConfig c;
    if (given("config")) apply_config_file(c, config_path);
    if (given("S")) c.factor = factor;
    if (given("L")) c.levels = levels;
    if (given("size")) c.size_class = parse_size_class(size_class);
    if (given("delta0")) c.delta0 = delta0;
    if (given("beta")) c.beta = beta;
    if (given("gamma")) c.gamma = gamma;
    if (given("alpha")) c.cost.alpha = alpha;
    if (given("tau_color")) c.cost.tau_color = tau_color;
    if (given("tau_grad")) c.cost.tau_grad = tau_grad;
    if (given("method")) c.tree = parse_tree_kind(tree);
    if (given("seed")) c.seed = seed;
    if (given("median")) c.median_prefilter = median_prefilter;
    if (given("model")) c.model_path = model;
    if (given("hdp")) c.hdp = hdp;
    c.validate();
    return c;
  }
};

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

json describe_input(const fs::path& path) {
  return {{"path", path.string()}, {"fnv1a", fmt::format("{:016x}", fnv1a_file(path))}};
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json manifest(const std::string& command, const RunConfig& config, json inputs, json extra = json::object()) {
  json m = {{"tool", "hdp_stereo"},
            {"version", version()},
            {"command", command},
            {"config", config.to_json()},
            {"seed", config.seed},
            {"inputs", std::move(inputs)}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  return m;
}

GmmModel load_model(const RunConfig& config) {
  GmmModel model = config.model_path.empty() ? default_model() : load_gmm(config.model_path);
  if (model.factor != config.factor)
    throw ConfigError(fmt::format("model factor S={} does not match S={}", model.factor, config.factor));
  if (model.level_count() < config.levels)
    throw ConfigError(fmt::format("model has {} levels, L={} needs {}", model.level_count(), config.levels,
                                  config.levels));
  return model;
}

json layer_json(const LayerReport& l) {
  return {{"level", l.level},
          {"width", l.width},
          {"height", l.height},
          {"d_max", l.d_max},
          {"search_ratio", 100.0 * l.search_ratio},
          {"stored_entries", l.stored_entries},
          {"trees", l.tree_count},
          {"stable_samples", l.stable_samples},
          {"seconds",
           {{"prior", l.prior_seconds},
            {"prediction", l.prediction_seconds},
            {"forest", l.forest_seconds},
            {"cost", l.cost_seconds},
            {"aggregation", l.aggregation_seconds},
            {"wta", l.wta_seconds}}}};
}

// ---------------------------------------------------------------- match

struct MatchArgs {
  RunFlags run;
  std::string left, right, name, gt, occ, out;
  int d_max = 0, gt_scale = 1;
  bool dump_matrices = false, dump_levels = false, json_stream = false;
};

int cmd_match(const MatchArgs& a, std::ostream& out) {
  RunConfig config = a.run.resolve();
  config.out_dir = a.out;
  if (a.d_max < 1) throw ConfigError("--dmax must be >= 1");
  if (a.gt_scale < 1) throw ConfigError("--gt-scale must be >= 1");
  const fs::path dir = a.out;
  fs::create_directories(dir);

  json inputs = {{"left", describe_input(a.left)}, {"right", describe_input(a.right)}, {"d_max", a.d_max}};
  if (!a.gt.empty()) inputs["gt"] = describe_input(a.gt);
  if (!a.occ.empty()) inputs["occlusion"] = describe_input(a.occ);
  write_json(manifest("match", config, inputs), dir / "manifest.json");

  const StereoPair pair = load_stereo_pair(a.left, a.right, a.d_max, a.name.empty() ? "pair" : a.name);
  const MatchParams params = config.match_params();
  const MatchResult result = config.hdp ? run_hdp_pipeline(pair, load_model(config), params)
                                        : run_baseline_pipeline(pair, params);

  json metrics = {{"method", (config.hdp ? "hdp+" : "") + to_string(config.tree)},
                  {"seconds", result.seconds},
                  {"work_entries", result.work.entries},
                  {"search_ratios", search_ratios(result.layers)}};
  for (const auto& l : result.layers) metrics["layers"].push_back(layer_json(l));

  OverlayInputs overlay;
  DisparityMap gt;
  OcclusionMask occlusion;
  if (!a.gt.empty()) {
    gt = load_ground_truth(a.gt, GroundTruthOptions{a.gt_scale, true, a.d_max});
    overlay.ground_truth = &gt;
    if (!a.occ.empty()) {
      occlusion = load_occlusion_mask(a.occ);
      overlay.occlusion = &occlusion;
    }
    const ErrorReport e = evaluate_prediction(pair.name, metrics["method"], result.disparity, gt, overlay.occlusion);
    metrics["err_ge_1"] = e.err_ge_1;
    metrics["err_ge_2"] = e.err_ge_2;
    metrics["evaluable"] = e.evaluable;
  }
  save_disparity_artifacts(result.disparity, dir / "disparity", overlay);
  if (a.dump_levels)
    for (std::size_t l = 1; l < result.level_disparities.size(); ++l)
      save_disparity_pgm(result.level_disparities[l], dir / fmt::format("disparity_level{}.pgm", l));
  if (a.dump_matrices)
    for (std::size_t l = 0; l < result.posteriors.size(); ++l)
      write_matrix_csv(result.posteriors[l], dir / fmt::format("posterior_level{}.csv", l));
  write_json(metrics, dir / "metrics.json");

  if (a.json_stream) {
    for (const auto& l : result.layers) {
      json j = layer_json(l);
      j["event"] = "layer";
      out << j.dump() << '\n';
    }
    json summary = metrics;
    summary.erase("layers");
    summary["event"] = "summary";
    out << summary.dump() << '\n';
  } else {
    out << fmt::format("{}: {:.3f} s", metrics["method"].get<std::string>(), result.seconds);
    if (metrics.contains("err_ge_1"))
      out << fmt::format(", err>=1 {:.2f}%, err>=2 {:.2f}%", metrics["err_ge_1"].get<double>(),
                         metrics["err_ge_2"].get<double>());
    out << fmt::format(", output {}\n", (dir / "disparity.pgm").string());
  }
  return kOk;
}

// ------------------------------------------------------------ train-gmm

struct TrainArgs {
  std::string dataset, out;
  int synthetic = 0, factor = 2, levels = 3, components = 3, max_iterations = 500, gt_scale = 1;
  double train_fraction = 0.5, tolerance = 1e-9;
  std::uint64_t split_seed = 0;
  bool json_stream = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (a.dataset.empty() == (a.synthetic <= 0)) throw ConfigError("give exactly one of --dataset and --synthetic");
  if (a.factor < 2) throw ConfigError("S must be >= 2");
  if (a.levels < 1) throw ConfigError("L must be >= 1");
  if (!(a.train_fraction > 0.0 && a.train_fraction <= 1.0)) throw ConfigError("--train-fraction must lie in (0,1]");
  if (a.components < 1) throw ConfigError("--components must be >= 1");

  std::vector<DisparityMap> maps;
  json split = json::object();
  if (!a.dataset.empty()) {
    auto entries = list_dataset(a.dataset);
    std::mt19937_64 rng(a.split_seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    const auto n_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(a.train_fraction * static_cast<double>(entries.size()))));
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const bool train = i < n_train;
      split[train ? "train" : "test"].push_back(entries[i].name);
      if (!train) continue;
      for (const auto& gt : {entries[i].gt_left, entries[i].gt_right})
        if (gt) maps.push_back(load_ground_truth(*gt, a.gt_scale));
    }
    if (maps.empty()) throw DataError("no ground truth found under " + a.dataset);
  } else {
    for (int i = 0; i < a.synthetic; ++i)
      maps.push_back(random_planar_disparity(a.split_seed + static_cast<std::uint64_t>(i), 400, 300, 128));
    split["train"] = fmt::format("synthetic x{}", a.synthetic);
  }

  EmOptions options;
  options.components = a.components;
  options.max_iterations = a.max_iterations;
  options.tolerance = a.tolerance;
  const auto offsets = collect_offsets(maps, a.factor, a.levels);
  const GmmModel model = train_gmm(offsets, options, a.factor);
  save_gmm(model, a.out);

  json m = {{"tool", "hdp_stereo"},
            {"version", version()},
            {"command", "train-gmm"},
            {"S", a.factor},
            {"L", a.levels},
            {"components", a.components},
            {"split_seed", a.split_seed},
            {"train_fraction", a.train_fraction},
            {"split", split},
            {"samples", json::array()}};
  for (const auto& o : offsets) m["samples"].push_back(o.size());
  write_json(m, fs::path(a.out).string() + ".manifest.json");
  if (a.json_stream) {
    for (int l = 0; l < model.level_count(); ++l) {
      json j = {{"event", "level"}, {"level", l}, {"samples", offsets[l].size()}, {"components", json::array()}};
      for (const auto& c : model.levels[l].components)
        j["components"].push_back({{"weight", c.weight}, {"mean", c.mean}, {"sigma", c.sigma}});
      out << j.dump() << '\n';
    }
  } else {
    out << fmt::format("trained {} levels on {} maps, wrote {}\n", model.level_count(), maps.size(), a.out);
  }
  return kOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string pred, gt, occ, gt_right, out, thresholds = "1,2";
  int pred_scale = 1, gt_scale = 1;
  unsigned jobs = 0;
  bool json_stream = false;
};

struct EvalRow {
  std::string name;
  std::size_t evaluable = 0;
  std::vector<double> rates;
};

std::vector<double> parse_thresholds(const std::string& list) {
  std::vector<double> t;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v > 0)) throw std::invalid_argument(item);
      t.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad threshold '" + item + "'");
    }
  }
  if (t.empty()) throw ConfigError("no thresholds given");
  return t;
}

EvalRow evaluate_files(const std::string& name, const fs::path& pred_path, const DisparityMap& gt,
                       const OcclusionMask* occlusion, int pred_scale, const std::vector<double>& thresholds) {
  const DisparityMap pred = load_ground_truth(pred_path, GroundTruthOptions{pred_scale, false, -1});
  EvalRow row{name, 0, {}};
  for (double t : thresholds) {
    const ErrorCounts c = count_errors(pred, gt, occlusion, t);
    row.evaluable = c.evaluable;
    row.rates.push_back(c.percent());
  }
  return row;
}

fs::path find_prediction(const fs::path& dir, const std::string& name) {
  for (const fs::path& candidate : {dir / (name + ".pgm"), dir / name / "disparity.pgm", dir / (name + ".png")})
    if (fs::exists(candidate)) return candidate;
  throw DataError("no prediction for '" + name + "' in " + dir.string());
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto thresholds = parse_thresholds(a.thresholds);
  if (a.pred_scale < 1 || a.gt_scale < 1) throw ConfigError("scales must be >= 1");
  std::vector<EvalRow> rows;

  if (fs::is_directory(a.gt)) {
    if (!fs::is_directory(a.pred)) throw ConfigError("--gt is a dataset directory, so --pred must be a directory");
    const auto entries = list_dataset(a.gt);
    const unsigned jobs = a.jobs > 0 ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<EvalRow>> pending;
    for (const auto& entry : entries) {
      if (pending.size() >= jobs) {
        rows.push_back(pending.front().get());
        pending.erase(pending.begin());
      }
      pending.push_back(std::async(std::launch::async, [&, entry] {
        if (!entry.gt_left) throw DataError("pair '" + entry.name + "' has no ground truth");
        const DisparityMap gt = load_ground_truth(*entry.gt_left, a.gt_scale);
        OcclusionMask mask;
        if (entry.occlusion) mask = load_occlusion_mask(*entry.occlusion);
        else if (entry.gt_right) mask = occlusion_from_gt(gt, load_ground_truth(*entry.gt_right, a.gt_scale));
        else mask = {gt.width, gt.height, std::vector<std::uint8_t>(gt.pixel_count(), 0)};
        return evaluate_files(entry.name, find_prediction(a.pred, entry.name), gt, &mask, a.pred_scale, thresholds);
      }));
    }
    for (auto& f : pending) rows.push_back(f.get());
    std::sort(rows.begin(), rows.end(), [](const EvalRow& x, const EvalRow& y) { return x.name < y.name; });
  } else {
    const DisparityMap gt = load_ground_truth(a.gt, a.gt_scale);
    OcclusionMask mask;
    const OcclusionMask* occlusion = nullptr;
    if (!a.occ.empty()) {
      mask = load_occlusion_mask(a.occ);
      occlusion = &mask;
    } else if (!a.gt_right.empty()) {
      mask = occlusion_from_gt(gt, load_ground_truth(a.gt_right, a.gt_scale));
      occlusion = &mask;
    }
    rows.push_back(evaluate_files(fs::path(a.pred).stem().string(), a.pred, gt, occlusion, a.pred_scale, thresholds));
  }

  std::ofstream csv(a.out);
  if (!csv) throw DataError("cannot write " + a.out);
  csv << "pair,evaluable";
  for (double t : thresholds) csv << fmt::format(",err_ge_{}", t);
  csv << '\n';
  for (const auto& r : rows) {
    csv << r.name << ',' << r.evaluable;
    for (double v : r.rates) csv << fmt::format(",{:.4f}", v);
    csv << '\n';
    if (a.json_stream) {
      json j = {{"event", "eval"}, {"pair", r.name}, {"evaluable", r.evaluable}};
      for (std::size_t i = 0; i < thresholds.size(); ++i) j[fmt::format("err_ge_{}", thresholds[i])] = r.rates[i];
      out << j.dump() << '\n';
    }
  }
  if (!a.json_stream) out << fmt::format("evaluated {} pairs, wrote {}\n", rows.size(), a.out);
  return kOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  RunFlags run;
  std::string dataset, methods = "mst,hdp+mst,rt,hdp+rt", out, jsonl, maps_dir;
  int runs = 3, gt_scale = 1, d_max = 0;
  bool json_stream = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const RunConfig config = a.run.resolve();
  const auto methods = parse_methods(a.methods);
  if (a.runs < 1) throw ConfigError("--runs must be >= 1");
  const auto entries = list_dataset(a.dataset);
  if (entries.empty()) throw DataError("no stereo pairs under " + a.dataset);

  json inputs = json::array();
  for (const auto& e : entries) inputs.push_back(e.name);
  write_json(manifest("bench", config, inputs, {{"methods", a.methods}, {"runs", a.runs}}),
             fs::path(a.out).string() + ".manifest.json");

  std::vector<EvalPair> pairs;
  for (const auto& e : entries) pairs.push_back(load_eval_pair(e, a.gt_scale, a.d_max));
  const bool needs_model = std::any_of(methods.begin(), methods.end(), [](const Method& m) { return m.hdp; });
  const GmmModel model = needs_model ? load_model(config) : GmmModel{};
  BenchOptions options;
  options.runs = a.runs;
  if (!a.maps_dir.empty()) options.output_dir = a.maps_dir;

  auto rows = bench(pairs, methods, model, config.match_params(), options);
  const auto averages = average_by_method(rows);
  rows.insert(rows.end(), averages.begin(), averages.end());
  write_reports_csv(rows, fs::path(a.out));
  if (!a.jsonl.empty()) {
    std::ofstream j(a.jsonl);
    if (!j) throw DataError("cannot write " + a.jsonl);
    write_reports_jsonl(rows, j);
  }
  if (a.json_stream) {
    write_reports_jsonl(rows, out);
  } else {
    for (const auto& r : averages) {
      out << fmt::format("{:10} err>=1 {:6.2f}%  err>=2 {:6.2f}%  {:8.3f} s", r.method, r.err_ge_1, r.err_ge_2,
                         r.seconds.total);
      if (r.speedup) out << fmt::format("  {:.2f}x vs {}", *r.speedup, r.baseline);
      out << '\n';
    }
  }
  return kOk;
}

// -------------------------------------------------------- pyramid, forest

struct PyramidArgs {
  std::string image, out;
  int factor = 2, levels = 3, d_max = 64;
};

int cmd_pyramid_dump(const PyramidArgs& a, std::ostream& out) {
  if (a.factor < 2) throw ConfigError("S must be >= 2");
  if (a.levels < 0) throw ConfigError("L must be >= 0");
  const RasterImage image = load_image(a.image);
  const auto layers = build_pyramid(image, a.factor, a.levels, a.d_max);
  fs::create_directories(a.out);
  for (const auto& layer : layers) {
    const fs::path path = fs::path(a.out) / fmt::format("level{}.{}", layer.level, layer.channels == 1 ? "pgm" : "ppm");
    save_image(layer_to_image(layer), path);
    out << fmt::format("level {}: {}x{}, d_max {}, {}\n", layer.level, layer.width, layer.height, layer.d_max,
                       path.string());
  }
  return kOk;
}

struct ForestArgs {
  RunFlags run;
  std::string left, right, out;
  int d_max = 0;
};

int cmd_forest_dump(const ForestArgs& a, std::ostream& out) {
  const RunConfig config = a.run.resolve();
  if (a.d_max < 1) throw ConfigError("--dmax must be >= 1");
  const StereoPair pair = load_stereo_pair(a.left, a.right, a.d_max);
  fs::create_directories(a.out);
  std::vector<DisparityForest> forests;
  if (config.hdp) {
    run_hdp_pipeline(pair, load_model(config), config.match_params(), &forests);
  } else {
    const PyramidLayer layer = layer_from_image(config.median_prefilter ? median_filter_3x3(pair.left) : pair.left,
                                                pair.d_max);
    forests.push_back(full_range_forest(build_forest(grid_edges(layer), {config.tree, config.seed}), layer.width,
                                        layer.height, layer.d_max));
  }
  for (std::size_t l = 0; l < forests.size(); ++l) {
    const fs::path path = fs::path(a.out) / fmt::format("forest_level{}.ppm", l);
    save_image(render_forest(forests[l]), path);
    out << fmt::format("level {}: {} trees, R = {:.2f}%, {}\n", l, forests[l].tree_count(), search_ratio(forests[l]),
                       path.string());
  }
  return kOk;
}

void use_stderr_logger(std::ostream& err) {
  if (&err == &std::cerr && !spdlog::get("hdp")) spdlog::set_default_logger(spdlog::stderr_color_mt("hdp"));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  use_stderr_logger(err);
  CLI::App app{"Hierarchical disparity prediction for tree-based stereo matching"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  std::function<int()> action;

  MatchArgs match;
  auto* m = app.add_subcommand("match", "compute a disparity map");
  m->add_option("--left", match.left, "left image")->required();
  m->add_option("--right", match.right, "right image")->required();
  m->add_option("--dmax", match.d_max, "largest disparity")->required();
  m->add_option("--out", match.out, "output directory")->required();
  m->add_option("--name", match.name, "pair name for reports");
  m->add_option("--gt", match.gt, "ground truth for an error overlay");
  m->add_option("--gt-scale", match.gt_scale, "stored ground-truth value per pixel of disparity");
  m->add_option("--occ", match.occ, "occlusion mask (255 = evaluable)");
  m->add_flag("--dump-matrices", match.dump_matrices, "write the posterior matrix of every level as CSV");
  m->add_flag("--dump-levels", match.dump_levels, "write coarse-level disparity maps");
  m->add_flag("--json", match.json_stream, "JSONL metrics on stdout");
  match.run.attach(m);
  m->callback([&] { action = [&] { return cmd_match(match, out); }; });

  TrainArgs train;
  auto* t = app.add_subcommand("train-gmm", "fit the disparity-offset model");
  auto* t_data = t->add_option("--dataset", train.dataset, "dataset root");
  t->add_option("--synthetic", train.synthetic, "train on this many synthetic maps instead")->excludes(t_data);
  t->add_option("--out", train.out, "model file")->required();
  t->add_option("--split-seed", train.split_seed, "seed of the train/test split");
  t->add_option("--train-fraction", train.train_fraction, "share of pairs used for training");
  t->add_option("--components", train.components, "mixture components per level");
  t->add_option("--max-iter", train.max_iterations, "EM iteration cap");
  t->add_option("--tol", train.tolerance, "EM stopping tolerance");
  t->add_option("--S,--factor", train.factor, "pyramid factor");
  t->add_option("--L,--levels", train.levels, "levels to model");
  t->add_option("--gt-scale", train.gt_scale, "stored ground-truth value per pixel of disparity");
  t->add_flag("--json", train.json_stream, "JSONL summary on stdout");
  t->callback([&] { action = [&] { return cmd_train(train, out); }; });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "score disparity maps against ground truth");
  e->add_option("--pred", ev.pred, "prediction file or directory")->required();
  e->add_option("--gt", ev.gt, "ground-truth file or dataset root")->required();
  e->add_option("--occ", ev.occ, "occlusion mask (file mode)");
  e->add_option("--gt-right", ev.gt_right, "right ground truth for a cross-check mask (file mode)");
  e->add_option("--thresholds", ev.thresholds, "comma-separated error thresholds");
  e->add_option("--out", ev.out, "report CSV")->required();
  e->add_option("--pred-scale", ev.pred_scale, "stored prediction value per pixel of disparity");
  e->add_option("--gt-scale", ev.gt_scale, "stored ground-truth value per pixel of disparity");
  e->add_option("--jobs", ev.jobs, "parallel pairs (0: one per core)");
  e->add_flag("--json", ev.json_stream, "JSONL rows on stdout");
  e->callback([&] { action = [&] { return cmd_eval(ev, out); }; });

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "time and score methods over a dataset");
  b->add_option("--dataset", bn.dataset, "dataset root")->required();
  b->add_option("--methods", bn.methods, "comma-separated: mst, rt, hdp+mst, hdp+rt");
  b->add_option("--out", bn.out, "report CSV")->required();
  b->add_option("--jsonl", bn.jsonl, "also write JSONL rows here");
  b->add_option("--runs", bn.runs, "timed repetitions (median is reported)");
  b->add_option("--gt-scale", bn.gt_scale, "stored ground-truth value per pixel of disparity");
  b->add_option("--dmax", bn.d_max, "largest disparity (default: from ground truth)");
  b->add_option("--save-maps", bn.maps_dir, "directory for per-method disparity maps");
  b->add_flag("--json", bn.json_stream, "JSONL rows on stdout");
  bn.run.attach(b, false);
  b->callback([&] { action = [&] { return cmd_bench(bn, out); }; });

  PyramidArgs py;
  auto* p = app.add_subcommand("pyramid", "pyramid inspection");
  p->require_subcommand(1);
  auto* pd = p->add_subcommand("dump", "write every pyramid level as an image");
  pd->add_option("--image", py.image, "input image")->required();
  pd->add_option("--out", py.out, "output directory")->required();
  pd->add_option("--S,--factor", py.factor, "pyramid factor");
  pd->add_option("--L,--levels", py.levels, "coarse levels");
  pd->add_option("--dmax", py.d_max, "disparity range carried along");
  pd->callback([&] { action = [&] { return cmd_pyramid_dump(py, out); }; });

  ForestArgs fo;
  auto* f = app.add_subcommand("forest", "forest inspection");
  f->require_subcommand(1);
  auto* fd = f->add_subcommand("dump", "render the disparity forest of every level");
  fd->add_option("--left", fo.left, "left image")->required();
  fd->add_option("--right", fo.right, "right image")->required();
  fd->add_option("--dmax", fo.d_max, "largest disparity")->required();
  fd->add_option("--out", fo.out, "output directory")->required();
  fo.run.attach(fd);
  fd->callback([&] { action = [&] { return cmd_forest_dump(fo, out); }; });

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& s) {
    return app.exit(s, out, err);
  } catch (const CLI::ParseError& pe) {
    app.exit(pe, out, err);
    return kConfigError;
  }

  try {
    return action ? action() : kOk;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
    return kConfigError;
  } catch (const DataError& ex) {
    err << "data error: " << ex.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& ex) {
    err << "data error: " << ex.what() << '\n';
    return kDataError;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kInternalError;
  }
}

}  // namespace hdp::cli
