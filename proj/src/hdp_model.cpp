#include "hdp/hdp_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hdp/error.hpp"

namespace hdp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

double GmmLayer::log_density(double o) const {
  std::vector<double> terms;
  terms.reserve(components.size());
  for (const auto& c : components)
    terms.push_back(c.weight > 0 ? std::log(c.weight) + log_normal(o, c.mean, c.sigma) : kNegInf);
  return log_sum_exp(terms);
}

double GmmLayer::density(double o) const { return std::exp(log_density(o)); }

void GmmModel::validate() const {
  if (factor < 2) throw DataError("GMM factor must be >= 2");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& comps = levels[l].components;
    if (comps.empty()) throw DataError(fmt::format("GMM level {} has no components", l));
    double total = 0.0;
    for (const auto& c : comps) {
      if (!(c.weight >= 0.0) || !std::isfinite(c.mean) || !(c.sigma >= kSigmaFloor - 1e-12))
        throw DataError(fmt::format("GMM level {} has an invalid component", l));
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DataError(fmt::format("GMM level {} weights sum to {}", l, total));
  }
}

std::string serialize_gmm(const GmmModel& model) {
  std::string out = fmt::format("hdp-gmm 1\nfactor {}\nlevels {}\n", model.factor, model.levels.size());
  for (std::size_t l = 0; l < model.levels.size(); ++l) {
    out += fmt::format("level {} {}\n", l, model.levels[l].components.size());
    for (const auto& c : model.levels[l].components)
      out += fmt::format("{:.17g} {:.17g} {:.17g}\n", c.weight, c.mean, c.sigma);
  }
  return out;
}

GmmModel parse_gmm(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "hdp-gmm") throw DataError("not a GMM model file");
  if (version != 1) throw DataError(fmt::format("unsupported GMM model version {}", version));
  GmmModel model;
  std::size_t count = 0;
  if (!(in >> tag >> model.factor) || tag != "factor") throw DataError("GMM model: expected 'factor'");
  if (!(in >> tag >> count) || tag != "levels") throw DataError("GMM model: expected 'levels'");
  model.levels.resize(count);
  for (std::size_t l = 0; l < count; ++l) {
    std::size_t index = 0;
    std::size_t k = 0;
    if (!(in >> tag >> index >> k) || tag != "level" || index != l)
      throw DataError(fmt::format("GMM model: malformed header for level {}", l));
    model.levels[l].components.resize(k);
    for (auto& c : model.levels[l].components)
      if (!(in >> c.weight >> c.mean >> c.sigma)) throw DataError("GMM model: truncated component list");
  }
  model.validate();
  return model;
}

void save_gmm(const GmmModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_gmm(model);
}

GmmModel load_gmm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_gmm(text.str());
}

DisparityMap downsample_ground_truth(const DisparityMap& gt, int factor) {
  DisparityMap out((gt.width + factor - 1) / factor, (gt.height + factor - 1) / factor, gt.d_max / factor,
                   gt.scale);
  std::vector<int> block;
  for (int by = 0; by < out.height; ++by) {
    for (int bx = 0; bx < out.width; ++bx) {
      block.clear();
      for (int y = by * factor; y < std::min((by + 1) * factor, gt.height); ++y)
        for (int x = bx * factor; x < std::min((bx + 1) * factor, gt.width); ++x)
          if (gt.is_valid(x, y)) block.push_back(gt.at(x, y));
      const std::size_t i = static_cast<std::size_t>(by) * out.width + bx;
      if (block.empty()) {
        out.valid[i] = 0;
        continue;
      }
      std::sort(block.begin(), block.end());
      const std::size_t n = block.size();
      // floor(median / S), with the median of an even count the mean of the middle pair
      out.values[i] = n % 2 ? block[n / 2] / factor : (block[n / 2 - 1] + block[n / 2]) / (2 * factor);
    }
  }
  return out;
}

std::vector<std::vector<int>> collect_offsets(std::span<const DisparityMap> ground_truths, int factor,
                                              int levels) {
  if (factor < 2) throw ConfigError("factor must be >= 2");
  std::vector<std::vector<int>> offsets(static_cast<std::size_t>(levels));
  for (const DisparityMap& gt : ground_truths) {
    DisparityMap child = gt;
    for (int l = 0; l < levels; ++l) {
      DisparityMap parent = downsample_ground_truth(child, factor);
      for (int y = 0; y < child.height; ++y) {
        for (int x = 0; x < child.width; ++x) {
          if (!child.is_valid(x, y) || !parent.is_valid(x / factor, y / factor)) continue;
          offsets[l].push_back(parent.at(x / factor, y / factor) - child.at(x, y) / factor);
        }
      }
      child = std::move(parent);
    }
  }
  for (int l = 0; l < levels; ++l)
    if (offsets[l].empty()) throw DataError(fmt::format("no valid offset samples at level {}", l));
  return offsets;
}

EmResult train_gmm_layer(std::span<const int> samples, const EmOptions& options) {
  if (options.components < 1) throw ConfigError("GMM needs at least one component");
  if (samples.empty()) throw DataError("GMM training needs samples");

  // EM runs on the histogram of distinct integer values.
  std::map<int, double> histogram;
  for (int s : samples) histogram[s] += 1.0;
  std::vector<double> values, counts;
  for (const auto& [v, c] : histogram) {
    values.push_back(v);
    counts.push_back(c);
  }
  const double n = static_cast<double>(samples.size());
  const double floor_sigma = options.sigma_floor;

  EmResult result;
  if (values.size() == 1) {
    result.mixture.components = {{1.0, values[0], floor_sigma}};
    const double ll = n * log_normal(values[0], values[0], floor_sigma);
    result.log_likelihood = {ll};
    return result;
  }
  if (samples.size() < static_cast<std::size_t>(10 * options.components))
    spdlog::warn("GMM training with {} samples for {} components", samples.size(), options.components);

  const int k = std::min<int>(options.components, static_cast<int>(values.size()));
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) mean += counts[i] * values[i];
  mean /= n;
  for (std::size_t i = 0; i < values.size(); ++i) var += counts[i] * (values[i] - mean) * (values[i] - mean);
  const double spread = std::sqrt(var / n);

  // Quantile means; graded sigmas so components sharing a mean still separate.
  auto& comps = result.mixture.components;
  comps.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const double target = (c + 0.5) / k * n;
    double acc = 0.0;
    std::size_t i = 0;
    while (i + 1 < values.size() && acc + counts[i] < target) acc += counts[i++];
    comps[c] = {1.0 / k, values[i], std::max(floor_sigma, spread * (c + 1) / k)};
  }

  std::vector<double> resp(values.size() * static_cast<std::size_t>(k));
  std::vector<double> terms(static_cast<std::size_t>(k));
  const auto e_step = [&] {
    double ll = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      for (std::size_t c = 0; c < comps.size(); ++c)
        terms[c] = comps[c].weight > 0 ? std::log(comps[c].weight) + log_normal(values[i], comps[c].mean, comps[c].sigma)
                                       : kNegInf;
      const double lse = log_sum_exp(std::span<const double>(terms.data(), comps.size()));
      for (std::size_t c = 0; c < comps.size(); ++c) resp[i * k + c] = std::exp(terms[c] - lse);
      ll += counts[i] * lse;
    }
    return ll;
  };

  double previous = e_step();
  result.log_likelihood.push_back(previous);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (std::size_t c = 0; c < comps.size(); ++c) {
      double nk = 0.0, mu = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double r = counts[i] * resp[i * k + c];
        nk += r;
        mu += r * values[i];
      }
      if (nk <= 0.0) {
        comps[c].weight = 0.0;
        continue;
      }
      mu /= nk;
      double s2 = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) s2 += counts[i] * resp[i * k + c] * (values[i] - mu) * (values[i] - mu);
      comps[c] = {nk / n, mu, std::max(floor_sigma, std::sqrt(s2 / nk))};
    }
    const double ll = e_step();
    result.log_likelihood.push_back(ll);
    result.iterations = iter + 1;
    if (ll - previous < options.tolerance * n) break;
    previous = ll;
  }

  // Drop components that lost all responsibility and renormalize exactly.
  std::erase_if(comps, [](const GaussianComponent& c) { return c.weight < 1e-12; });
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  return result;
}

GmmModel train_gmm(const std::vector<std::vector<int>>& offsets, const EmOptions& options, int factor) {
  GmmModel model;
  model.factor = factor;
  for (const auto& level : offsets) model.levels.push_back(train_gmm_layer(level, options).mixture);
  model.validate();
  return model;
}

ProbabilityMatrix conditional_parent_given_child(const GmmLayer& gmm, int d_child, int d_parent, int factor) {
  ProbabilityMatrix m;
  m.rows = d_parent + 1;
  m.cols = d_child + 1;
  m.conditioning = Conditioning::ParentGivenChild;
  m.data.assign(static_cast<std::size_t>(m.rows) * m.cols, 0.0);
  std::vector<double> column(static_cast<std::size_t>(m.rows));
  for (int j = 0; j < m.cols; ++j) {
    const int mode = floor_div(j, factor);
    double peak = kNegInf;
    for (int i = 0; i < m.rows; ++i) {
      column[i] = gmm.log_density(i - mode);
      peak = std::max(peak, column[i]);
    }
    if (peak == kNegInf) {
      spdlog::warn("GMM assigns no mass to column {}; using a uniform column", j);
      for (int i = 0; i < m.rows; ++i) m.at(i, j) = 1.0 / m.rows;
      continue;
    }
    double total = 0.0;
    for (int i = 0; i < m.rows; ++i) total += (column[i] = std::exp(column[i] - peak));
    for (int i = 0; i < m.rows; ++i) m.at(i, j) = column[i] / total;
  }
  return m;
}

ProbabilityMatrix bayes_child_given_parent(const ProbabilityMatrix& parent_given_child, std::span<const double> prior) {
  if (parent_given_child.conditioning != Conditioning::ParentGivenChild)
    throw std::invalid_argument("expected a parent-given-child matrix");
  if (prior.size() != static_cast<std::size_t>(parent_given_child.cols))
    throw std::invalid_argument("prior length does not match the child disparity range");
  ProbabilityMatrix m = parent_given_child;
  m.conditioning = Conditioning::ChildGivenParent;
  for (int i = 0; i < m.rows; ++i) {
    double total = 0.0;
    for (int j = 0; j < m.cols; ++j) total += (m.at(i, j) *= prior[j]);
    if (!(total > 0.0)) {
      spdlog::warn("posterior row {} has no mass; using a uniform row", i);
      for (int j = 0; j < m.cols; ++j) m.at(i, j) = 1.0 / m.cols;
      continue;
    }
    for (int j = 0; j < m.cols; ++j) m.at(i, j) /= total;
  }
  return m;
}

std::vector<int> predict_row(std::span<const double> row, double delta) {
  if (row.empty()) return {};
  std::vector<int> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  // Descending probability, ascending index on ties: order[0] is the argmax seed.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row[a] > row[b]; });

  std::vector<int> selected{order[0]};
  double mass = row[order[0]];
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double p = row[order[k]];
    // Probabilities only shrink and the mass only grows from here on.
    if (!(p > 0.0) || p / (mass + p) < delta - 1e-12) break;
    selected.push_back(order[k]);
    mass += p;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

DisparityIntervalTable predict_intervals(const ProbabilityMatrix& child_given_parent, double delta) {
  if (child_given_parent.conditioning != Conditioning::ChildGivenParent)
    throw std::invalid_argument("expected a child-given-parent matrix");
  DisparityIntervalTable table;
  table.d_child = child_given_parent.cols - 1;
  table.threshold = delta;
  table.rows.reserve(static_cast<std::size_t>(child_given_parent.rows));
  for (int i = 0; i < child_given_parent.rows; ++i) {
    const auto values = predict_row(child_given_parent.row(i), delta);
    table.rows.push_back(DisparitySet::from_values(table.d_child, values));
  }
  return table;
}

namespace {

// Window sums add whole columns, each summed top to bottom; estimate_prior
// relies on this order to reproduce these results from shared column sums.
template <class CostAt>
int window_wta(const MatchingCost& cost, int x, int y, int radius, CostAt cost_at) {
  const int w = cost.width();
  const int h = cost.height();
  const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
  const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int d = 0; d <= cost.d_max(); ++d) {
    double sum = 0.0;
    for (int xx = x0; xx <= x1; ++xx) {
      double column = 0.0;
      for (int yy = y0; yy <= y1; ++yy)
        column += cost_at(static_cast<NodeId>(yy) * static_cast<NodeId>(w) + static_cast<NodeId>(xx), xx, d);
      sum += column;
    }
    if (sum < best_cost) {
      best_cost = sum;
      best = d;
    }
  }
  return best;
}

}  // namespace

int window_disparity_left(const MatchingCost& cost, int x, int y, int radius) {
  return window_wta(cost, x, y, radius, [&](NodeId p, int u, int d) { return cost.at_column(p, u, d); });
}

int window_disparity_right(const MatchingCost& cost, int x, int y, int radius) {
  return window_wta(cost, x, y, radius, [&](NodeId q, int u, int d) { return cost.reverse_at_column(q, u, d); });
}

PriorEstimate estimate_prior(const MatchingCost& cost, int stride, int radius) {
  if (stride < 1 || radius < 0) throw ConfigError("prior sampling stride must be >= 1");
  const int w = cost.width();
  const int h = cost.height();
  const int d_max = cost.d_max();
  const auto row_len = static_cast<std::size_t>(w);
  PriorEstimate est;
  std::vector<double> histogram(static_cast<std::size_t>(d_max) + 1, 0.0);

  // Per sample row: column sums of the cost over the window rows, for every
  // disparity. The cost is symmetric in its two pixels, so the right-to-left
  // column sum at (u, d) is the left-to-right one at (u + d, d).
  std::vector<double> columns(row_len * (static_cast<std::size_t>(d_max) + 1));
  std::vector<int> centers, matches, d_lr, d_rl;
  std::vector<double> best_cost;
  for (int x0 = 0; x0 < w; x0 += stride) centers.push_back(x0 + (std::min(x0 + stride, w) - x0) / 2);

  for (int y0 = 0; y0 < h; y0 += stride) {
    const int cy = y0 + (std::min(y0 + stride, h) - y0) / 2;
    const int r0 = std::max(0, cy - radius), r1 = std::min(h - 1, cy + radius);
    std::fill(columns.begin(), columns.end(), 0.0);
    double penalty_column = 0.0;
    for (int r = r0; r <= r1; ++r) penalty_column += cost.params().border_penalty();
    for (int d = 0; d <= d_max; ++d)
      for (int r = r0; r <= r1; ++r) cost.accumulate_row(r, d, &columns[static_cast<std::size_t>(d) * row_len]);

    auto lr_column = [&](int u, int d) { return columns[static_cast<std::size_t>(d) * row_len + static_cast<std::size_t>(u)]; };
    auto rl_column = [&](int u, int d) { return u + d < w ? lr_column(u + d, d) : penalty_column; };
    // Winner over d for every center at once, sweeping each disparity row in
    // turn; the first minimum wins as in window_wta.
    auto best_over_d = [&](const std::vector<int>& at, auto column_at, std::vector<int>& best) {
      best.assign(at.size(), 0);
      best_cost.assign(at.size(), std::numeric_limits<double>::infinity());
      for (int d = 0; d <= d_max; ++d) {
        for (std::size_t i = 0; i < at.size(); ++i) {
          const int c0 = std::max(0, at[i] - radius), c1 = std::min(w - 1, at[i] + radius);
          double sum = 0.0;
          for (int u = c0; u <= c1; ++u) sum += column_at(u, d);
          if (sum < best_cost[i]) {
            best_cost[i] = sum;
            best[i] = d;
          }
        }
      }
    };

    best_over_d(centers, lr_column, d_lr);
    matches.clear();
    for (std::size_t i = 0; i < centers.size(); ++i)
      if (centers[i] - d_lr[i] >= 0) matches.push_back(centers[i] - d_lr[i]);
    best_over_d(matches, rl_column, d_rl);
    est.sampled += centers.size();
    for (std::size_t i = 0, k = 0; i < centers.size(); ++i) {
      if (centers[i] - d_lr[i] < 0) continue;
      const int lr = d_lr[i], rl = d_rl[k++];
      if (std::abs(lr - rl) > 1) continue;
      est.stable.push_back({centers[i], cy, lr, rl});
      histogram[static_cast<std::size_t>(lr)] += 1.0;
    }
  }
  if (est.stable.empty()) spdlog::warn("no stable pixels at this level; using a uniform prior");
  const double total = static_cast<double>(est.stable.size()) + static_cast<double>(d_max + 1);
  est.prior.resize(histogram.size());
  for (std::size_t j = 0; j < histogram.size(); ++j) est.prior[j] = (histogram[j] + 1.0) / total;
  return est;
}

void write_matrix_csv(const ProbabilityMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (int i = 0; i < matrix.rows; ++i) {
    for (int j = 0; j < matrix.cols; ++j) out << (j ? "," : "") << fmt::format("{:.9g}", matrix.at(i, j));
    out << '\n';
  }
}

}  // namespace hdp
