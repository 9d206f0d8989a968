#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hdp/cost_volume.hpp"
#include "hdp/disparity_set.hpp"
#include "hdp/pyramid.hpp"
#include "hdp/raster_io.hpp"

namespace hdp {

inline constexpr double kSigmaFloor = 0.25;

struct GaussianComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sigma = 1.0;
};

/// Mixture over the integer offset o = D_{l+1} - floor(D_l / S) of one level.
struct GmmLayer {
  std::vector<GaussianComponent> components;

  double density(double o) const;
  double log_density(double o) const;
};

/// One mixture per level l in [0, L-1]; levels[l] relates level l to l+1.
struct GmmModel {
  int factor = 2;
  std::vector<GmmLayer> levels;

  int level_count() const { return static_cast<int>(levels.size()); }
  /// Throws DataError on empty mixtures, weights not summing to 1 or sigma below the floor.
  void validate() const;
};

std::string serialize_gmm(const GmmModel& model);
GmmModel parse_gmm(const std::string& text);
void save_gmm(const GmmModel& model, const std::filesystem::path& path);
GmmModel load_gmm(const std::filesystem::path& path);

// -- training ---------------------------------------------------------------

/// Parent ground truth: floor(median of the valid children / S); invalid
/// when the block has no valid child.
DisparityMap downsample_ground_truth(const DisparityMap& gt, int factor);

/// offsets[l] holds D_{l+1}(parent(p)) - floor(D_l(p) / S) for every valid p
/// at level l whose parent is valid, for l in [0, levels-1].
/// Throws DataError if some level collects no sample.
std::vector<std::vector<int>> collect_offsets(std::span<const DisparityMap> ground_truths, int factor,
                                              int levels);

struct EmOptions {
  int components = 3;
  int max_iterations = 500;
  double tolerance = 1e-9;  // on the mean per-sample log-likelihood
  double sigma_floor = kSigmaFloor;
};

struct EmResult {
  GmmLayer mixture;
  std::vector<double> log_likelihood;  // total, after each iteration's E-step
  int iterations = 0;
};

/// 1-D EM over integer samples. The sigma floor is enforced inside the M-step.
/// Identical samples collapse to one component with the floored sigma.
EmResult train_gmm_layer(std::span<const int> samples, const EmOptions& options);

GmmModel train_gmm(const std::vector<std::vector<int>>& offsets, const EmOptions& options, int factor);

// -- prediction -------------------------------------------------------------

enum class Conditioning {
  ParentGivenChild,  // (i,j) = P(D_{l+1} = i | D_l = j); columns sum to 1
  ChildGivenParent,  // (i,j) = P(D_l = j | D_{l+1} = i); rows sum to 1
};

/// Rows index parent disparity i in [0, d_{l+1}], columns child disparity j in [0, d_l].
struct ProbabilityMatrix {
  int rows = 0;
  int cols = 0;
  Conditioning conditioning = Conditioning::ParentGivenChild;
  std::vector<double> data;

  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  std::span<const double> row(int i) const {
    return std::span<const double>(data).subspan(static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols));
  }
};

/// Entry (i,j) = GMM(i - floor(j/S)), each column normalized.
ProbabilityMatrix conditional_parent_given_child(const GmmLayer& gmm, int d_child, int d_parent, int factor);

/// Bayes: (i,j) proportional to P(D_{l+1}=i | D_l=j) * P(D_l=j), rows normalized.
/// All-zero rows become uniform (with a warning).
ProbabilityMatrix bayes_child_given_parent(const ProbabilityMatrix& parent_given_child, std::span<const double> prior);

/// Per parent disparity, the predicted set of child disparities.
struct DisparityIntervalTable {
  int d_child = 0;
  double threshold = 0.0;
  std::vector<DisparitySet> rows;
};

/// Growing rule for one row: start from argmax (smallest j on ties), then take
/// candidates by descending probability while P / (c + P) >= delta, c being the
/// mass already selected. Returns the selection sorted ascending.
std::vector<int> predict_row(std::span<const double> row, double delta);

DisparityIntervalTable predict_intervals(const ProbabilityMatrix& child_given_parent, double delta);

struct PriorSample {
  int x = 0;
  int y = 0;
  int d_lr = 0;
  int d_rl = 0;
};

struct PriorEstimate {
  std::vector<double> prior;          // [0, d_l], sums to 1
  std::vector<PriorSample> stable;    // samples that passed the cross-check
  std::size_t sampled = 0;
};

/// Windowed winner-takes-all disparity of left pixel (x, y) over [0, d_max].
int window_disparity_left(const MatchingCost& cost, int x, int y, int radius);
/// Same for right pixel (x, y), matching towards the left image.
int window_disparity_right(const MatchingCost& cost, int x, int y, int radius);

/// Disparity prior of one level: WTA over a (2*radius+1)^2 box at the center
/// of every stride x stride square, kept when the left-right check agrees
/// within one pixel, then histogrammed with add-one smoothing.
PriorEstimate estimate_prior(const MatchingCost& cost, int stride = 5, int radius = 3);

void write_matrix_csv(const ProbabilityMatrix& matrix, const std::filesystem::path& path);

}  // namespace hdp
