#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hdp/pyramid.hpp"

namespace hdp {

/// Truncated color + horizontal-gradient cost, in [0,1] intensity units.
struct CostParams {
  double alpha = 0.9;        // weight of the gradient term
  double tau_color = 0.0275; // ~7/255
  double tau_grad = 0.0078;  // ~2/255

  void validate() const;
  /// Cost charged when the matching pixel falls outside the image.
  double border_penalty() const { return (1.0 - alpha) * tau_color + alpha * tau_grad; }
};

/// Matching cost between the two images of one pyramid level.
///
/// cost(p, x) compares left pixel p = (u, y) with right pixel (u - x, y):
///   (1 - alpha) * min(tau_color, mean_c |L_c - R_c|) + alpha * min(tau_grad, |dL/du - dR/du|)
/// Gradients are central differences of the 0.299/0.587/0.114 luma, replicated
/// at the image border.
class MatchingCost {
 public:
  MatchingCost(const PyramidLayer& left, const PyramidLayer& right, const CostParams& params);

  int width() const { return width_; }
  int height() const { return height_; }
  int d_max() const { return d_max_; }
  const CostParams& params() const { return params_; }

  /// Left reference: left (u, y) against right (u - x, y).
  double operator()(NodeId p, int x) const { return at_column(p, static_cast<int>(p % static_cast<NodeId>(width_)), x); }

  /// Right reference: right (u, y) against left (u + x, y).
  double reverse(NodeId q, int x) const {
    return reverse_at_column(q, static_cast<int>(q % static_cast<NodeId>(width_)), x);
  }

  /// acc[u] += cost((u, y), x) for every column u of row y.
  void accumulate_row(int y, int x, double* acc) const;

  // Same as above when the caller already knows the column u of the pixel.
  double at_column(NodeId p, int u, int x) const {
    if (u - x < 0) return params_.border_penalty();
    return pixel_cost(left_, left_grad_, p, right_, right_grad_, p - static_cast<NodeId>(x));
  }
  double reverse_at_column(NodeId q, int u, int x) const {
    if (u + x >= width_) return params_.border_penalty();
    return pixel_cost(right_, right_grad_, q, left_, left_grad_, q + static_cast<NodeId>(x));
  }

 private:
  double pixel_cost(const std::vector<double>& a, const std::vector<double>& a_grad, NodeId pa,
                    const std::vector<double>& b, const std::vector<double>& b_grad, NodeId pb) const {
    const double* ca = &a[static_cast<std::size_t>(pa) * channels_];
    const double* cb = &b[static_cast<std::size_t>(pb) * channels_];
    double color = 0.0;
    for (int c = 0; c < channels_; ++c) color += std::fabs(ca[c] - cb[c]);
    color /= channels_;
    const double dg = a_grad[pa] - b_grad[pb];
    const double grad = std::fabs(dg);
    return (1.0 - params_.alpha) * (color < params_.tau_color ? color : params_.tau_color) +
           params_.alpha * (grad < params_.tau_grad ? grad : params_.tau_grad);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  int d_max_ = 0;
  CostParams params_;
  std::vector<double> left_, right_;          // intensities / 255
  std::vector<double> left_grad_, right_grad_;
};

/// Single evaluation of the matching cost. Throws std::out_of_range unless
/// 0 <= x <= left.d_max. Builds gradient tables on every call; use
/// MatchingCost for bulk evaluation.
double raw_cost(const PyramidLayer& left, const PyramidLayer& right, NodeId p, int x, const CostParams& params);

}  // namespace hdp
