#include "hdp/cost_volume.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hdp/error.hpp"

namespace hdp {

void CostParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("cost alpha must lie in [0,1]");
  if (!(tau_color > 0.0) || !(tau_grad > 0.0)) throw ConfigError("cost truncations must be > 0");
}

namespace {

std::vector<double> luma_gradient(const PyramidLayer& layer) {
  std::vector<double> gray(layer.node_count());
  for (NodeId i = 0; i < gray.size(); ++i) gray[i] = layer.gray(i) / 255.0;
  std::vector<double> grad(gray.size());
  const int w = layer.width;
  for (int y = 0; y < layer.height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      grad[row + x] = 0.5 * (gray[row + xr] - gray[row + xl]);
    }
  }
  return grad;
}

std::vector<double> normalized(const PyramidLayer& layer) {
  std::vector<double> out(layer.intensities.size());
  std::transform(layer.intensities.begin(), layer.intensities.end(), out.begin(),
                 [](double v) { return v / 255.0; });
  return out;
}

}  // namespace

MatchingCost::MatchingCost(const PyramidLayer& left, const PyramidLayer& right, const CostParams& params)
    : width_(left.width),
      height_(left.height),
      channels_(left.channels),
      d_max_(left.d_max),
      params_(params),
      left_(normalized(left)),
      right_(normalized(right)),
      left_grad_(luma_gradient(left)),
      right_grad_(luma_gradient(right)) {
  if (left.width != right.width || left.height != right.height || left.channels != right.channels)
    throw DataError("left and right layers differ in shape");
  params.validate();
}

namespace {

// Same arithmetic as MatchingCost::pixel_cost, with the channel count fixed so
// the loop over u vectorizes.
template <int C>
void accumulate_span(const double* left, const double* right, const double* left_grad, const double* right_grad,
                     int count, const CostParams& params, double* acc) {
  const double a = params.alpha, b = 1.0 - params.alpha;
  const double tc = params.tau_color, tg = params.tau_grad;
  for (int i = 0; i < count; ++i) {
    double color = 0.0;
    for (int c = 0; c < C; ++c) {
      const double l = left[i * C + c], r = right[i * C + c];
      color += std::fabs(l - r);
    }
    color /= C;
    const double dg = left_grad[i] - right_grad[i];
    const double grad = std::fabs(dg);
    acc[i] += b * (color < tc ? color : tc) + a * (grad < tg ? grad : tg);
  }
}

}  // namespace

void MatchingCost::accumulate_row(int y, int x, double* acc) const {
  const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(width_);
  const int split = std::min(x, width_);
  const double penalty = params_.border_penalty();
  for (int u = 0; u < split; ++u) acc[u] += penalty;
  const int count = width_ - split;
  if (count <= 0) return;
  const std::size_t p = row + static_cast<std::size_t>(split), q = p - static_cast<std::size_t>(x);
  const auto ch = static_cast<std::size_t>(channels_);
  const double* l = &left_[p * ch];
  const double* r = &right_[q * ch];
  if (channels_ == 3) {
    accumulate_span<3>(l, r, &left_grad_[p], &right_grad_[q], count, params_, acc + split);
  } else if (channels_ == 1) {
    accumulate_span<1>(l, r, &left_grad_[p], &right_grad_[q], count, params_, acc + split);
  } else {
    for (int i = 0; i < count; ++i)
      acc[split + i] += pixel_cost(left_, left_grad_, static_cast<NodeId>(p + i), right_, right_grad_,
                                   static_cast<NodeId>(q + i));
  }
}

double raw_cost(const PyramidLayer& left, const PyramidLayer& right, NodeId p, int x, const CostParams& params) {
  if (x < 0 || x > left.d_max) throw std::out_of_range("disparity outside [0, d_max]");
  if (p >= left.node_count()) throw std::out_of_range("pixel outside the layer");
  return MatchingCost(left, right, params)(p, x);
}

}  // namespace hdp
