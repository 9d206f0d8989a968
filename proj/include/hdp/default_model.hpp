#pragma once

#include <string_view>

#include "hdp/hdp_model.hpp"

namespace hdp {

/// Offset model shipped with the library: S = 2, trained on synthetic
/// piecewise-planar ground truth when the project is built.
const GmmModel& default_model();
std::string_view default_model_text();

}  // namespace hdp
