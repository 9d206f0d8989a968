#include "hdp/default_model.hpp"

namespace hdp {

namespace detail {
extern const char* const kDefaultModelText;
}

std::string_view default_model_text() { return detail::kDefaultModelText; }

const GmmModel& default_model() {
  static const GmmModel model = parse_gmm(std::string(default_model_text()));
  return model;
}

}  // namespace hdp
