#include "cli/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "hdp/error.hpp"

namespace hdp::cli {

void RunConfig::validate() const { match_params().validate(); }

MatchParams RunConfig::match_params() const {
  MatchParams p;
  p.factor = factor;
  p.levels = levels;
  p.delta0 = effective_delta0();
  p.beta = effective_beta();
  p.gamma = gamma;
  p.cost = cost;
  p.ordering = {tree, seed};
  p.median_prefilter = median_prefilter;
  return p;
}

nlohmann::json RunConfig::to_json() const {
  return {
      {"S", factor},
      {"L", levels},
      {"size_class", to_string(size_class)},
      {"delta0", effective_delta0()},
      {"beta", effective_beta()},
      {"gamma", gamma},
      {"cost", {{"alpha", cost.alpha}, {"tau_color", cost.tau_color}, {"tau_grad", cost.tau_grad}}},
      {"tree", to_string(tree)},
      {"seed", seed},
      {"hdp", hdp},
      {"median_prefilter", median_prefilter},
      {"model", model_path.empty() ? std::string("builtin") : model_path},
      {"out", out_dir},
  };
}

namespace {

namespace pt = boost::property_tree;

template <class T>
T get_value(const pt::ptree& node, const std::string& where) {
  try {
    return node.get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError(fmt::format("config: bad value '{}' for {}", node.data(), where));
  }
}

bool get_bool(const pt::ptree& node, const std::string& where) {
  const std::string v = node.data();
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("config: bad boolean '{}' for {}", v, where));
}

}  // namespace

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  for (const auto& [section, keys] : tree) {
    if (keys.empty() && !keys.data().empty())
      throw ConfigError(fmt::format("config: key '{}' outside a section", section));
    for (const auto& [key, node] : keys) {
      const std::string where = section + "." + key;
      if (section == "pyramid" && key == "S") config.factor = get_value<int>(node, where);
      else if (section == "pyramid" && key == "L") config.levels = get_value<int>(node, where);
      else if (section == "hdp" && key == "enabled") config.hdp = get_bool(node, where);
      else if (section == "hdp" && key == "size_class") config.size_class = parse_size_class(node.data());
      else if (section == "hdp" && key == "delta0") config.delta0 = get_value<double>(node, where);
      else if (section == "hdp" && key == "beta") config.beta = get_value<double>(node, where);
      else if (section == "hdp" && key == "model") config.model_path = node.data();
      else if (section == "aggregation" && key == "gamma") config.gamma = get_value<double>(node, where);
      else if (section == "cost" && key == "alpha") config.cost.alpha = get_value<double>(node, where);
      else if (section == "cost" && key == "tau_color") config.cost.tau_color = get_value<double>(node, where);
      else if (section == "cost" && key == "tau_grad") config.cost.tau_grad = get_value<double>(node, where);
      else if (section == "forest" && key == "method") config.tree = parse_tree_kind(node.data());
      else if (section == "forest" && key == "seed") config.seed = get_value<std::uint64_t>(node, where);
      else if (section == "forest" && key == "median_prefilter") config.median_prefilter = get_bool(node, where);
      else throw ConfigError(fmt::format("config: unknown key {}", where));
    }
  }
}

}  // namespace hdp::cli
