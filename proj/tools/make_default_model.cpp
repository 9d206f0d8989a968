// Trains the built-in offset model on synthetic piecewise-planar disparity
// maps and writes it out as a C++ source file.

#include <cstdio>
#include <fstream>
#include <vector>

#include "hdp/hdp_model.hpp"
#include "hdp/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_default_model OUT.cpp\n");
    return 2;
  }
  constexpr int kMaps = 24;
  constexpr int kLevels = 6;
  std::vector<hdp::DisparityMap> maps;
  for (int i = 0; i < kMaps; ++i) maps.push_back(hdp::random_planar_disparity(1000 + i, 400, 300, 128));
  const auto offsets = hdp::collect_offsets(maps, 2, kLevels);
  // One component per level: with more, EM parks extra components on the
  // integer lattice at offset 0 with the floor sigma, leaving almost no
  // density at +-1, where rounded coarse disparities land.
  hdp::EmOptions options;
  options.components = 1;
  const hdp::GmmModel model = hdp::train_gmm(offsets, options, 2);

  std::ofstream out(argv[1]);
  out << "// Generated by make_default_model. Do not edit.\n"
      << "namespace hdp::detail {\n"
      << "extern const char* const kDefaultModelText;\n"
      << "const char* const kDefaultModelText = R\"hdpgmm(" << hdp::serialize_gmm(model) << ")hdpgmm\";\n"
      << "}\n";
  return out ? 0 : 1;
}
