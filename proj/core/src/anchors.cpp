#include "ladr/anchors.hpp"

#include <cmath>
#include <string>

namespace ladr {

AnchorConfig desk_anchor_config() {
  AnchorConfig cfg;
  cfg.input_size = 96;
  cfg.levels = {{8, 12.0}, {16, 24.0}, {32, 48.0}, {64, 96.0}};
  return cfg;
}

AnchorConfig paper_anchor_config() {
  AnchorConfig cfg;
  cfg.input_size = 416;
  cfg.levels = {{8, 32.0}, {16, 64.0}, {32, 128.0}, {64, 256.0}};
  return cfg;
}

int grid_size(int input_size, int stride) {
  if (stride <= 0) throw ConfigError("anchor stride must be positive");
  if (stride <= 32 && input_size % stride != 0) {
    throw ConfigError("input size " + std::to_string(input_size) +
                      " not divisible by stride " + std::to_string(stride));
  }
  return (input_size + stride - 1) / stride;
}

std::vector<Anchor> generate_anchors(const AnchorConfig& cfg) {
  if (cfg.input_size <= 0) throw ConfigError("input size must be positive");
  if (cfg.levels.empty()) throw ConfigError("anchor config needs at least one level");
  if (cfg.scales.empty() || cfg.ratios.empty()) {
    throw ConfigError("anchor config needs scales and ratios");
  }

  std::vector<Anchor> anchors;
  std::size_t total = 0;
  for (const AnchorLevel& lv : cfg.levels) {
    const std::size_t g = static_cast<std::size_t>(grid_size(cfg.input_size, lv.stride));
    total += g * g * cfg.scales.size() * cfg.ratios.size();
  }
  anchors.reserve(total);

  for (int level = 0; level < static_cast<int>(cfg.levels.size()); ++level) {
    const AnchorLevel& lv = cfg.levels[level];
    const int g = grid_size(cfg.input_size, lv.stride);
    for (int row = 0; row < g; ++row) {
      for (int col = 0; col < g; ++col) {
        const double cx = (col + 0.5) * lv.stride;
        const double cy = (row + 0.5) * lv.stride;
        int slot = 0;
        for (double ratio : cfg.ratios) {
          const double root = std::sqrt(ratio);
          for (double scale : cfg.scales) {
            anchors.push_back(Anchor{BoxXYWH{cx, cy, lv.base * scale * root,
                                             lv.base * scale / root},
                                     level, row, col, slot});
            ++slot;
          }
        }
      }
    }
  }
  return anchors;
}

}  // namespace ladr
