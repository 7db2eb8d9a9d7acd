#pragma once

#include <cstdint>
#include <vector>

#include "ladr/boxes.hpp"

namespace ladr {

// One pyramid level of the anchor grid.
struct AnchorLevel {
  int stride = 0;     // pixels per cell
  double base = 0.0;  // base anchor size in pixels
};

struct AnchorConfig {
  int input_size = 96;
  std::vector<AnchorLevel> levels{{8, 12.0}, {16, 24.0}, {32, 48.0}, {64, 96.0}};
  std::vector<double> scales{1.0, 1.4142135623730951};
  std::vector<double> ratios{1.0, 2.0, 0.5};  // ratio = w / h

  int anchors_per_cell() const { return static_cast<int>(scales.size() * ratios.size()); }
};

// Presets matching the two network presets.
AnchorConfig desk_anchor_config();
AnchorConfig paper_anchor_config();

struct Anchor {
  BoxXYWH box;
  int level = 0;
  int row = 0;
  int col = 0;
  int slot = 0;
};

// Grid cells per level: ceil(input/stride), mirroring same-padded feature
// maps. Strides up to 32 must divide the input size exactly.
int grid_size(int input_size, int stride);

// Level-major, then row, col, slot; slot order is ratio-major then scale.
// Anchor (sigma, r) has w = base*sigma*sqrt(r), h = base*sigma/sqrt(r).
std::vector<Anchor> generate_anchors(const AnchorConfig& cfg);

}  // namespace ladr
