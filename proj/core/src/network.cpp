#include "ladr/network.hpp"

namespace ladr {

NetworkConfig desk_network_config() {
  NetworkConfig cfg;
  cfg.input_size = 96;
  cfg.in_channels = 1;
  cfg.widths = {8, 8, 16, 16, 16};
  cfg.thirds = {32, 64, 64, 64};
  cfg.neck = 16;
  cfg.anchors = desk_anchor_config();
  return cfg;
}

NetworkConfig paper_network_config() {
  NetworkConfig cfg;
  cfg.input_size = 416;
  cfg.in_channels = 3;
  cfg.widths = {32, 48, 64, 96, 128};
  cfg.thirds = {192, 256, 384, 512};
  cfg.neck = 96;
  cfg.anchors = paper_anchor_config();
  return cfg;
}

NetworkConfig tiny_network_config() {
  NetworkConfig cfg;
  cfg.input_size = 32;
  cfg.in_channels = 1;
  cfg.widths = {2, 2, 2, 2, 2};
  cfg.thirds = {4, 4, 4, 4};
  cfg.neck = 4;
  cfg.anchors.input_size = 32;
  cfg.anchors.levels = {{8, 8.0}, {16, 16.0}, {32, 24.0}, {64, 28.0}};
  return cfg;
}

}  // namespace ladr
