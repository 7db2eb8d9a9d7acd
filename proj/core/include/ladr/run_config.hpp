#pragma once

#include <string>

#include "ladr/dataset.hpp"
#include "ladr/network.hpp"
#include "ladr/trainer.hpp"

namespace ladr {

// Everything a run needs, loadable from one JSON file. Keys beginning with
// "#" are documentation and ignored; any other unknown key is rejected so a
// typo cannot silently fall back to a default.
struct RunConfig {
  std::string preset = "desk";  // desk | paper | tiny
  NetworkConfig network = desk_network_config();
  AugmentConfig aug1;
  AugmentConfig aug2;
  TrainConfig train;
  int batch1 = 7;
  int batch2 = 5;
  double score_thresh = 0.5;
  double nms_iou = 0.5;
  int max_detections = 100;
  double eval_score_floor = 0.05;
  int normalize_size = 224;
  double normalize_margin = 0.1;
};

// Applies the named network preset (desk, paper, tiny). ConfigError on an
// unknown name.
void apply_preset(RunConfig& cfg, const std::string& name);

// Parses a config file / JSON text. ConfigError lists the offending key on
// unknown keys; ParseError on malformed JSON.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// Inverse of parse_run_config (modulo "#" comments): a JSON dump that
// reproduces the config, e.g. for embedding in checkpoints.
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace ladr
