#include "ladr/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ladr/errors.hpp"

namespace ladr {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (!key.empty() && key[0] == '#') continue;
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError("unknown config key: " + path + key);
  }
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError(std::string("config key ") + key + " must be a number");
  return j[key].get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
  return static_cast<int>(get_num(j, key, fallback));
}

void parse_augment(const json& j, const std::string& path, AugmentConfig& a) {
  check_keys(j, path, {"p_rot90", "p_hflip", "p_vflip", "p_tile2x2",
                       "p_tile3x3"});
  a.p_rot90 = get_num(j, "p_rot90", a.p_rot90);
  a.p_hflip = get_num(j, "p_hflip", a.p_hflip);
  a.p_vflip = get_num(j, "p_vflip", a.p_vflip);
  a.p_tile2x2 = get_num(j, "p_tile2x2", a.p_tile2x2);
  a.p_tile3x3 = get_num(j, "p_tile3x3", a.p_tile3x3);
  for (const double p : {a.p_rot90, a.p_hflip, a.p_vflip, a.p_tile2x2,
                         a.p_tile3x3})
    if (p < 0.0 || p > 1.0)
      throw ConfigError("augment probability outside [0,1] in " + path);
}

RunConfig parse(const json& j) {
  RunConfig cfg;
  check_keys(j, "", {"preset", "network", "augment_ds1", "augment_ds2",
                     "train", "batch1", "batch2", "infer", "normalize"});
  if (j.contains("preset")) {
    if (!j["preset"].is_string())
      throw ConfigError("config key preset must be a string");
    apply_preset(cfg, j["preset"].get<std::string>());
  }
  if (j.contains("network")) {
    const json& n = j["network"];
    check_keys(n, "network.", {"input_size", "in_channels", "widths",
                               "thirds", "neck", "anchor_bases"});
    cfg.network.input_size = get_int(n, "input_size", cfg.network.input_size);
    cfg.network.anchors.input_size = cfg.network.input_size;
    cfg.network.in_channels = get_int(n, "in_channels", cfg.network.in_channels);
    if (n.contains("widths")) {
      if (!n["widths"].is_array() || n["widths"].size() != 5)
        throw ConfigError("network.widths must list 5 block widths");
      for (int i = 0; i < 5; ++i) cfg.network.widths[i] = n["widths"][i];
    }
    if (n.contains("thirds")) {
      if (!n["thirds"].is_array() || n["thirds"].size() != 4)
        throw ConfigError("network.thirds must list 4 widths");
      for (int i = 0; i < 4; ++i) cfg.network.thirds[i] = n["thirds"][i];
    }
    cfg.network.neck = get_int(n, "neck", cfg.network.neck);
    if (n.contains("anchor_bases")) {
      if (!n["anchor_bases"].is_array() || n["anchor_bases"].size() != 4)
        throw ConfigError("network.anchor_bases must list 4 sizes");
      for (int i = 0; i < 4; ++i)
        cfg.network.anchors.levels[i].base = n["anchor_bases"][i];
    }
  }
  if (j.contains("augment_ds1"))
    parse_augment(j["augment_ds1"], "augment_ds1.", cfg.aug1);
  if (j.contains("augment_ds2"))
    parse_augment(j["augment_ds2"], "augment_ds2.", cfg.aug2);
  if (j.contains("train")) {
    const json& t = j["train"];
    check_keys(t, "train.",
               {"total_steps", "lr", "lr_final", "warmup_steps", "grad_clip",
                "minibatch", "pos_fraction", "pos_iou", "neg_iou", "seed",
                "loss"});
    cfg.train.total_steps = get_int(t, "total_steps", cfg.train.total_steps);
    cfg.train.lr = get_num(t, "lr", cfg.train.lr);
    cfg.train.lr_final = get_num(t, "lr_final", cfg.train.lr_final);
    cfg.train.warmup_steps = get_int(t, "warmup_steps", cfg.train.warmup_steps);
    cfg.train.grad_clip = get_num(t, "grad_clip", cfg.train.grad_clip);
    cfg.train.minibatch = get_int(t, "minibatch", cfg.train.minibatch);
    cfg.train.pos_fraction = get_num(t, "pos_fraction", cfg.train.pos_fraction);
    cfg.train.pos_iou = get_num(t, "pos_iou", cfg.train.pos_iou);
    cfg.train.neg_iou = get_num(t, "neg_iou", cfg.train.neg_iou);
    cfg.train.seed = static_cast<std::uint64_t>(
        get_num(t, "seed", static_cast<double>(cfg.train.seed)));
    if (t.contains("loss")) {
      const json& l = t["loss"];
      check_keys(l, "train.loss.",
                 {"loc", "obj", "av", "ad", "ds1", "ds2", "gamma", "delta",
                  "dir_eps"});
      LossWeights& w = cfg.train.weights;
      w.loc = get_num(l, "loc", w.loc);
      w.obj = get_num(l, "obj", w.obj);
      w.av = get_num(l, "av", w.av);
      w.ad = get_num(l, "ad", w.ad);
      w.ds1 = get_num(l, "ds1", w.ds1);
      w.ds2 = get_num(l, "ds2", w.ds2);
      w.gamma = get_num(l, "gamma", w.gamma);
      w.delta = get_num(l, "delta", w.delta);
      w.dir_eps = get_num(l, "dir_eps", w.dir_eps);
    }
  }
  cfg.batch1 = get_int(j, "batch1", cfg.batch1);
  cfg.batch2 = get_int(j, "batch2", cfg.batch2);
  if (j.contains("infer")) {
    const json& i = j["infer"];
    check_keys(i, "infer.",
               {"score_thresh", "nms_iou", "max_detections",
                "eval_score_floor"});
    cfg.score_thresh = get_num(i, "score_thresh", cfg.score_thresh);
    cfg.nms_iou = get_num(i, "nms_iou", cfg.nms_iou);
    cfg.max_detections = get_int(i, "max_detections", cfg.max_detections);
    cfg.eval_score_floor = get_num(i, "eval_score_floor", cfg.eval_score_floor);
  }
  if (j.contains("normalize")) {
    const json& n = j["normalize"];
    check_keys(n, "normalize.", {"size", "margin"});
    cfg.normalize_size = get_int(n, "size", cfg.normalize_size);
    cfg.normalize_margin = get_num(n, "margin", cfg.normalize_margin);
  }
  return cfg;
}

}  // namespace

void apply_preset(RunConfig& cfg, const std::string& name) {
  cfg.preset = name;
  if (name == "desk") {
    cfg.network = desk_network_config();
  } else if (name == "paper") {
    cfg.network = paper_network_config();
  } else if (name == "tiny") {
    cfg.network = tiny_network_config();
  } else {
    throw ConfigError("unknown preset: " + name);
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  try {
    return parse(j);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["preset"] = cfg.preset;
  j["network"] = {
      {"input_size", cfg.network.input_size},
      {"in_channels", cfg.network.in_channels},
      {"widths", cfg.network.widths},
      {"thirds", cfg.network.thirds},
      {"neck", cfg.network.neck},
      {"anchor_bases",
       {cfg.network.anchors.levels[0].base, cfg.network.anchors.levels[1].base,
        cfg.network.anchors.levels[2].base,
        cfg.network.anchors.levels[3].base}},
  };
  const auto aug_json = [](const AugmentConfig& a) {
    return json{{"p_rot90", a.p_rot90},
                {"p_hflip", a.p_hflip},
                {"p_vflip", a.p_vflip},
                {"p_tile2x2", a.p_tile2x2},
                {"p_tile3x3", a.p_tile3x3}};
  };
  j["augment_ds1"] = aug_json(cfg.aug1);
  j["augment_ds2"] = aug_json(cfg.aug2);
  const LossWeights& w = cfg.train.weights;
  j["train"] = {
      {"total_steps", cfg.train.total_steps},
      {"lr", cfg.train.lr},
      {"lr_final", cfg.train.lr_final},
      {"warmup_steps", cfg.train.warmup_steps},
      {"grad_clip", cfg.train.grad_clip},
      {"minibatch", cfg.train.minibatch},
      {"pos_fraction", cfg.train.pos_fraction},
      {"pos_iou", cfg.train.pos_iou},
      {"neg_iou", cfg.train.neg_iou},
      {"seed", cfg.train.seed},
      {"loss",
       {{"loc", w.loc},
        {"obj", w.obj},
        {"av", w.av},
        {"ad", w.ad},
        {"ds1", w.ds1},
        {"ds2", w.ds2},
        {"gamma", w.gamma},
        {"delta", w.delta},
        {"dir_eps", w.dir_eps}}},
  };
  j["batch1"] = cfg.batch1;
  j["batch2"] = cfg.batch2;
  j["infer"] = {{"score_thresh", cfg.score_thresh},
                {"nms_iou", cfg.nms_iou},
                {"max_detections", cfg.max_detections},
                {"eval_score_floor", cfg.eval_score_floor}};
  j["normalize"] = {{"size", cfg.normalize_size},
                    {"margin", cfg.normalize_margin}};
  return j.dump(2);
}

}  // namespace ladr
