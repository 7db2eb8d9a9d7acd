// ladr: synthesize data, train, evaluate, and run the oriented-face detector.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <opencv2/imgcodecs.hpp>

#include "ladr/checkpoint.hpp"
#include "ladr/dataset.hpp"
#include "ladr/errors.hpp"
#include "ladr/infer.hpp"
#include "ladr/metrics.hpp"
#include "ladr/run_config.hpp"
#include "ladr/synth.hpp"
#include "ladr/trainer.hpp"

namespace fs = std::filesystem;
using namespace ladr;

namespace {

constexpr std::uint64_t kDataSeedSalt = 0x9e3779b97f4a7c15ull;

RunConfig config_from_flags(const std::string& config_path,
                            const std::string& preset) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = load_run_config(config_path);
  if (!preset.empty()) apply_preset(cfg, preset);
  return cfg;
}

cv::Mat load_image_float(const std::string& path, int channels) {
  cv::Mat raw = cv::imread(
      path, channels == 1 ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR);
  if (raw.empty()) throw MissingImage("cannot read image: " + path);
  cv::Mat f;
  raw.convertTo(f, CV_32F, 1.0 / 255.0);
  return f;
}

struct LoadedModel {
  RunConfig cfg;
  std::unique_ptr<Network<float>> net;
};

LoadedModel load_model(const std::string& ckpt_path) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  LoadedModel m;
  m.cfg = parse_run_config(ck.config_json);
  m.net = std::make_unique<Network<float>>(m.cfg.network);
  restore_network(*m.net, ck);
  return m;
}

int cmd_synth(int count, int size, std::uint64_t seed,
              const std::string& out) {
  const std::string manifest = generate_synthetic(count, size, seed, out);
  std::cout << manifest << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& preset,
              const std::string& ds1_path, const std::string& ds2_path,
              const std::string& out, const std::string& log_path,
              int steps_override, std::int64_t seed_override) {
  RunConfig cfg = config_from_flags(config_path, preset);
  if (steps_override >= 0) cfg.train.total_steps = steps_override;
  if (seed_override >= 0)
    cfg.train.seed = static_cast<std::uint64_t>(seed_override);

  SamplePool ds1(ds1_path, DatasetOrigin::kDs1, cfg.network.in_channels);
  std::unique_ptr<SamplePool> ds2;
  int batch2 = 0;
  if (!ds2_path.empty()) {
    ds2 = std::make_unique<SamplePool>(ds2_path, DatasetOrigin::kDs2,
                                       cfg.network.in_channels);
    batch2 = cfg.batch2;
  }
  DualBatchIterator data(&ds1, ds2.get(), cfg.batch1, batch2, cfg.aug1,
                         cfg.aug2, cfg.network.input_size,
                         cfg.train.seed + kDataSeedSalt);

  Network<float> net(cfg.network);
  net.init(cfg.train.seed);

  const std::string csv_path = log_path.empty() ? out + ".csv" : log_path;
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write log: " + csv_path);
  TrainHooks hooks;
  hooks.csv = &csv;
  const TrainResult result = train(net, data, cfg.train, hooks);

  const Checkpoint ck = snapshot_network(net, run_config_to_json(cfg));
  save_checkpoint(out, ck);
  if (!result.logs.empty())
    std::cout << "final loss " << result.logs.back().loss.total << " after "
              << result.logs.size() << " steps\n";
  std::cout << "checkpoint " << out << "\nlog " << csv_path << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& data_path, bool rot4,
             const std::string& report_path, const std::string& pr_path) {
  LoadedModel m = load_model(ckpt);
  SamplePool pool(data_path, DatasetOrigin::kDs1, m.cfg.network.in_channels);

  std::vector<ImageEval> evals;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    Sample s = pool.get(i);
    const int turns = rot4 ? 4 : 1;
    for (int t = 0; t < turns; ++t) {
      if (t > 0) s = rot90_sample(s);
      ImageEval ie;
      ie.dets = run_detector(*m.net, s.image, m.cfg.eval_score_floor,
                             m.cfg.nms_iou, m.cfg.max_detections);
      ie.gts = s.objects;
      evals.push_back(std::move(ie));
    }
  }
  const EvalReport report =
      evaluate(evals, 0.5, m.cfg.eval_score_floor, m.cfg.score_thresh);
  std::cout << report_to_text(report);
  if (!report_path.empty()) {
    std::ofstream os(report_path);
    if (!os) throw IoError("cannot write report: " + report_path);
    os << report_to_json(report) << "\n";
  }
  if (!pr_path.empty()) {
    std::ofstream os(pr_path);
    if (!os) throw IoError("cannot write PR curve: " + pr_path);
    os << pr_curve_to_csv(report);
  }
  return 0;
}

int cmd_detect(const std::string& ckpt, const std::vector<std::string>& images,
               double score, const std::string& out_dir) {
  LoadedModel m = load_model(ckpt);
  fs::create_directories(out_dir);
  const double thresh = score >= 0.0 ? score : m.cfg.score_thresh;
  for (const auto& path : images) {
    const cv::Mat img = load_image_float(path, m.cfg.network.in_channels);
    const auto dets =
        run_detector(*m.net, img, thresh, m.cfg.nms_iou, m.cfg.max_detections);
    const std::string stem = fs::path(path).stem().string();
    const cv::Mat annotated = render_detections(img, dets);
    const std::string png = (fs::path(out_dir) / (stem + "_det.png")).string();
    if (!cv::imwrite(png, annotated)) throw IoError("cannot write " + png);
    std::ofstream js((fs::path(out_dir) / (stem + "_det.json")).string());
    js << detections_to_json(path, dets) << "\n";
    std::cout << stem << ": " << dets.size() << " detection(s)\n";
  }
  return 0;
}

int cmd_normalize(const std::string& ckpt,
                  const std::vector<std::string>& images, double score,
                  const std::string& out_dir, int size, double margin) {
  LoadedModel m = load_model(ckpt);
  fs::create_directories(out_dir);
  const double thresh = score >= 0.0 ? score : m.cfg.score_thresh;
  for (const auto& path : images) {
    const cv::Mat img = load_image_float(path, m.cfg.network.in_channels);
    const auto dets =
        run_detector(*m.net, img, thresh, m.cfg.nms_iou, m.cfg.max_detections);
    const std::string stem = fs::path(path).stem().string();
    std::ofstream js((fs::path(out_dir) / (stem + "_faces.json")).string());
    js << detections_to_json(path, dets) << "\n";
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const cv::Mat chip = normalize_face(img, dets[i], size, margin);
      cv::Mat chip8;
      chip.convertTo(chip8, CV_8U, 255.0);
      const std::string png =
          (fs::path(out_dir) / (stem + "_face" + std::to_string(i) + ".png"))
              .string();
      if (!cv::imwrite(png, chip8)) throw IoError("cannot write " + png);
    }
    std::cout << stem << ": " << dets.size() << " face(s)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oriented face detector: training and normalization toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  int s_count = 0, s_size = 96;
  std::uint64_t s_seed = 1;
  std::string s_out;
  synth->add_option("--count", s_count, "number of images")->required();
  synth->add_option("--size", s_size, "image side in pixels");
  synth->add_option("--seed", s_seed, "generator seed");
  synth->add_option("--out", s_out, "output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "train a detector");
  std::string t_config, t_preset, t_ds1, t_ds2, t_out, t_log;
  int t_steps = -1;
  std::int64_t t_seed = -1;
  tr->add_option("--config", t_config, "JSON config file");
  tr->add_option("--preset", t_preset, "network preset (desk|paper|tiny)");
  tr->add_option("--ds1", t_ds1, "angle-labelled manifest")->required();
  tr->add_option("--ds2", t_ds2, "box-only manifest");
  tr->add_option("--out", t_out, "checkpoint output path")->required();
  tr->add_option("--log", t_log, "loss CSV path (default <out>.csv)");
  tr->add_option("--steps", t_steps, "override total steps");
  tr->add_option("--seed", t_seed, "override seed");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string e_ckpt, e_data, e_report, e_pr;
  bool e_rot4 = false;
  ev->add_option("--ckpt", e_ckpt, "checkpoint path")->required();
  ev->add_option("--data", e_data, "evaluation manifest")->required();
  ev->add_flag("--rot4", e_rot4, "also evaluate 90/180/270 degree copies");
  ev->add_option("--report", e_report, "write JSON report here");
  ev->add_option("--pr", e_pr, "write PR curve CSV here");

  // detect
  auto* de = app.add_subcommand("detect", "detect faces in images");
  std::string d_ckpt, d_out = "detections";
  std::vector<std::string> d_images;
  double d_score = -1.0;
  de->add_option("--ckpt", d_ckpt, "checkpoint path")->required();
  de->add_option("--image", d_images, "input image(s)")->required();
  de->add_option("--score", d_score, "score threshold");
  de->add_option("--out", d_out, "output directory");

  // normalize
  auto* no = app.add_subcommand("normalize", "cut upright face chips");
  std::string n_ckpt, n_out = "faces";
  std::vector<std::string> n_images;
  double n_score = -1.0, n_margin = 0.1;
  int n_size = 224;
  no->add_option("--ckpt", n_ckpt, "checkpoint path")->required();
  no->add_option("--image", n_images, "input image(s)")->required();
  no->add_option("--score", n_score, "score threshold");
  no->add_option("--out", n_out, "output directory");
  no->add_option("--size", n_size, "chip side in pixels");
  no->add_option("--margin", n_margin, "box margin fraction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(s_count, s_size, s_seed, s_out);
    if (tr->parsed())
      return cmd_train(t_config, t_preset, t_ds1, t_ds2, t_out, t_log, t_steps,
                       t_seed);
    if (ev->parsed()) return cmd_eval(e_ckpt, e_data, e_rot4, e_report, e_pr);
    if (de->parsed()) return cmd_detect(d_ckpt, d_images, d_score, d_out);
    if (no->parsed())
      return cmd_normalize(n_ckpt, n_images, n_score, n_out, n_size, n_margin);
  } catch (const NonFiniteLoss& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
