#include "ladr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ladr/errors.hpp"

namespace ladr {
namespace {

using nlohmann::json;

double num_at(const json& arr, std::size_t i, int line) {
  if (!arr[i].is_number())
    throw ParseError("manifest line " + std::to_string(line) +
                     ": expected a number");
  return arr[i].get<double>();
}

GroundTruthObject parse_object(const json& jo, int line) {
  GroundTruthObject obj;
  if (!jo.contains("box") || !jo["box"].is_array() || jo["box"].size() != 4)
    throw ParseError("manifest line " + std::to_string(line) +
                     ": object needs a 4-element box");
  obj.box.xmin = num_at(jo["box"], 0, line);
  obj.box.ymin = num_at(jo["box"], 1, line);
  obj.box.xmax = num_at(jo["box"], 2, line);
  obj.box.ymax = num_at(jo["box"], 3, line);
  if (!(obj.box.xmin < obj.box.xmax) || !(obj.box.ymin < obj.box.ymax))
    throw InvalidBox("manifest line " + std::to_string(line) +
                     ": empty or inverted box");
  const bool has_l = jo.contains("left_eye");
  const bool has_r = jo.contains("right_eye");
  if (has_l != has_r)
    throw ParseError("manifest line " + std::to_string(line) +
                     ": eyes must come as a pair");
  if (has_l) {
    const auto& l = jo["left_eye"];
    const auto& r = jo["right_eye"];
    if (!l.is_array() || l.size() != 2 || !r.is_array() || r.size() != 2)
      throw ParseError("manifest line " + std::to_string(line) +
                       ": eye keypoints need [x, y]");
    obj.keypoints = KeypointPair{num_at(l, 0, line), num_at(l, 1, line),
                                 num_at(r, 0, line), num_at(r, 1, line)};
  }
  if (jo.contains("angle")) {
    if (!jo["angle"].is_number())
      throw ParseError("manifest line " + std::to_string(line) +
                       ": angle must be a number");
    obj.angle = RotationAngle(jo["angle"].get<double>());
  } else if (obj.keypoints) {
    obj.angle = angle_from_keypoints(*obj.keypoints);
  }
  return obj;
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path);
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(lineno) + ": " +
                       e.what());
    }
    try {
      ManifestEntry entry;
      if (!j.contains("image") || !j["image"].is_string())
        throw ParseError("manifest line " + std::to_string(lineno) +
                         ": missing image path");
      entry.image = j["image"].get<std::string>();
      if (j.contains("objects")) {
        if (!j["objects"].is_array())
          throw ParseError("manifest line " + std::to_string(lineno) +
                           ": objects must be a list");
        for (const auto& jo : j["objects"])
          entry.objects.push_back(parse_object(jo, lineno));
      }
      out.push_back(std::move(entry));
    } catch (const json::exception& e) {
      throw ParseError("manifest line " + std::to_string(lineno) + ": " +
                       e.what());
    }
  }
  return out;
}

void save_manifest(const std::string& path,
                   const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write manifest: " + path);
  for (const auto& e : entries) {
    json j;
    j["image"] = e.image;
    j["objects"] = json::array();
    for (const auto& o : e.objects) {
      json jo;
      jo["box"] = {o.box.xmin, o.box.ymin, o.box.xmax, o.box.ymax};
      if (o.keypoints) {
        jo["left_eye"] = {o.keypoints->left_x, o.keypoints->left_y};
        jo["right_eye"] = {o.keypoints->right_x, o.keypoints->right_y};
      }
      if (o.angle) jo["angle"] = o.angle->value();
      j["objects"].push_back(std::move(jo));
    }
    os << j.dump() << "\n";
  }
  if (!os) throw IoError("manifest write failed: " + path);
}

SamplePool::SamplePool(const std::string& manifest_path, DatasetOrigin origin,
                       int channels)
    : root_(std::filesystem::path(manifest_path).parent_path().string()),
      entries_(load_manifest(manifest_path)),
      origin_(origin),
      channels_(channels),
      cache_(entries_.size()) {}

const Sample& SamplePool::get(std::size_t index) const {
  auto& slot = cache_.at(index);
  if (slot) return *slot;
  const ManifestEntry& e = entries_[index];
  const std::string full =
      root_.empty() ? e.image : (std::filesystem::path(root_) / e.image).string();
  cv::Mat raw = cv::imread(
      full, channels_ == 1 ? cv::IMREAD_GRAYSCALE : cv::IMREAD_COLOR);
  if (raw.empty()) throw MissingImage("cannot read image: " + full);
  Sample s;
  raw.convertTo(s.image, CV_32F, 1.0 / 255.0);
  s.origin = origin_;
  const double w = raw.cols, h = raw.rows;
  for (GroundTruthObject obj : e.objects) {
    obj.box.xmin = std::clamp(obj.box.xmin, 0.0, w);
    obj.box.xmax = std::clamp(obj.box.xmax, 0.0, w);
    obj.box.ymin = std::clamp(obj.box.ymin, 0.0, h);
    obj.box.ymax = std::clamp(obj.box.ymax, 0.0, h);
    if (!(obj.box.xmin < obj.box.xmax) || !(obj.box.ymin < obj.box.ymax))
      throw InvalidBox("box outside image: " + e.image);
    s.objects.push_back(obj);
  }
  slot = std::move(s);
  return *slot;
}

Sample rot90_sample(const Sample& s) {
  Sample out;
  out.origin = s.origin;
  cv::rotate(s.image, out.image, cv::ROTATE_90_COUNTERCLOCKWISE);
  const double w = s.image.cols;
  for (const auto& o : s.objects) {
    GroundTruthObject t;
    t.box = {o.box.ymin, w - o.box.xmax, o.box.ymax, w - o.box.xmin};
    if (o.keypoints)
      t.keypoints = KeypointPair{o.keypoints->left_y, w - 1.0 - o.keypoints->left_x,
                                 o.keypoints->right_y, w - 1.0 - o.keypoints->right_x};
    if (o.angle) t.angle = rot90_angle(*o.angle);
    out.objects.push_back(std::move(t));
  }
  return out;
}

Sample hflip_sample(const Sample& s) {
  Sample out;
  out.origin = s.origin;
  cv::flip(s.image, out.image, 1);
  const double w = s.image.cols;
  for (const auto& o : s.objects) {
    GroundTruthObject t;
    t.box = {w - o.box.xmax, o.box.ymin, w - o.box.xmin, o.box.ymax};
    if (o.keypoints)  // mirroring swaps which eye is which
      t.keypoints = KeypointPair{w - 1.0 - o.keypoints->right_x, o.keypoints->right_y,
                                 w - 1.0 - o.keypoints->left_x, o.keypoints->left_y};
    if (o.angle) t.angle = hflip_angle(*o.angle);
    out.objects.push_back(std::move(t));
  }
  return out;
}

Sample vflip_sample(const Sample& s) {
  Sample out;
  out.origin = s.origin;
  cv::flip(s.image, out.image, 0);
  const double h = s.image.rows;
  for (const auto& o : s.objects) {
    GroundTruthObject t;
    t.box = {o.box.xmin, h - o.box.ymax, o.box.xmax, h - o.box.ymin};
    if (o.keypoints)
      t.keypoints = KeypointPair{o.keypoints->right_x, h - 1.0 - o.keypoints->right_y,
                                 o.keypoints->left_x, h - 1.0 - o.keypoints->left_y};
    if (o.angle) t.angle = vflip_angle(*o.angle);
    out.objects.push_back(std::move(t));
  }
  return out;
}

namespace {

struct Placement {
  double scale, dx, dy;
  int rw, rh;
};

Placement fit(int sw, int sh, int cw, int ch) {
  const double s = std::min(static_cast<double>(cw) / sw,
                            static_cast<double>(ch) / sh);
  Placement p;
  p.scale = s;
  p.rw = std::max(1, static_cast<int>(std::lround(sw * s)));
  p.rh = std::max(1, static_cast<int>(std::lround(sh * s)));
  p.dx = (cw - sw * s) / 2.0;
  p.dy = (ch - sh * s) / 2.0;
  return p;
}

// Letterboxes `part` into the cell at (ox, oy) of `canvas` and appends the
// transformed annotations. Objects shrunk below min_extent are dropped.
void place(const Sample& part, cv::Mat& canvas, int ox, int oy, int cw, int ch,
           std::vector<GroundTruthObject>& objects, double min_extent) {
  const Placement p = fit(part.image.cols, part.image.rows, cw, ch);
  cv::Mat resized;
  cv::resize(part.image, resized, cv::Size(p.rw, p.rh), 0, 0, cv::INTER_LINEAR);
  int px = ox + static_cast<int>(std::lround(p.dx));
  int py = oy + static_cast<int>(std::lround(p.dy));
  px = std::clamp(px, ox, ox + cw - p.rw);
  py = std::clamp(py, oy, oy + ch - p.rh);
  resized.copyTo(canvas(cv::Rect(px, py, p.rw, p.rh)));

  const double fx = ox + p.dx, fy = oy + p.dy;
  for (const auto& o : part.objects) {
    GroundTruthObject t;
    t.box = {o.box.xmin * p.scale + fx, o.box.ymin * p.scale + fy,
             o.box.xmax * p.scale + fx, o.box.ymax * p.scale + fy};
    if (t.box.xmax - t.box.xmin < min_extent ||
        t.box.ymax - t.box.ymin < min_extent)
      continue;
    t.box.xmin = std::clamp(t.box.xmin, 0.0, static_cast<double>(canvas.cols));
    t.box.xmax = std::clamp(t.box.xmax, 0.0, static_cast<double>(canvas.cols));
    t.box.ymin = std::clamp(t.box.ymin, 0.0, static_cast<double>(canvas.rows));
    t.box.ymax = std::clamp(t.box.ymax, 0.0, static_cast<double>(canvas.rows));
    if (o.keypoints)
      t.keypoints = KeypointPair{
          o.keypoints->left_x * p.scale + fx, o.keypoints->left_y * p.scale + fy,
          o.keypoints->right_x * p.scale + fx,
          o.keypoints->right_y * p.scale + fy};
    t.angle = o.angle;  // similarity transform: angles survive
    objects.push_back(std::move(t));
  }
}

}  // namespace

Sample tile_samples(const std::vector<Sample>& parts, int grid) {
  const Sample& first = parts.at(0);
  Sample out;
  out.origin = first.origin;
  out.image = cv::Mat(first.image.rows, first.image.cols, first.image.type(),
                      cv::Scalar::all(0.5));
  const int cw = first.image.cols / grid;
  const int ch = first.image.rows / grid;
  for (int c = 0; c < grid * grid; ++c) {
    const Sample& part = parts.at(c);
    place(part, out.image, (c % grid) * cw, (c / grid) * ch, cw, ch,
          out.objects, 2.0);
  }
  return out;
}

Sample letterbox_sample(const Sample& s, int size) {
  Sample out;
  out.origin = s.origin;
  out.image =
      cv::Mat(size, size, s.image.type(), cv::Scalar::all(0.5));
  place(s, out.image, 0, 0, size, size, out.objects, 0.0);
  return out;
}

Sample augment(const Sample& s, const AugmentConfig& cfg, std::mt19937_64& rng,
               const SamplePool* pool) {
  Sample cur = s;
  if (uniform01(rng) < cfg.p_rot90) cur = rot90_sample(cur);
  if (uniform01(rng) < cfg.p_hflip) cur = hflip_sample(cur);
  if (uniform01(rng) < cfg.p_vflip) cur = vflip_sample(cur);
  for (const int grid : {2, 3}) {
    const double p = grid == 2 ? cfg.p_tile2x2 : cfg.p_tile3x3;
    const bool fire = uniform01(rng) < p;
    if (!fire || pool == nullptr || pool->size() == 0) continue;
    std::vector<Sample> parts{cur};
    for (int j = 1; j < grid * grid; ++j)
      parts.push_back(pool->get(rng() % pool->size()));
    cur = tile_samples(parts, grid);
  }
  return cur;
}

Sample augment(const Sample& s, const AugmentConfig& cfg, std::uint64_t seed,
               const SamplePool* pool) {
  std::mt19937_64 rng(seed);
  return augment(s, cfg, rng, pool);
}

DualBatchIterator::DualBatchIterator(const SamplePool* ds1,
                                     const SamplePool* ds2, int batch1,
                                     int batch2, const AugmentConfig& aug1,
                                     const AugmentConfig& aug2, int input_size,
                                     std::uint64_t seed)
    : ds1_(ds1), ds2_(ds2), batch1_(batch1), batch2_(batch2),
      input_size_(input_size), aug1_(aug1), aug2_(aug2), rng_(seed) {
  if (batch1_ > 0 && (ds1_ == nullptr || ds1_->size() == 0))
    throw EmptyDataset("dataset 1 is empty");
  if (batch2_ > 0 && (ds2_ == nullptr || ds2_->size() == 0))
    throw EmptyDataset("dataset 2 is empty");
  if (ds1_ != nullptr) {
    order1_.resize(ds1_->size());
    std::iota(order1_.begin(), order1_.end(), 0);
    std::shuffle(order1_.begin(), order1_.end(), rng_);
  }
  if (ds2_ != nullptr) {
    order2_.resize(ds2_->size());
    std::iota(order2_.begin(), order2_.end(), 0);
    std::shuffle(order2_.begin(), order2_.end(), rng_);
  }
}

Sample DualBatchIterator::draw(const SamplePool& pool,
                               const AugmentConfig& aug,
                               std::vector<std::size_t>& order,
                               std::size_t& cursor) {
  if (cursor >= order.size()) {
    std::shuffle(order.begin(), order.end(), rng_);
    cursor = 0;
  }
  const Sample& raw = pool.get(order[cursor++]);
  return letterbox_sample(augment(raw, aug, rng_, &pool), input_size_);
}

std::vector<Sample> DualBatchIterator::next() {
  std::vector<Sample> batch;
  batch.reserve(static_cast<std::size_t>(batch1_) + batch2_);
  for (int i = 0; i < batch1_; ++i)
    batch.push_back(draw(*ds1_, aug1_, order1_, cursor1_));
  for (int i = 0; i < batch2_; ++i)
    batch.push_back(draw(*ds2_, aug2_, order2_, cursor2_));
  return batch;
}

Tensor<float> batch_to_tensor(const std::vector<Sample>& batch) {
  const int n = static_cast<int>(batch.size());
  const int c = batch.at(0).image.channels();
  const int h = batch[0].image.rows;
  const int w = batch[0].image.cols;
  Tensor<float> t(n, c, h, w);
  std::vector<cv::Mat> planes;
  for (int in = 0; in < n; ++in) {
    const cv::Mat& img = batch[in].image;
    planes.clear();
    cv::split(img, planes);
    for (int ic = 0; ic < c; ++ic)
      for (int y = 0; y < h; ++y) {
        const float* row = planes[ic].ptr<float>(y);
        std::copy(row, row + w, &t.at(in, ic, y, 0));
      }
  }
  return t;
}

}  // namespace ladr
