#include "ladr/synth.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "ladr/boxes.hpp"
#include "ladr/dataset.hpp"
#include "ladr/errors.hpp"

namespace ladr {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kSuper = 4;  // supersampling factor

// Glyph geometry in unit-disc coordinates, upright (y grows downward, eyes
// above center). The right eye is larger and the nose points down, so no
// rotation or mirror maps the glyph onto itself.
constexpr double kEyeY = -0.30;
constexpr double kEyeX = 0.38;
constexpr double kLeftEyeR = 0.11;
constexpr double kRightEyeR = 0.17;

struct Vec2 {
  double x, y;
};

Vec2 rotate_point(double u, double v, double alpha) {
  const double c = std::cos(alpha), s = std::sin(alpha);
  return {c * u + s * v, -s * u + c * v};
}

// Draws onto a canvas whose coordinates are already scaled by `sf`. Centers
// are pixel-center coordinates (integer x names the center of column x), the
// same frame cv::warpAffine uses, so a downstream rotation about the box
// center lands exactly on the glyph center. Drawing uses 8 fractional bits
// for sub-pixel placement.
void draw_glyph(cv::Mat& canvas, int sf, double cx, double cy, double r,
                double alpha, const GlyphStyle& style) {
  constexpr int kShift = 8;
  constexpr double kFix = 1 << kShift;
  const auto pt = [&](double u, double v) {
    const Vec2 q = rotate_point(u, v, alpha);
    const double half = (sf - 1) * 0.5;
    return cv::Point(
        static_cast<int>(std::lround((sf * (cx + r * q.x) + half) * kFix)),
        static_cast<int>(std::lround((sf * (cy + r * q.y) + half) * kFix)));
  };
  const auto rad = [&](double fraction) {
    return static_cast<int>(std::lround(sf * r * fraction * kFix));
  };
  cv::circle(canvas, pt(0, 0), rad(1.0), cv::Scalar(style.head), cv::FILLED,
             cv::LINE_8, kShift);
  cv::circle(canvas, pt(-kEyeX, kEyeY), rad(kLeftEyeR),
             cv::Scalar(style.features), cv::FILLED, cv::LINE_8, kShift);
  cv::circle(canvas, pt(kEyeX, kEyeY), rad(kRightEyeR),
             cv::Scalar(style.features), cv::FILLED, cv::LINE_8, kShift);
  const cv::Point nose[3] = {pt(0.0, 0.50), pt(-0.16, 0.10), pt(0.16, 0.10)};
  cv::fillConvexPoly(canvas, nose, 3, cv::Scalar(style.features), cv::LINE_8,
                     kShift);
}

GroundTruthObject glyph_truth(double cx, double cy, double r, double alpha,
                              RotationAngle theta) {
  GroundTruthObject gt;
  gt.box = {cx - r, cy - r, cx + r, cy + r};
  const Vec2 l = rotate_point(-kEyeX, kEyeY, alpha);
  const Vec2 rr = rotate_point(kEyeX, kEyeY, alpha);
  gt.keypoints = KeypointPair{cx + r * l.x, cy + r * l.y, cx + r * rr.x,
                              cy + r * rr.y};
  gt.angle = theta;
  return gt;
}

}  // namespace

GroundTruthObject render_face(cv::Mat& img, double cx, double cy,
                              double radius_px, RotationAngle theta,
                              const GlyphStyle& style) {
  const double alpha = theta.value() * kPi;
  cv::Mat big;
  cv::resize(img, big, cv::Size(img.cols * kSuper, img.rows * kSuper), 0, 0,
             cv::INTER_LINEAR);
  draw_glyph(big, kSuper, cx, cy, radius_px, alpha, style);
  cv::resize(big, img, img.size(), 0, 0, cv::INTER_AREA);
  return glyph_truth(cx, cy, radius_px, alpha, theta);
}

std::string generate_synthetic(int count, int image_size, std::uint64_t seed,
                               const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "images", ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  std::mt19937_64 rng(seed);
  std::vector<ManifestEntry> entries;
  entries.reserve(count);

  for (int i = 0; i < count; ++i) {
    // Smooth blobby background: coarse noise upsampled to the supersampled
    // canvas, kept low-contrast so the glyphs dominate.
    cv::Mat coarse(12, 12, CV_32F);
    for (int y = 0; y < coarse.rows; ++y)
      for (int x = 0; x < coarse.cols; ++x)
        coarse.at<float>(y, x) =
            static_cast<float>(0.25 + 0.20 * uniform01(rng));
    cv::Mat canvas;
    cv::resize(coarse, canvas,
               cv::Size(image_size * kSuper, image_size * kSuper), 0, 0,
               cv::INTER_LINEAR);

    ManifestEntry entry;
    const int faces = 1 + static_cast<int>(rng() % 3);
    std::vector<BoxXYWH> placed;
    for (int f = 0; f < faces; ++f) {
      for (int attempt = 0; attempt < 40; ++attempt) {
        const double side = (0.2 + 0.3 * uniform01(rng)) * image_size;
        const double r = side / 2.0;
        if (2.0 * r + 2.0 >= image_size) continue;
        const double cx = r + 1.0 + uniform01(rng) * (image_size - 2.0 * (r + 1.0));
        const double cy = r + 1.0 + uniform01(rng) * (image_size - 2.0 * (r + 1.0));
        const BoxXYWH box{cx, cy, 2.0 * r, 2.0 * r};
        bool clash = false;
        for (const auto& other : placed)
          if (iou(box, other) >= 0.1) {
            clash = true;
            break;
          }
        if (clash) continue;

        const RotationAngle theta =
            RotationAngle(1.0 - 2.0 * uniform01(rng));
        GlyphStyle style;
        style.head = 0.75 + 0.15 * uniform01(rng);
        style.features = 0.05 + 0.12 * uniform01(rng);
        draw_glyph(canvas, kSuper, cx, cy, r, theta.value() * kPi, style);
        entry.objects.push_back(
            glyph_truth(cx, cy, r, theta.value() * kPi, theta));
        placed.push_back(box);
        break;
      }
    }

    cv::Mat small_img, img8;
    cv::resize(canvas, small_img, cv::Size(image_size, image_size), 0, 0,
               cv::INTER_AREA);
    small_img.convertTo(img8, CV_8U, 255.0);
    char name[32];
    std::snprintf(name, sizeof(name), "images/img_%05d.png", i);
    entry.image = name;
    if (!cv::imwrite((fs::path(out_dir) / name).string(), img8))
      throw IoError("cannot write " + std::string(name));
    entries.push_back(std::move(entry));
  }

  const std::string manifest = (fs::path(out_dir) / "manifest.jsonl").string();
  save_manifest(manifest, entries);
  return manifest;
}

}  // namespace ladr
