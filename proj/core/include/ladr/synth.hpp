#pragma once

#include <cstdint>
#include <string>

#include <opencv2/core.hpp>

#include "ladr/ground_truth.hpp"

namespace ladr {

struct GlyphStyle {
  double head = 0.85;      // fill intensity of the head disc
  double features = 0.10;  // eyes and nose
};

// Draws the canonical face glyph — a filled disc with two unequal eye dots
// and a nose wedge, giving it unambiguous chirality — onto a CV_32FC1 canvas
// in [0,1], rotated by theta about (cx, cy). radius_px is the disc radius,
// so the ground-truth box (the rotated glyph's axis-aligned extent) is the
// disc's square and does not depend on theta. Keypoints are the exact eye
// centers after rotation. Rendering supersamples 4x for smooth edges.
GroundTruthObject render_face(cv::Mat& img, double cx, double cy,
                              double radius_px, RotationAngle theta,
                              const GlyphStyle& style = {});

// Writes `count` synthetic images (PNG, 8-bit grayscale, image_size square)
// under out_dir/images plus out_dir/manifest.jsonl, and returns the manifest
// path. Each image holds 1-3 faces at box sides in [0.2, 0.5]*image_size,
// angles uniform over the full turn, pairwise box IoU < 0.1, over a blurred
// noise background. Deterministic in the seed.
std::string generate_synthetic(int count, int image_size, std::uint64_t seed,
                               const std::string& out_dir);

}  // namespace ladr
