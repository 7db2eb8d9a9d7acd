#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "ladr/ground_truth.hpp"
#include "ladr/tensor.hpp"

namespace ladr {

// One manifest record: image path (relative to the manifest) + annotations.
struct ManifestEntry {
  std::string image;
  std::vector<GroundTruthObject> objects;
};

// A decoded training sample. The image is CV_32F (1 or 3 channels) in [0,1].
struct Sample {
  cv::Mat image;
  std::vector<GroundTruthObject> objects;
  DatasetOrigin origin = DatasetOrigin::kDs1;
};

// JSON-lines manifest. Throws ParseError (with the line number) on malformed
// JSON or wrong field shapes, InvalidBox on empty/inverted boxes.
std::vector<ManifestEntry> load_manifest(const std::string& path);
void save_manifest(const std::string& path,
                   const std::vector<ManifestEntry>& entries);

// Loads and caches decoded samples for one manifest. Angles missing from a
// record are derived from its keypoints when present.
class SamplePool {
 public:
  SamplePool(const std::string& manifest_path, DatasetOrigin origin,
             int channels);

  std::size_t size() const { return entries_.size(); }
  const Sample& get(std::size_t index) const;
  const std::vector<ManifestEntry>& entries() const { return entries_; }

 private:
  std::string root_;
  std::vector<ManifestEntry> entries_;
  DatasetOrigin origin_;
  int channels_;
  mutable std::vector<std::optional<Sample>> cache_;
};

struct AugmentConfig {
  double p_rot90 = 0.0;
  double p_hflip = 0.0;
  double p_vflip = 0.0;
  double p_tile2x2 = 0.0;
  double p_tile3x3 = 0.0;
};

// Geometric transforms applied to image and annotations together. Boxes move
// in edge coordinates (x -> W-x), keypoints in pixel-center coordinates
// (x -> W-1-x); mirrors additionally swap the left/right eye identities.
Sample rot90_sample(const Sample& s);
Sample hflip_sample(const Sample& s);
Sample vflip_sample(const Sample& s);

// Mosaic: letterboxes grid*grid participants (parts[0] first, row-major)
// into equal cells of a canvas shaped like parts[0]. Angles are unchanged;
// objects shrunk below 2 px of extent are dropped.
Sample tile_samples(const std::vector<Sample>& parts, int grid);

// Aspect-preserving resize onto a size x size gray canvas, annotations
// transformed along.
Sample letterbox_sample(const Sample& s, int size);

// Applies the five operations in fixed order (rot90, hflip, vflip, 2x2 tile,
// 3x3 tile), each triggered independently by its probability. Tiling
// partners are drawn uniformly from `pool` (skipped when pool is null or
// empty).
Sample augment(const Sample& s, const AugmentConfig& cfg, std::mt19937_64& rng,
               const SamplePool* pool);
Sample augment(const Sample& s, const AugmentConfig& cfg, std::uint64_t seed,
               const SamplePool* pool);

// Interleaves the two streams: each call yields batch1 augmented + letterboxed
// samples from ds1 followed by batch2 from ds2. Each pool is reshuffled per
// epoch; the whole sequence is a function of the seed.
class DualBatchIterator {
 public:
  DualBatchIterator(const SamplePool* ds1, const SamplePool* ds2, int batch1,
                    int batch2, const AugmentConfig& aug1,
                    const AugmentConfig& aug2, int input_size,
                    std::uint64_t seed);

  std::vector<Sample> next();

 private:
  Sample draw(const SamplePool& pool, const AugmentConfig& aug,
              std::vector<std::size_t>& order, std::size_t& cursor);

  const SamplePool* ds1_;
  const SamplePool* ds2_;
  int batch1_, batch2_, input_size_;
  AugmentConfig aug1_, aug2_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order1_, order2_;
  std::size_t cursor1_ = 0, cursor2_ = 0;
};

// Stacks letterboxed samples into an NCHW float tensor.
Tensor<float> batch_to_tensor(const std::vector<Sample>& batch);

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ladr
