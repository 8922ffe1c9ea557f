#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hcp/boxes.hpp"
#include "hcp/image.hpp"
#include "hcp/rng.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

// Linear scorer over 8x8 resampled normed-gradient windows, with a per-size
// affine calibration so scores are comparable across window shapes.
struct ObjectnessModel {
  Tensor weights{std::vector<int>{8, 8}};
  double bias = 0.0;
  struct SizeCal {
    int w = 0, h = 0;
    double scale = 1.0, offset = 0.0;
  };
  std::vector<SizeCal> calibration;

  std::pair<double, double> calibration_for(int w, int h) const;  // scale, offset
};

struct ObjectnessTrainConfig {
  int epochs = 10;
  double lr = 0.05;
  double l2 = 1e-4;
  int negatives_per_positive = 3;
  uint64_t seed = 7;
};

// Gradient-magnitude map min(|dx| + |dy|, cap) of the channel-mean grayscale;
// forward differences, zero on the far edges. Inputs are expected in 8-bit
// range, matching the default cap of 255.
Tensor normed_gradient_map(const Tensor& image, double cap = 255.0);

// Power-of-two window extents from 16 up to the image size, both axes.
std::vector<std::pair<int, int>> quantized_sizes(int image_w, int image_h);

// Bilinear resample of a [H,W] map region to side x side.
Tensor resample_window(const Tensor& map, const Box& box, int side = 8);

// Every window of every size at stride size/4, scored and sorted.
std::vector<ScoredProposal> score_windows(
    const Tensor& image, const ObjectnessModel& model,
    const std::vector<std::pair<int, int>>& sizes, double cap = 255.0);

std::vector<ScoredProposal> nms(const std::vector<ScoredProposal>& proposals,
                                double iou_threshold);

struct AnnotatedImage {
  ImageU8 image;
  std::vector<Box> boxes;
};

ObjectnessModel train_objectness(const std::vector<AnnotatedImage>& data,
                                 const ObjectnessTrainConfig& cfg);

// score -> nms(0.8) -> top n.
std::vector<ScoredProposal> generate_proposals(const ImageU8& image,
                                               const ObjectnessModel& model,
                                               int n,
                                               double nms_threshold = 0.8);

// Fraction of ground-truth boxes covered by at least one proposal at IoU >=
// threshold, over all images.
double recall_evaluation(
    const std::vector<std::vector<ScoredProposal>>& proposals,
    const std::vector<std::vector<Box>>& ground_truth,
    double iou_threshold = 0.5);

void save_objectness(const std::string& path, const ObjectnessModel& model);
ObjectnessModel load_objectness(const std::string& path);

}  // namespace hcp
