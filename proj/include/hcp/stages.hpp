#pragma once

#include <cstdint>
#include <vector>

#include "hcp/dataset.hpp"
#include "hcp/fusion.hpp"
#include "hcp/hselect.hpp"
#include "hcp/image.hpp"
#include "hcp/losses.hpp"
#include "hcp/network.hpp"
#include "hcp/objectness.hpp"
#include "hcp/optimizer.hpp"

namespace hcp {

// Lazily loads and pins manifest images; training passes revisit each image
// every epoch so decode-once matters.
class ImageCache {
 public:
  explicit ImageCache(const Manifest& m)
      : manifest_(&m), slots_(m.records.size()), loaded_(m.records.size(), 0) {}
  const ImageU8& get(size_t i);

 private:
  const Manifest* manifest_;
  std::vector<ImageU8> slots_;
  std::vector<uint8_t> loaded_;
};

struct TrainOpts {
  std::vector<double> group_lrs;
  int epochs = 0;
  int batch = 32;
  uint64_t seed = 1;
  bool augment = true;
  int resize_for_crop = 72;  // pre-crop size in the pre-training stage
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int decay_epochs = 20;
  double decay_factor = 0.1;
};

struct HftOpts {
  TrainOpts train;
  int proposals_n = 200;
  HSConfig hs;  // k here is the training k
};

struct TrainLog {
  std::vector<double> epoch_loss;  // mean per-image loss
  int skipped_images = 0;          // images that yielded zero hypotheses
};

struct StageResult {
  Network net;
  TrainLog log;
};

// [0,1]-scaled tensor minus per-channel means.
Tensor input_from_image(const ImageU8& img, const std::vector<double>& means);

// Per-channel means over all pixels of all images, on the [0,1] scale.
std::vector<double> channel_means(const Manifest& data, ImageCache& cache);

std::vector<size_t> shuffled_indices(size_t n, Rng& rng);

// Single-label pre-training: random crop + reflection augmentation, softmax
// with the logistic loss.
StageResult run_pretrain(const Manifest& data, int input_side,
                         const TrainOpts& opts);

// Image-fine-tuning: swaps in a fresh classifier layer, trains the squared
// loss against normalized label vectors on whole resized images.
StageResult run_ift(const Network& pretrained, Stage tag, const Manifest& data,
                    const TrainOpts& opts);

// Hypotheses-fine-tuning: per image, hypothesis crops are run through the
// shared network, their pre-softmax activations fused by componentwise max,
// and the squared-loss gradient routed per class to the winning hypothesis.
StageResult run_hft(const Network& ifted, Stage tag, const Manifest& data,
                    const ObjectnessModel& objn, const HftOpts& opts);

enum class FuseMode { post_softmax, pre_softmax };

// Hypothesis-pooled prediction; falls back to the whole image when selection
// yields nothing.
Tensor predict_hypotheses(const Network& net, const ImageU8& image,
                          const ObjectnessModel& objn, int proposals_n,
                          const HSConfig& hs,
                          FuseMode mode = FuseMode::post_softmax);

// Whole-image forward (the image-fine-tuned baseline predictor).
Tensor predict_whole(const Network& net, const ImageU8& image);

}  // namespace hcp
