#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcp/dataset.hpp"
#include "hcp/image.hpp"
#include "hcp/rng.hpp"

namespace hcp {

// Two disjoint shape vocabularies: classification categories, and a separate
// bank used only to train the objectness scorer so it never sees the shapes
// it is later asked to propose.
enum class ShapeBank { classification, objectness };

int bank_size(ShapeBank bank);
std::vector<std::string> bank_category_names(ShapeBank bank, int count);

struct SyntheticSpec {
  int image_size = 128;
  int categories = 10;
  ShapeBank bank = ShapeBank::classification;
  int min_objects = 1;
  int max_objects = 4;
  int min_size = 20;   // object box side, pixels
  int max_size = 44;
  double occlusion_prob = 0.15;  // chance a new object may overlap others
  uint64_t seed = 1;
};

// Writes count PPM images under out_dir/images-<split>/ and returns a
// manifest with relative image paths, 0/1 labels, and per-object boxes.
// single_label mode places one centered object filling 60-85% of the frame
// (the pre-training regime); otherwise 1-4 distinct categories are scattered.
// Purely a function of (spec, split, count, single_label).
Manifest gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir,
                       const std::string& split, int count, bool single_label);

// Rasterizes one object for tests and fixtures.
void draw_object(ImageU8& img, ShapeBank bank, int category, const Box& at,
                 Rng& rng);

}  // namespace hcp
