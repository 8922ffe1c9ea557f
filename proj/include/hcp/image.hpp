#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcp/boxes.hpp"
#include "hcp/errors.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

// 8-bit RGB image, interleaved, row-major.
struct ImageU8 {
  int w = 0;
  int h = 0;
  std::vector<uint8_t> data;

  ImageU8() = default;
  ImageU8(int width, int height)
      : w(width), h(height), data(size_t(width) * height * 3, 0) {
    if (width < 1 || height < 1) throw ShapeError("image: bad size");
  }

  uint8_t& at(int y, int x, int c) {
    return data[(size_t(y) * w + x) * 3 + size_t(c)];
  }
  uint8_t at(int y, int x, int c) const {
    return data[(size_t(y) * w + x) * 3 + size_t(c)];
  }
};

// Binary PPM (P6, maxval 255).
ImageU8 read_ppm(const std::string& path);
void write_ppm(const std::string& path, const ImageU8& img);

// Bilinear resample of a source rectangle to out_w x out_h (half-pixel
// centers, clamped at the rectangle edge). resize() maps the whole image.
ImageU8 resize_region(const ImageU8& img, const Box& region, int out_w,
                      int out_h);
ImageU8 resize(const ImageU8& img, int out_w, int out_h);

ImageU8 hflip(const ImageU8& img);
ImageU8 crop(const ImageU8& img, const Box& region);

// [3,H,W] tensor scaled to [0,1].
Tensor to_tensor(const ImageU8& img);

// Channel-mean grayscale as [H,W] doubles in [0,255].
Tensor grayscale(const ImageU8& img);

}  // namespace hcp
