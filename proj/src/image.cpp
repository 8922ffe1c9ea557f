#include "hcp/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace hcp {

namespace {

// Next whitespace-separated token, skipping '#' comments.
std::string next_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(char(c));
  }
  return tok;
}

int parse_dim(const std::string& tok, const char* what) {
  if (tok.empty()) throw IoError(std::string("ppm: missing ") + what);
  int v = 0;
  for (char ch : tok) {
    if (ch < '0' || ch > '9') throw IoError(std::string("ppm: bad ") + what);
    v = v * 10 + (ch - '0');
    if (v > 1 << 20) throw IoError(std::string("ppm: implausible ") + what);
  }
  return v;
}

}  // namespace

ImageU8 read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open image: " + path);
  if (next_token(is) != "P6") throw IoError("not a P6 ppm: " + path);
  int w = parse_dim(next_token(is), "width");
  int h = parse_dim(next_token(is), "height");
  int maxval = parse_dim(next_token(is), "maxval");
  if (w < 1 || h < 1) throw IoError("ppm: bad dimensions: " + path);
  if (maxval != 255) throw IoError("ppm: only maxval 255 supported: " + path);
  // Exactly one whitespace byte separates the header from the pixel data;
  // next_token already consumed it.
  ImageU8 img(w, h);
  is.read(reinterpret_cast<char*>(img.data.data()),
          std::streamsize(img.data.size()));
  if (size_t(is.gcount()) != img.data.size())
    throw IoError("ppm: truncated pixel data: " + path);
  return img;
}

void write_ppm(const std::string& path, const ImageU8& img) {
  if (img.w < 1 || img.h < 1) throw ShapeError("ppm: empty image");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open image for writing: " + path);
  os << "P6\n" << img.w << " " << img.h << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data.data()),
           std::streamsize(img.data.size()));
  if (!os) throw IoError("image write failed: " + path);
}

ImageU8 resize_region(const ImageU8& img, const Box& region, int out_w,
                      int out_h) {
  if (out_w < 1 || out_h < 1) throw ShapeError("resize: bad output size");
  if (region.w < 1 || region.h < 1) throw ShapeError("resize: empty region");
  if (region.x0 < 0 || region.y0 < 0 || region.x0 + region.w > img.w ||
      region.y0 + region.h > img.h)
    throw ShapeError("resize: region outside image");

  ImageU8 out(out_w, out_h);
  const double sx = double(region.w) / out_w;
  const double sy = double(region.h) / out_h;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, double(region.h - 1));
    int y0 = int(fy);
    int y1 = std::min(y0 + 1, region.h - 1);
    double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, double(region.w - 1));
      int x0 = int(fx);
      int x1 = std::min(x0 + 1, region.w - 1);
      double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        double v00 = img.at(region.y0 + y0, region.x0 + x0, c);
        double v01 = img.at(region.y0 + y0, region.x0 + x1, c);
        double v10 = img.at(region.y0 + y1, region.x0 + x0, c);
        double v11 = img.at(region.y0 + y1, region.x0 + x1, c);
        double v = (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                   wy * ((1 - wx) * v10 + wx * v11);
        out.at(y, x, c) = uint8_t(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

ImageU8 resize(const ImageU8& img, int out_w, int out_h) {
  return resize_region(img, Box{0, 0, img.w, img.h}, out_w, out_h);
}

ImageU8 hflip(const ImageU8& img) {
  ImageU8 out(img.w, img.h);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, img.w - 1 - x, c);
  return out;
}

ImageU8 crop(const ImageU8& img, const Box& region) {
  if (region.w < 1 || region.h < 1) throw ShapeError("crop: empty region");
  if (region.x0 < 0 || region.y0 < 0 || region.x0 + region.w > img.w ||
      region.y0 + region.h > img.h)
    throw ShapeError("crop: region outside image");
  ImageU8 out(region.w, region.h);
  for (int y = 0; y < region.h; ++y)
    for (int x = 0; x < region.w; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(y, x, c) = img.at(region.y0 + y, region.x0 + x, c);
  return out;
}

Tensor to_tensor(const ImageU8& img) {
  Tensor t({3, img.h, img.w});
  const double inv = 1.0 / 255.0;
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) t.at(c, y, x) = img.at(y, x, c) * inv;
  return t;
}

Tensor grayscale(const ImageU8& img) {
  Tensor g({img.h, img.w});
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      g.at(y, x) =
          (double(img.at(y, x, 0)) + img.at(y, x, 1) + img.at(y, x, 2)) / 3.0;
  return g;
}

}  // namespace hcp
