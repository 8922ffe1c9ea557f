#include "hcp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace hcp {

namespace {

struct Color {
  int r, g, b;
};

const char* kClassNames[10] = {"disk", "square",  "triangle", "ring", "cross",
                               "diamond", "frame", "star", "halfdisk", "ell"};
const char* kBankNames[6] = {"ellipse", "hexagon", "tee",
                             "cup",     "wedge",   "chevron"};

const Color kClassColors[10] = {
    {200, 60, 60},  {60, 180, 70},  {70, 90, 210},  {210, 200, 70},
    {190, 70, 190}, {70, 190, 190}, {220, 140, 60}, {130, 70, 200},
    {60, 140, 130}, {230, 150, 170}};
const Color kBankColors[6] = {{180, 180, 60}, {60, 60, 180},  {180, 60, 120},
                              {90, 200, 90},  {200, 90, 40},  {110, 110, 220}};

// Shape membership in box-normalized coordinates u, v in [-1, 1].
bool inside_class_shape(int cat, double u, double v) {
  double r2 = u * u + v * v;
  switch (cat) {
    case 0:  // disk
      return r2 <= 1.0;
    case 1:  // square (full box)
      return true;
    case 2:  // triangle, apex at the top edge
      return std::fabs(u) <= (v + 1.0) * 0.5;
    case 3:  // ring
      return r2 <= 1.0 && r2 >= 0.55 * 0.55;
    case 4:  // cross
      return std::fabs(u) <= 0.33 || std::fabs(v) <= 0.33;
    case 5:  // diamond
      return std::fabs(u) + std::fabs(v) <= 1.0;
    case 6:  // frame (hollow square)
      return std::max(std::fabs(u), std::fabs(v)) >= 0.55;
    case 7: {  // four-pointed star
      double r = std::sqrt(r2);
      double th = std::atan2(v, u);
      return r <= 0.3 + 0.7 * std::fabs(std::cos(2.0 * th));
    }
    case 8:  // half disk
      return r2 <= 1.0 && v >= 0.0;
    case 9:  // L
      return (v >= 0.4) || (u <= -0.4);
    default:
      return false;
  }
}

bool inside_bank_shape(int cat, double u, double v) {
  switch (cat) {
    case 0:  // ellipse
      return u * u + (v / 0.6) * (v / 0.6) <= 1.0;
    case 1:  // hexagon
      return std::fabs(v) <= 0.87 &&
             0.87 * std::fabs(u) + 0.5 * std::fabs(v) <= 0.87;
    case 2:  // T
      return v <= -0.4 || std::fabs(u) <= 0.3;
    case 3:  // U
      return u <= -0.4 || u >= 0.4 || v >= 0.4;
    case 4:  // wedge (lower-left half)
      return v >= u;
    case 5:  // chevron band
      return v >= std::fabs(u) - 0.7 && v <= std::fabs(u) - 0.1;
    default:
      return false;
  }
}

// Per-category two-tone texture pattern on absolute pixel coordinates.
bool texture_alt(int cat, int px, int py) {
  switch (cat % 6) {
    case 0:  // solid
      return false;
    case 1:  // horizontal stripes
      return (py / 4) % 2 == 1;
    case 2:  // vertical stripes
      return (px / 4) % 2 == 1;
    case 3:  // checker
      return ((px / 5) + (py / 5)) % 2 == 1;
    case 4: {  // dot lattice
      int dx = px % 7 - 3, dy = py % 7 - 3;
      return dx * dx + dy * dy <= 4;
    }
    default:  // diagonal stripes
      return ((px + py) / 4) % 2 == 1;
  }
}

uint8_t clamp_u8(int v) { return uint8_t(std::clamp(v, 0, 255)); }

}  // namespace

int bank_size(ShapeBank bank) {
  return bank == ShapeBank::classification ? 10 : 6;
}

std::vector<std::string> bank_category_names(ShapeBank bank, int count) {
  if (count < 1 || count > bank_size(bank))
    throw ConfigError("category count exceeds the shape bank");
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i)
    names.push_back(bank == ShapeBank::classification ? kClassNames[i]
                                                      : kBankNames[i]);
  return names;
}

void draw_object(ImageU8& img, ShapeBank bank, int category, const Box& at,
                 Rng& rng) {
  if (category < 0 || category >= bank_size(bank))
    throw ConfigError("category outside the shape bank");
  Color base = bank == ShapeBank::classification ? kClassColors[category]
                                                 : kBankColors[category];
  int jr = rng.uniform_int(-20, 20);
  int jg = rng.uniform_int(-20, 20);
  int jb = rng.uniform_int(-20, 20);
  Color main{base.r + jr, base.g + jg, base.b + jb};
  Color alt{int(main.r * 0.45), int(main.g * 0.45), int(main.b * 0.45)};

  for (int y = 0; y < at.h; ++y) {
    int py = at.y0 + y;
    if (py < 0 || py >= img.h) continue;
    double v = (2.0 * (y + 0.5) / at.h) - 1.0;
    for (int x = 0; x < at.w; ++x) {
      int px = at.x0 + x;
      if (px < 0 || px >= img.w) continue;
      double u = (2.0 * (x + 0.5) / at.w) - 1.0;
      bool inside = bank == ShapeBank::classification
                        ? inside_class_shape(category, u, v)
                        : inside_bank_shape(category, u, v);
      if (!inside) continue;
      const Color& c = texture_alt(category, px, py) ? alt : main;
      img.at(py, px, 0) = clamp_u8(c.r);
      img.at(py, px, 1) = clamp_u8(c.g);
      img.at(py, px, 2) = clamp_u8(c.b);
    }
  }
}

namespace {

ImageU8 make_background(int size, Rng& rng) {
  ImageU8 img(size, size);
  int base = rng.uniform_int(80, 150);
  double gx = rng.uniform(-30.0, 30.0);
  double gy = rng.uniform(-30.0, 30.0);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      double g = base + gx * x / size + gy * y / size;
      for (int c = 0; c < 3; ++c) {
        int noise = rng.uniform_int(-8, 8);
        img.at(y, x, c) = clamp_u8(int(std::lround(g)) + noise);
      }
    }
  return img;
}

bool overlaps_any(const Box& b, const std::vector<Box>& placed) {
  for (const Box& p : placed) {
    int ix = std::min(b.x0 + b.w, p.x0 + p.w) - std::max(b.x0, p.x0);
    int iy = std::min(b.y0 + b.h, p.y0 + p.h) - std::max(b.y0, p.y0);
    if (ix > 0 && iy > 0) return true;
  }
  return false;
}

}  // namespace

Manifest gen_synthetic(const SyntheticSpec& spec, const std::string& out_dir,
                       const std::string& split, int count,
                       bool single_label) {
  if (count < 1) throw ConfigError("synthetic split needs at least one image");
  if (spec.categories < 1 || spec.categories > bank_size(spec.bank))
    throw ConfigError("category count exceeds the shape bank");
  if (spec.min_objects < 1 || spec.max_objects < spec.min_objects)
    throw ConfigError("bad objects-per-image range");
  if (spec.min_size < 4 || spec.max_size < spec.min_size ||
      spec.max_size > spec.image_size - 4)
    throw ConfigError("bad object size range");

  std::string img_dir_rel = "images-" + split;
  std::filesystem::create_directories(out_dir + "/" + img_dir_rel);

  Manifest m;
  m.categories = bank_category_names(spec.bank, spec.categories);
  m.split = split;
  m.dir = out_dir;

  Rng root(spec.seed ^ hash_tag(split) ^ (single_label ? 0x5151ull : 0ull));
  for (int i = 0; i < count; ++i) {
    Rng rng = root.fork(uint64_t(i));
    ImageU8 img = make_background(spec.image_size, rng);

    ManifestRecord rec;
    rec.labels.assign(size_t(spec.categories), 0);

    std::vector<int> cats;
    if (single_label) {
      cats.push_back(rng.uniform_int(0, spec.categories - 1));
    } else {
      int nobj = rng.uniform_int(spec.min_objects,
                                 std::min(spec.max_objects, spec.categories));
      std::vector<int> all(size_t(spec.categories));
      for (int c = 0; c < spec.categories; ++c) all[size_t(c)] = c;
      for (int k = 0; k < nobj; ++k) {
        int j = rng.uniform_int(k, spec.categories - 1);
        std::swap(all[size_t(k)], all[size_t(j)]);
        cats.push_back(all[size_t(k)]);
      }
    }

    std::vector<Box> placed;
    for (int cat : cats) {
      Box b;
      if (single_label) {
        int side = int(std::lround(spec.image_size *
                                   rng.uniform(0.60, 0.85)));
        b.w = side;
        b.h = side;
        b.x0 = (spec.image_size - side) / 2 + rng.uniform_int(-3, 3);
        b.y0 = (spec.image_size - side) / 2 + rng.uniform_int(-3, 3);
        b.x0 = std::clamp(b.x0, 0, spec.image_size - side);
        b.y0 = std::clamp(b.y0, 0, spec.image_size - side);
      } else {
        bool allow_overlap = rng.bernoulli(spec.occlusion_prob);
        const int margin = 2;
        for (int attempt = 0; attempt < 40; ++attempt) {
          b.w = rng.uniform_int(spec.min_size, spec.max_size);
          b.h = rng.uniform_int(spec.min_size, spec.max_size);
          b.x0 = rng.uniform_int(margin, spec.image_size - b.w - margin);
          b.y0 = rng.uniform_int(margin, spec.image_size - b.h - margin);
          if (allow_overlap || !overlaps_any(b, placed)) break;
        }
      }
      placed.push_back(b);
      draw_object(img, spec.bank, cat, b, rng);
      rec.labels[size_t(cat)] = 1;
      rec.boxes.push_back({b, cat});
    }

    char name[64];
    std::snprintf(name, sizeof name, "img_%05d.ppm", i);
    rec.image = img_dir_rel + "/" + name;
    write_ppm(out_dir + "/" + rec.image, img);
    m.records.push_back(std::move(rec));
  }
  return m;
}

}  // namespace hcp
