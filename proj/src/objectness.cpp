#include "hcp/objectness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include "json.hpp"

namespace hcp {

using nlohmann::json;

std::pair<double, double> ObjectnessModel::calibration_for(int w,
                                                           int h) const {
  for (const SizeCal& c : calibration)
    if (c.w == w && c.h == h) return {c.scale, c.offset};
  return {1.0, 0.0};
}

Tensor normed_gradient_map(const Tensor& image, double cap) {
  if (image.ndim() != 3) throw ShapeError("ng map: input must be [C,H,W]");
  const int C = image.dim(0), H = image.dim(1), W = image.dim(2);
  if (H < 2 || W < 2) throw ShapeError("ng map: image too small");

  Tensor gray({H, W});
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) gray.at(y, x) += image.at(c, y, x);
  for (double& v : gray.data) v /= C;

  Tensor ng({H, W});
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      double gx = x + 1 < W ? std::fabs(gray.at(y, x + 1) - gray.at(y, x)) : 0.0;
      double gy = y + 1 < H ? std::fabs(gray.at(y + 1, x) - gray.at(y, x)) : 0.0;
      ng.at(y, x) = std::min(gx + gy, cap);
    }
  return ng;
}

std::vector<std::pair<int, int>> quantized_sizes(int image_w, int image_h) {
  std::vector<int> ws, hs;
  for (int s = 16; s <= image_w; s *= 2) ws.push_back(s);
  for (int s = 16; s <= image_h; s *= 2) hs.push_back(s);
  if (ws.empty() || hs.empty())
    throw ShapeError("quantized sizes: image smaller than 16 pixels");
  std::vector<std::pair<int, int>> out;
  for (int w : ws)
    for (int h : hs) out.emplace_back(w, h);
  return out;
}

Tensor resample_window(const Tensor& map, const Box& box, int side) {
  if (map.ndim() != 2) throw ShapeError("resample: map must be [H,W]");
  if (box.w < 1 || box.h < 1 || box.x0 < 0 || box.y0 < 0 ||
      box.x0 + box.w > map.dim(1) || box.y0 + box.h > map.dim(0))
    throw ShapeError("resample: window outside map");
  Tensor out({side, side});
  const double sx = double(box.w) / side;
  const double sy = double(box.h) / side;
  for (int y = 0; y < side; ++y) {
    double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(box.h - 1));
    int y0 = int(fy);
    int y1 = std::min(y0 + 1, box.h - 1);
    double wy = fy - y0;
    for (int x = 0; x < side; ++x) {
      double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(box.w - 1));
      int x0 = int(fx);
      int x1 = std::min(x0 + 1, box.w - 1);
      double wx = fx - x0;
      double v00 = map.at(box.y0 + y0, box.x0 + x0);
      double v01 = map.at(box.y0 + y0, box.x0 + x1);
      double v10 = map.at(box.y0 + y1, box.x0 + x0);
      double v11 = map.at(box.y0 + y1, box.x0 + x1);
      out.at(y, x) = (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                     wy * ((1 - wx) * v10 + wx * v11);
    }
  }
  return out;
}

namespace {

double raw_score(const Tensor& feature, const ObjectnessModel& model) {
  double s = model.bias;
  for (size_t i = 0; i < feature.data.size(); ++i)
    s += feature.data[i] * model.weights.data[i];
  return s;
}

Tensor window_feature(const Tensor& ng, const Box& box, double cap) {
  Tensor f = resample_window(ng, box, 8);
  for (double& v : f.data) v /= cap;
  return f;
}

void each_window(int image_w, int image_h,
                 const std::vector<std::pair<int, int>>& sizes,
                 const std::function<void(const Box&)>& fn) {
  for (auto [w, h] : sizes) {
    if (w > image_w || h > image_h) continue;
    int sx = std::max(1, w / 4);
    int sy = std::max(1, h / 4);
    for (int y = 0; y + h <= image_h; y += sy)
      for (int x = 0; x + w <= image_w; x += sx) fn(Box{x, y, w, h});
  }
}

Tensor tensor255(const ImageU8& img) {
  Tensor t({3, img.h, img.w});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < img.h; ++y)
      for (int x = 0; x < img.w; ++x) t.at(c, y, x) = img.at(y, x, c);
  return t;
}

}  // namespace

std::vector<ScoredProposal> score_windows(
    const Tensor& image, const ObjectnessModel& model,
    const std::vector<std::pair<int, int>>& sizes, double cap) {
  if (sizes.empty()) throw ConfigError("score_windows: empty size set");
  Tensor ng = normed_gradient_map(image, cap);
  const int H = ng.dim(0), W = ng.dim(1);
  std::vector<ScoredProposal> out;
  each_window(W, H, sizes, [&](const Box& b) {
    Tensor f = window_feature(ng, b, cap);
    auto [scale, offset] = model.calibration_for(b.w, b.h);
    out.push_back({b, scale * raw_score(f, model) + offset});
  });
  sort_proposals(out);
  return out;
}

std::vector<ScoredProposal> nms(const std::vector<ScoredProposal>& proposals,
                                double iou_threshold) {
  if (iou_threshold <= 0.0 || iou_threshold > 1.0)
    throw ConfigError("nms: threshold must be in (0,1]");
  std::vector<int> kept = nms_keep(proposals, iou_threshold);
  std::vector<ScoredProposal> out;
  out.reserve(kept.size());
  for (int i : kept) out.push_back(proposals[size_t(i)]);
  return out;
}

ObjectnessModel train_objectness(const std::vector<AnnotatedImage>& data,
                                 const ObjectnessTrainConfig& cfg) {
  struct Sample {
    Tensor feature;
    double target;  // +1 / -1
    int w, h;
  };
  std::vector<Sample> samples;
  Rng rng(cfg.seed);

  size_t npos = 0, nneg = 0;
  for (const AnnotatedImage& ai : data) {
    Tensor ng = normed_gradient_map(tensor255(ai.image));
    auto sizes = quantized_sizes(ai.image.w, ai.image.h);

    std::vector<Box> positives;
    std::vector<Box> negatives;
    each_window(ai.image.w, ai.image.h, sizes, [&](const Box& b) {
      double best = 0.0;
      for (const Box& gt : ai.boxes) best = std::max(best, iou(b, gt));
      if (best >= 0.5)
        positives.push_back(b);
      else if (best < 0.3)
        negatives.push_back(b);
    });
    if (positives.empty()) continue;
    if (negatives.empty()) throw DataError("objectness: no negative windows");

    size_t want_neg = positives.size() * size_t(cfg.negatives_per_positive);
    // Partial Fisher-Yates over the negative pool.
    for (size_t k = 0; k < want_neg && k < negatives.size(); ++k) {
      size_t j = size_t(rng.uniform_int(int(k), int(negatives.size()) - 1));
      std::swap(negatives[k], negatives[j]);
    }
    negatives.resize(std::min(want_neg, negatives.size()));

    for (const Box& b : positives)
      samples.push_back({window_feature(ng, b, 255.0), 1.0, b.w, b.h});
    for (const Box& b : negatives)
      samples.push_back({window_feature(ng, b, 255.0), -1.0, b.w, b.h});
    npos += positives.size();
    nneg += negatives.size();
  }
  if (npos == 0) throw DataError("objectness: no positive windows extractable");
  if (nneg == 0) throw DataError("objectness: no negative windows sampled");

  ObjectnessModel model;
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t k = 0; k + 1 < order.size(); ++k) {
      size_t j = size_t(rng.uniform_int(int(k), int(order.size()) - 1));
      std::swap(order[k], order[j]);
    }
    for (size_t idx : order) {
      const Sample& s = samples[idx];
      double margin = s.target * raw_score(s.feature, model);
      for (double& wv : model.weights.data) wv *= (1.0 - cfg.lr * cfg.l2);
      if (margin < 1.0) {
        for (size_t i = 0; i < s.feature.data.size(); ++i)
          model.weights.data[i] += cfg.lr * s.target * s.feature.data[i];
        model.bias += cfg.lr * s.target;
      }
    }
  }

  // Per-size affine calibration: least squares from raw scores to the +-1
  // targets, identity when a size has no labeled windows or zero variance.
  std::vector<std::pair<int, int>> all_sizes;
  int max_side = 0;
  for (const AnnotatedImage& ai : data)
    max_side = std::max({max_side, ai.image.w, ai.image.h});
  all_sizes = quantized_sizes(max_side, max_side);
  for (auto [w, h] : all_sizes) {
    double ss = 0, st = 0, sss = 0, sst = 0;
    int n = 0;
    for (const Sample& smp : samples) {
      if (smp.w != w || smp.h != h) continue;
      double raw = raw_score(smp.feature, model);
      ss += raw;
      st += smp.target;
      sss += raw * raw;
      sst += raw * smp.target;
      ++n;
    }
    ObjectnessModel::SizeCal cal{w, h, 1.0, 0.0};
    if (n > 0) {
      double mean_s = ss / n, mean_t = st / n;
      double var = sss / n - mean_s * mean_s;
      if (var > 1e-12) {
        cal.scale = (sst / n - mean_s * mean_t) / var;
        cal.offset = mean_t - cal.scale * mean_s;
      } else {
        cal.scale = 1.0;
        cal.offset = mean_t - mean_s;
      }
    }
    model.calibration.push_back(cal);
  }
  return model;
}

std::vector<ScoredProposal> generate_proposals(const ImageU8& image,
                                               const ObjectnessModel& model,
                                               int n, double nms_threshold) {
  if (n < 1) throw ConfigError("proposals: n must be positive");
  auto scored = score_windows(tensor255(image), model,
                              quantized_sizes(image.w, image.h));
  std::vector<int> kept = nms_keep(scored, nms_threshold, n);
  std::vector<ScoredProposal> out;
  out.reserve(kept.size());
  for (int i : kept) out.push_back(scored[size_t(i)]);
  return out;
}

double recall_evaluation(
    const std::vector<std::vector<ScoredProposal>>& proposals,
    const std::vector<std::vector<Box>>& ground_truth, double iou_threshold) {
  if (proposals.size() != ground_truth.size())
    throw ShapeError("recall: proposals/ground truth count mismatch");
  long long total = 0, covered = 0;
  for (size_t i = 0; i < ground_truth.size(); ++i) {
    for (const Box& gt : ground_truth[i]) {
      ++total;
      for (const ScoredProposal& p : proposals[i])
        if (iou(p.box, gt) >= iou_threshold) {
          ++covered;
          break;
        }
    }
  }
  if (total == 0) throw DataError("recall: no ground-truth boxes");
  return double(covered) / double(total);
}

void save_objectness(const std::string& path, const ObjectnessModel& model) {
  json j;
  j["weights"] = model.weights.data;
  j["bias"] = model.bias;
  json cal = json::array();
  for (const auto& c : model.calibration) {
    json e;
    e["w"] = c.w;
    e["h"] = c.h;
    e["scale"] = c.scale;
    e["offset"] = c.offset;
    cal.push_back(e);
  }
  j["calibration"] = cal;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open objectness model for writing: " + path);
  os << j.dump(2) << "\n";
  if (!os) throw IoError("objectness model write failed: " + path);
}

ObjectnessModel load_objectness(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open objectness model: " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw IoError("objectness model is not valid json: " + std::string(e.what()));
  }
  ObjectnessModel model;
  auto wv = j.at("weights").get<std::vector<double>>();
  if (wv.size() != 64) throw IoError("objectness model: bad weight count");
  model.weights = Tensor({8, 8}, wv);
  model.bias = j.at("bias").get<double>();
  for (const auto& e : j.at("calibration")) {
    ObjectnessModel::SizeCal c;
    c.w = e.at("w").get<int>();
    c.h = e.at("h").get<int>();
    c.scale = e.at("scale").get<double>();
    c.offset = e.at("offset").get<double>();
    model.calibration.push_back(c);
  }
  return model;
}

}  // namespace hcp
