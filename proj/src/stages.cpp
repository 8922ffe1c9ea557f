#include "hcp/stages.hpp"

#include <algorithm>
#include <cmath>

namespace hcp {

const ImageU8& ImageCache::get(size_t i) {
  if (!loaded_[i]) {
    slots_[i] = read_ppm(manifest_->image_path(i));
    loaded_[i] = 1;
  }
  return slots_[i];
}

Tensor input_from_image(const ImageU8& img, const std::vector<double>& means) {
  Tensor t = to_tensor(img);
  if (!means.empty()) {
    if (means.size() != 3) throw ShapeError("input: means must have 3 entries");
    for (int c = 0; c < 3; ++c) {
      double m = means[size_t(c)];
      double* p = &t.data[size_t(c) * img.h * img.w];
      for (long long i = 0; i < (long long)img.h * img.w; ++i) p[i] -= m;
    }
  }
  return t;
}

std::vector<double> channel_means(const Manifest& data, ImageCache& cache) {
  if (data.records.empty()) throw DataError("means: empty dataset");
  double acc[3] = {0, 0, 0};
  long long count = 0;
  for (size_t i = 0; i < data.records.size(); ++i) {
    const ImageU8& img = cache.get(i);
    for (size_t p = 0; p < img.data.size(); p += 3) {
      acc[0] += img.data[p];
      acc[1] += img.data[p + 1];
      acc[2] += img.data[p + 2];
    }
    count += (long long)img.w * img.h;
  }
  return {acc[0] / (255.0 * count), acc[1] / (255.0 * count),
          acc[2] / (255.0 * count)};
}

std::vector<size_t> shuffled_indices(size_t n, Rng& rng) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  for (size_t i = 0; i + 1 < n; ++i) {
    size_t j = size_t(rng.uniform_int(int(i), int(n) - 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

namespace {

void scale_grads(std::vector<Parameter*>& params, double factor) {
  for (Parameter* p : params)
    for (double& g : p->grad.data) g *= factor;
}

ScheduleSpec schedule_of(const TrainOpts& opts) {
  ScheduleSpec s;
  s.group_lrs = opts.group_lrs;
  s.decay_epochs = opts.decay_epochs;
  s.decay_factor = opts.decay_factor;
  s.momentum = opts.momentum;
  s.weight_decay = opts.weight_decay;
  return s;
}

void check_opts(const TrainOpts& opts) {
  if (opts.group_lrs.empty()) throw ConfigError("stage: no learning rates");
  if (opts.epochs < 0) throw ConfigError("stage: negative epoch count");
  if (opts.batch < 1) throw ConfigError("stage: batch must be positive");
}

int single_label_of(const ManifestRecord& rec) {
  int label = -1;
  for (size_t c = 0; c < rec.labels.size(); ++c)
    if (rec.labels[c]) {
      if (label >= 0)
        throw DataError("pre-training image has more than one label: " +
                        rec.image);
      label = int(c);
    }
  if (label < 0)
    throw DataError("pre-training image has no label: " + rec.image);
  return label;
}

}  // namespace

StageResult run_pretrain(const Manifest& data, int input_side,
                         const TrainOpts& opts) {
  check_opts(opts);
  if (data.records.empty()) throw DataError("pretrain: empty dataset");
  if (opts.augment && opts.resize_for_crop <= input_side)
    throw ConfigError("pretrain: pre-crop size must exceed the input side");

  StageResult res;
  res.net = make_desk_cnn(data.class_count(), 3, input_side);

  Rng rng(opts.seed);
  res.net.init_params(rng);

  ImageCache cache(data);
  res.net.channel_means = channel_means(data, cache);

  ScheduleSpec sched = schedule_of(opts);
  auto params = res.net.parameters();
  const int cut = res.net.softmax_index();

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    double loss_sum = 0.0;
    int pending = 0;
    for (size_t idx : shuffled_indices(data.records.size(), rng)) {
      const ManifestRecord& rec = data.records[idx];
      int label = single_label_of(rec);

      ImageU8 view;
      if (opts.augment) {
        view = resize(cache.get(idx), opts.resize_for_crop,
                      opts.resize_for_crop);
        int span = opts.resize_for_crop - input_side;
        int ox = rng.uniform_int(0, span);
        int oy = rng.uniform_int(0, span);
        view = crop(view, Box{ox, oy, input_side, input_side});
        if (rng.bernoulli(0.5)) view = hflip(view);
      } else {
        view = resize(cache.get(idx), input_side, input_side);
      }

      Tensor x = input_from_image(view, res.net.channel_means);
      ForwardCache fc;
      Tensor logits = res.net.forward_prefix(x, cut, Mode::train, rng, &fc);
      Tensor p = softmax_forward(logits);
      loss_sum += multinomial_logistic_loss(p, label);
      res.net.backward(fc, multinomial_logistic_grad_logits(p, label));

      if (++pending == opts.batch) {
        scale_grads(params, 1.0 / pending);
        sgd_step(params, sched, epoch);
        res.net.zero_grads();
        pending = 0;
      }
    }
    if (pending > 0) {
      scale_grads(params, 1.0 / pending);
      sgd_step(params, sched, epoch);
      res.net.zero_grads();
    }
    res.log.epoch_loss.push_back(loss_sum / double(data.records.size()));
  }
  return res;
}

StageResult run_ift(const Network& pretrained, Stage tag, const Manifest& data,
                    const TrainOpts& opts) {
  check_opts(opts);
  if (tag != Stage::pretrain)
    throw StageError("image-fine-tuning expects a pre-training checkpoint");
  if (data.records.empty()) throw DataError("ift: empty dataset");

  StageResult res;
  res.net = pretrained;

  Rng rng(opts.seed);
  res.net.swap_classifier(data.class_count(), rng);
  res.net.zero_grads();
  res.net.zero_momentum();

  ImageCache cache(data);
  res.net.channel_means = channel_means(data, cache);

  ScheduleSpec sched = schedule_of(opts);
  auto params = res.net.parameters();
  const int cut = res.net.softmax_index();
  const int side = res.net.input_side();

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    double loss_sum = 0.0;
    int pending = 0;
    for (size_t idx : shuffled_indices(data.records.size(), rng)) {
      const ManifestRecord& rec = data.records[idx];

      ImageU8 view = resize(cache.get(idx), side, side);
      if (opts.augment && rng.bernoulli(0.5)) view = hflip(view);

      Tensor x = input_from_image(view, res.net.channel_means);
      ForwardCache fc;
      Tensor logits = res.net.forward_prefix(x, cut, Mode::train, rng, &fc);
      Tensor p = softmax_forward(logits);
      Tensor target = normalized_target(rec.labels);
      loss_sum += squared_loss(p, target);
      Tensor dlogits = softmax_backward(p, squared_loss_grad(p, target));
      res.net.backward(fc, dlogits);

      if (++pending == opts.batch) {
        scale_grads(params, 1.0 / pending);
        sgd_step(params, sched, epoch);
        res.net.zero_grads();
        pending = 0;
      }
    }
    if (pending > 0) {
      scale_grads(params, 1.0 / pending);
      sgd_step(params, sched, epoch);
      res.net.zero_grads();
    }
    res.log.epoch_loss.push_back(loss_sum / double(data.records.size()));
  }
  return res;
}

StageResult run_hft(const Network& ifted, Stage tag, const Manifest& data,
                    const ObjectnessModel& objn, const HftOpts& opts) {
  check_opts(opts.train);
  if (tag != Stage::ift)
    throw StageError("hypotheses-fine-tuning expects an image-fine-tuned checkpoint");
  if (data.records.empty()) throw DataError("hft: empty dataset");

  StageResult res;
  res.net = ifted;
  res.net.zero_grads();
  res.net.zero_momentum();

  Rng rng(opts.train.seed);
  ImageCache cache(data);

  // Hypothesis boxes are a pure function of the image, so compute them once
  // and reuse across epochs.
  const size_t n = data.records.size();
  std::vector<std::vector<Box>> chosen(n);
  for (size_t i = 0; i < n; ++i) {
    const ImageU8& img = cache.get(i);
    auto props = generate_proposals(img, objn, opts.proposals_n);
    if (props.empty()) {
      ++res.log.skipped_images;
      continue;
    }
    try {
      HSelection sel = select_boxes(props, opts.hs);
      for (int idx : sel.chosen) chosen[i].push_back(props[size_t(idx)].box);
    } catch (const DataError&) {
      ++res.log.skipped_images;
    }
  }

  ScheduleSpec sched = schedule_of(opts.train);
  auto params = res.net.parameters();
  const int cut = res.net.softmax_index();
  const int side = res.net.input_side();
  const int classes = res.net.output_classes();

  for (int epoch = 0; epoch < opts.train.epochs; ++epoch) {
    double loss_sum = 0.0;
    size_t trained = 0;
    int pending = 0;
    for (size_t idx : shuffled_indices(n, rng)) {
      if (chosen[idx].empty()) continue;
      const ImageU8& img = cache.get(idx);
      bool flip = opts.train.augment && rng.bernoulli(0.5);

      const size_t l = chosen[idx].size();
      std::vector<ForwardCache> caches(l);
      std::vector<Tensor> logits(l);
      for (size_t h = 0; h < l; ++h) {
        ImageU8 view = resize_region(img, chosen[idx][h], side, side);
        if (flip) view = hflip(view);
        Tensor x = input_from_image(view, res.net.channel_means);
        logits[h] =
            res.net.forward_prefix(x, cut, Mode::train, rng, &caches[h]);
      }

      std::vector<int> winner;
      Tensor fused = fuse_max(logits, &winner);
      Tensor p = softmax_forward(fused);
      Tensor target = normalized_target(data.records[idx].labels);
      loss_sum += squared_loss(p, target);
      Tensor dfused = softmax_backward(p, squared_loss_grad(p, target));

      // Route each class gradient to its winning hypothesis only.
      std::vector<Tensor> dlogits(l, Tensor({classes}));
      std::vector<uint8_t> touched(l, 0);
      for (int j = 0; j < classes; ++j) {
        int h = winner[size_t(j)];
        dlogits[size_t(h)].data[size_t(j)] = dfused.data[size_t(j)];
        touched[size_t(h)] = 1;
      }
      for (size_t h = 0; h < l; ++h)
        if (touched[h]) res.net.backward(caches[h], dlogits[h]);

      ++trained;
      if (++pending == opts.train.batch) {
        scale_grads(params, 1.0 / pending);
        sgd_step(params, sched, epoch);
        res.net.zero_grads();
        pending = 0;
      }
    }
    if (pending > 0) {
      scale_grads(params, 1.0 / pending);
      sgd_step(params, sched, epoch);
      res.net.zero_grads();
    }
    if (trained == 0) throw DataError("hft: every image yielded zero hypotheses");
    res.log.epoch_loss.push_back(loss_sum / double(trained));
  }
  return res;
}

Tensor predict_whole(const Network& net, const ImageU8& image) {
  Rng rng(0);
  ImageU8 view = resize(image, net.input_side(), net.input_side());
  Tensor x = input_from_image(view, net.channel_means);
  return net.forward(x, Mode::eval, rng);
}

Tensor predict_hypotheses(const Network& net, const ImageU8& image,
                          const ObjectnessModel& objn, int proposals_n,
                          const HSConfig& hs, FuseMode mode) {
  Rng rng(0);
  const int side = net.input_side();

  std::vector<Box> boxes;
  auto props = generate_proposals(image, objn, proposals_n);
  if (!props.empty()) {
    try {
      HSelection sel = select_boxes(props, hs);
      for (int idx : sel.chosen) boxes.push_back(props[size_t(idx)].box);
    } catch (const DataError&) {
    }
  }
  if (boxes.empty()) return predict_whole(net, image);

  const int cut = net.softmax_index();
  std::vector<Tensor> outs;
  outs.reserve(boxes.size());
  for (const Box& b : boxes) {
    ImageU8 view = resize_region(image, b, side, side);
    Tensor x = input_from_image(view, net.channel_means);
    if (mode == FuseMode::post_softmax)
      outs.push_back(net.forward(x, Mode::eval, rng));
    else
      outs.push_back(net.forward_prefix(x, cut, Mode::eval, rng, nullptr));
  }
  Tensor fused = fuse_max(outs);
  if (mode == FuseMode::pre_softmax) fused = softmax_forward(fused);
  return fused;
}

}  // namespace hcp
