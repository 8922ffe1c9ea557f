#include "hcp/network.hpp"

#include <cstring>
#include <fstream>

namespace hcp {

namespace {

const char kMagic[4] = {'H', 'C', 'P', '1'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f32(std::ostream& os, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  write_u32(os, v);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("checkpoint: unexpected end of file");
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
         (uint32_t(b[3]) << 24);
}

float read_f32(std::istream& is) {
  uint32_t v = read_u32(is);
  float f;
  std::memcpy(&f, &v, 4);
  return f;
}

}  // namespace

Network::Network(std::vector<LayerSpec> specs, int input_channels,
                 int input_side)
    : specs_(std::move(specs)),
      input_channels_(input_channels),
      input_side_(input_side) {
  if (input_channels_ < 1 || input_side_ < 1)
    throw ConfigError("network: input geometry must be positive");
  build_params();
}

void Network::build_params() {
  params_.clear();
  param_of_layer_.assign(specs_.size(), -1);

  // Walk the stack to size each parameterized layer.
  int C = input_channels_, H = input_side_, W = input_side_;
  bool flat = false;
  int flat_n = 0;
  for (size_t i = 0; i < specs_.size(); ++i) {
    const LayerSpec& s = specs_[i];
    switch (s.kind) {
      case LayerKind::conv: {
        if (flat) throw ConfigError("network: conv after fc");
        if (s.units < 1 || s.kernel < 1 || s.stride < 1 || s.pad < 0)
          throw ConfigError("network: bad conv spec");
        param_of_layer_[i] = int(params_.size());
        Parameter w(Tensor({s.units, C, s.kernel, s.kernel}), s.lr_group);
        Parameter b(Tensor({s.units}), s.lr_group);
        params_.push_back(std::move(w));
        params_.push_back(std::move(b));
        H = (H + 2 * s.pad - s.kernel) / s.stride + 1;
        W = (W + 2 * s.pad - s.kernel) / s.stride + 1;
        C = s.units;
        if (H < 1 || W < 1) throw ConfigError("network: conv shrinks input away");
        break;
      }
      case LayerKind::maxpool: {
        if (flat) throw ConfigError("network: pool after fc");
        if (s.kernel < 1 || s.stride < 1)
          throw ConfigError("network: bad pool spec");
        H = (H - s.kernel) / s.stride + 1;
        W = (W - s.kernel) / s.stride + 1;
        if (H < 1 || W < 1) throw ConfigError("network: pool shrinks input away");
        break;
      }
      case LayerKind::fc: {
        int n = flat ? flat_n : C * H * W;
        if (s.units < 1) throw ConfigError("network: bad fc spec");
        param_of_layer_[i] = int(params_.size());
        Parameter w(Tensor({s.units, n}), s.lr_group);
        Parameter b(Tensor({s.units}), s.lr_group);
        params_.push_back(std::move(w));
        params_.push_back(std::move(b));
        flat = true;
        flat_n = s.units;
        break;
      }
      case LayerKind::relu:
      case LayerKind::dropout:
      case LayerKind::softmax:
        break;
    }
  }
}

Tensor Network::forward_prefix(const Tensor& x, int nlayers, Mode mode,
                               Rng& rng, ForwardCache* cache) const {
  int n = nlayers < 0 ? int(specs_.size()) : nlayers;
  if (n > int(specs_.size())) throw ConfigError("network: prefix too long");
  if (cache) {
    cache->inputs.clear();
    cache->dropout_masks.assign(size_t(n), {});
    cache->softmax_outputs.assign(size_t(n), Tensor());
    cache->mode = mode;
    cache->layers_run = n;
  }
  Tensor cur = x;
  std::vector<uint8_t> scratch_mask;
  for (int i = 0; i < n; ++i) {
    const LayerSpec& s = specs_[size_t(i)];
    if (cache) cache->inputs.push_back(cur);
    switch (s.kind) {
      case LayerKind::conv: {
        int pi = param_of_layer_[size_t(i)];
        cur = conv2d_forward(cur, params_[size_t(pi)].value,
                             params_[size_t(pi) + 1].value, s.stride, s.pad);
        break;
      }
      case LayerKind::relu:
        cur = relu_forward(cur);
        break;
      case LayerKind::maxpool:
        cur = maxpool2d_forward(cur, s.kernel, s.stride);
        break;
      case LayerKind::fc: {
        int pi = param_of_layer_[size_t(i)];
        cur = fc_forward(cur, params_[size_t(pi)].value,
                         params_[size_t(pi) + 1].value);
        break;
      }
      case LayerKind::dropout: {
        std::vector<uint8_t>& mask =
            cache ? cache->dropout_masks[size_t(i)] : scratch_mask;
        cur = dropout_forward(cur, s.drop_ratio, mode, rng, mask);
        break;
      }
      case LayerKind::softmax:
        cur = softmax_forward(cur);
        if (cache) cache->softmax_outputs[size_t(i)] = cur;
        break;
    }
  }
  return cur;
}

Tensor Network::forward(const Tensor& x, Mode mode, Rng& rng,
                        ForwardCache* cache) const {
  return forward_prefix(x, -1, mode, rng, cache);
}

Tensor Network::backward(const ForwardCache& cache, const Tensor& grad) {
  Tensor g = grad;
  for (int i = cache.layers_run - 1; i >= 0; --i) {
    const LayerSpec& s = specs_[size_t(i)];
    const Tensor& in = cache.inputs[size_t(i)];
    switch (s.kind) {
      case LayerKind::conv: {
        int pi = param_of_layer_[size_t(i)];
        Tensor gi, gw, gb;
        conv2d_backward(in, params_[size_t(pi)].value, g, s.stride, s.pad, gi,
                        gw, gb);
        Parameter& w = params_[size_t(pi)];
        Parameter& b = params_[size_t(pi) + 1];
        for (size_t k = 0; k < gw.data.size(); ++k) w.grad.data[k] += gw.data[k];
        for (size_t k = 0; k < gb.data.size(); ++k) b.grad.data[k] += gb.data[k];
        g = std::move(gi);
        break;
      }
      case LayerKind::relu:
        g = relu_backward(in, g);
        break;
      case LayerKind::maxpool:
        g = maxpool2d_backward(in, g, s.kernel, s.stride);
        break;
      case LayerKind::fc: {
        int pi = param_of_layer_[size_t(i)];
        Tensor gi, gw, gb;
        fc_backward(in, params_[size_t(pi)].value, g, gi, gw, gb);
        Parameter& w = params_[size_t(pi)];
        Parameter& b = params_[size_t(pi) + 1];
        for (size_t k = 0; k < gw.data.size(); ++k) w.grad.data[k] += gw.data[k];
        for (size_t k = 0; k < gb.data.size(); ++k) b.grad.data[k] += gb.data[k];
        g = std::move(gi);
        break;
      }
      case LayerKind::dropout:
        g = dropout_backward(g, s.drop_ratio, cache.mode,
                             cache.dropout_masks[size_t(i)]);
        break;
      case LayerKind::softmax:
        g = softmax_backward(cache.softmax_outputs[size_t(i)], g);
        break;
    }
  }
  return g;
}

void Network::init_params(Rng& rng, double sigma) {
  for (size_t i = 0; i < params_.size(); i += 2) {
    for (double& v : params_[i].value.data) v = rng.normal(0.0, sigma);
    params_[i + 1].value.fill(0.0);  // bias
  }
  zero_grads();
  zero_momentum();
}

void Network::zero_grads() {
  for (Parameter& p : params_) p.grad.fill(0.0);
}

void Network::zero_momentum() {
  for (Parameter& p : params_) p.momentum_buf.fill(0.0);
}

void Network::swap_classifier(int classes, Rng& rng, double sigma) {
  int idx = -1;
  for (int i = int(specs_.size()) - 1; i >= 0; --i)
    if (specs_[size_t(i)].kind == LayerKind::fc) {
      idx = i;
      break;
    }
  if (idx < 0) throw ConfigError("network: no fc layer to swap");
  if (classes < 1) throw ConfigError("network: class count must be positive");

  int pi = param_of_layer_[size_t(idx)];
  int n = params_[size_t(pi)].value.dim(1);
  specs_[size_t(idx)].units = classes;
  Parameter w(Tensor({classes, n}), specs_[size_t(idx)].lr_group);
  Parameter b(Tensor({classes}), specs_[size_t(idx)].lr_group);
  for (double& v : w.value.data) v = rng.normal(0.0, sigma);
  params_[size_t(pi)] = std::move(w);
  params_[size_t(pi) + 1] = std::move(b);
}

std::vector<Parameter*> Network::parameters() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (Parameter& p : params_) out.push_back(&p);
  return out;
}

int Network::output_classes() const {
  for (int i = int(specs_.size()) - 1; i >= 0; --i)
    if (specs_[size_t(i)].kind == LayerKind::fc) return specs_[size_t(i)].units;
  throw ConfigError("network: no fc layer");
}

int Network::softmax_index() const {
  for (int i = int(specs_.size()) - 1; i >= 0; --i)
    if (specs_[size_t(i)].kind == LayerKind::softmax) return i;
  return -1;
}

void Network::save(const std::string& path, Stage stage, int epoch) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, uint32_t(specs_.size()));
  for (const LayerSpec& s : specs_) {
    write_u32(os, uint32_t(s.kind));
    write_u32(os, uint32_t(s.units));
    write_u32(os, uint32_t(s.kernel));
    write_u32(os, uint32_t(s.stride));
    write_u32(os, uint32_t(s.pad));
    write_f32(os, float(s.drop_ratio));
    write_u32(os, uint32_t(s.lr_group));
  }
  write_u32(os, uint32_t(params_.size()));
  for (const Parameter& p : params_) {
    write_u32(os, uint32_t(p.value.ndim()));
    for (int d = 0; d < p.value.ndim(); ++d)
      write_u32(os, uint32_t(p.value.dim(d)));
    for (double v : p.value.data) write_f32(os, float(v));
    for (double v : p.momentum_buf.data) write_f32(os, float(v));
  }
  write_u32(os, uint32_t(stage));
  write_u32(os, uint32_t(epoch));
  write_u32(os, uint32_t(channel_means.size()));
  for (double m : channel_means) write_f32(os, float(m));
  write_u32(os, uint32_t(input_channels_));
  write_u32(os, uint32_t(input_side_));
  if (!os) throw IoError("checkpoint write failed: " + path);
}

Network Network::load(const std::string& path, Stage* stage, int* epoch) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a checkpoint file: " + path);
  uint32_t version = read_u32(is);
  if (version != kVersion) throw IoError("unsupported checkpoint version");

  uint32_t nlayers = read_u32(is);
  if (nlayers > 1024) throw IoError("checkpoint: implausible layer count");
  std::vector<LayerSpec> specs;
  specs.reserve(nlayers);
  for (uint32_t i = 0; i < nlayers; ++i) {
    LayerSpec s;
    uint32_t kind = read_u32(is);
    if (kind > uint32_t(LayerKind::softmax))
      throw IoError("checkpoint: unknown layer kind");
    s.kind = LayerKind(kind);
    s.units = int(read_u32(is));
    s.kernel = int(read_u32(is));
    s.stride = int(read_u32(is));
    s.pad = int(read_u32(is));
    s.drop_ratio = double(read_f32(is));
    s.lr_group = int(read_u32(is));
    specs.push_back(s);
  }

  uint32_t nparams = read_u32(is);
  struct RawParam {
    std::vector<int> dims;
    std::vector<float> values, momentum;
  };
  std::vector<RawParam> raw(nparams);
  for (uint32_t i = 0; i < nparams; ++i) {
    uint32_t ndim = read_u32(is);
    if (ndim > 8) throw IoError("checkpoint: implausible tensor rank");
    size_t count = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      uint32_t e = read_u32(is);
      if (e == 0 || e > (1u << 24)) throw IoError("checkpoint: bad tensor dim");
      raw[i].dims.push_back(int(e));
      count *= e;
    }
    raw[i].values.resize(count);
    for (size_t k = 0; k < count; ++k) raw[i].values[k] = read_f32(is);
    raw[i].momentum.resize(count);
    for (size_t k = 0; k < count; ++k) raw[i].momentum[k] = read_f32(is);
  }

  uint32_t stage_u = read_u32(is);
  if (stage_u > uint32_t(Stage::hft)) throw IoError("checkpoint: bad stage tag");
  uint32_t epoch_u = read_u32(is);
  uint32_t mean_len = read_u32(is);
  if (mean_len > 4096) throw IoError("checkpoint: implausible mean length");
  std::vector<double> means(mean_len);
  for (uint32_t i = 0; i < mean_len; ++i) means[i] = double(read_f32(is));
  uint32_t in_c = read_u32(is);
  uint32_t in_s = read_u32(is);
  if (in_c == 0 || in_s == 0 || in_c > 16 || in_s > 65536)
    throw IoError("checkpoint: bad input geometry");

  Network net(specs, int(in_c), int(in_s));
  if (net.params_.size() != nparams)
    throw IoError("checkpoint: parameter count does not match layers");
  for (uint32_t i = 0; i < nparams; ++i) {
    Parameter& p = net.params_[i];
    if (p.value.shape != raw[i].dims)
      throw IoError("checkpoint: parameter shape does not match layers");
    for (size_t k = 0; k < p.value.data.size(); ++k) {
      p.value.data[k] = double(raw[i].values[k]);
      p.momentum_buf.data[k] = double(raw[i].momentum[k]);
    }
  }
  net.channel_means = means;
  if (stage) *stage = Stage(stage_u);
  if (epoch) *epoch = int(epoch_u);
  return net;
}

Network make_desk_cnn(int classes, int input_channels, int input_side) {
  std::vector<LayerSpec> specs = {
      LayerSpec::conv(8, 3, 1, 1, 0),  LayerSpec::relu(),
      LayerSpec::maxpool(2, 2),        LayerSpec::conv(16, 3, 1, 1, 0),
      LayerSpec::relu(),               LayerSpec::maxpool(2, 2),
      LayerSpec::conv(32, 3, 1, 1, 0), LayerSpec::relu(),
      LayerSpec::maxpool(2, 2),        LayerSpec::fc(128, 1),
      LayerSpec::relu(),               LayerSpec::dropout(0.5),
      LayerSpec::fc(classes, 2),       LayerSpec::softmax(),
  };
  return Network(std::move(specs), input_channels, input_side);
}

}  // namespace hcp
