#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcp/errors.hpp"
#include "hcp/layers.hpp"
#include "hcp/rng.hpp"
#include "hcp/tensor.hpp"

namespace hcp {

enum class Stage : uint32_t { pretrain = 0, ift = 1, hft = 2 };

// Per-forward bookkeeping needed by the backward pass.
struct ForwardCache {
  std::vector<Tensor> inputs;  // input seen by each executed layer
  std::vector<std::vector<uint8_t>> dropout_masks;
  std::vector<Tensor> softmax_outputs;  // indexed like inputs, empty otherwise
  Mode mode = Mode::train;
  int layers_run = 0;
};

// A plain sequential stack. Conv and fc layers own a weight and a bias
// parameter; everything else is parameter-free.
class Network {
 public:
  Network() = default;
  Network(std::vector<LayerSpec> specs, int input_channels, int input_side);

  // Runs the first `nlayers` layers (all of them when nlayers < 0).
  Tensor forward_prefix(const Tensor& x, int nlayers, Mode mode, Rng& rng,
                        ForwardCache* cache) const;
  Tensor forward(const Tensor& x, Mode mode, Rng& rng,
                 ForwardCache* cache = nullptr) const;

  // Backpropagates `grad` (taken w.r.t. the output of the last layer the
  // cache ran) and accumulates parameter gradients. Returns the gradient
  // w.r.t. the network input.
  Tensor backward(const ForwardCache& cache, const Tensor& grad);

  void init_params(Rng& rng, double sigma = 0.01);
  void zero_grads();
  void zero_momentum();

  // Replaces the classifier (final fc) layer with a freshly initialized one
  // producing `classes` outputs.
  void swap_classifier(int classes, Rng& rng, double sigma = 0.01);

  std::vector<Parameter*> parameters();
  const std::vector<LayerSpec>& specs() const { return specs_; }
  int input_channels() const { return input_channels_; }
  int input_side() const { return input_side_; }
  int output_classes() const;
  // Index of the final softmax layer, or -1 when the stack has none.
  int softmax_index() const;

  std::vector<double> channel_means;  // subtracted from inputs by callers

  // Serialization. The stage/epoch pair travels with the weights so a later
  // stage can verify what it is resuming from.
  void save(const std::string& path, Stage stage, int epoch) const;
  static Network load(const std::string& path, Stage* stage = nullptr,
                      int* epoch = nullptr);

  std::vector<Parameter> params_;      // weight,bias per parameterized layer
  std::vector<int> param_of_layer_;    // -1 or index of the weight parameter

 private:
  std::vector<LayerSpec> specs_;
  int input_channels_ = 0;
  int input_side_ = 0;

  void build_params();
};

// The compact classifier used throughout: three conv/pool blocks into a
// 128-wide hidden layer with dropout, then the class layer and softmax.
// Learning-rate groups: convs 0, hidden fc 1, class fc 2.
Network make_desk_cnn(int classes, int input_channels = 3, int input_side = 64);

}  // namespace hcp
