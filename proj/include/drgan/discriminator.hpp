#pragma once

#include <torch/torch.h>

#include <vector>

#include "drgan/common.hpp"
#include "drgan/data.hpp"

namespace drgan::disc {

struct DiscConfig {
  int64_t n_scales = 3;
  int64_t conv_layers = 4;
  int64_t kernel = 4;
  int64_t stride = 2;
  double leaky_slope = 0.2;
  int64_t base_channels = 16;
  int64_t in_channels = data::kConditionChannels + 3;  // concat(c, x)
};

struct DiscOutput {
  torch::Tensor rf_logit;               // N
  std::vector<torch::Tensor> features;  // one per conv layer (D_n^p)
  torch::Tensor grade_logits;           // N×5
};

// Image pyramid of concat(c, x): the full resolution plus n_scales-1 halvings
// by 2x2 average pooling.
std::vector<torch::Tensor> build_pyramid(const torch::Tensor& x,
                                         const torch::Tensor& c,
                                         int64_t n_scales = 3);

// Convs with kernel 4 / stride 2, leaky ReLU 0.2, no normalization; global
// average pooling feeds linear real/fake and 5-way grade heads, so any input
// scale fits the same parameters.
class ScaleDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit ScaleDiscriminatorImpl(const DiscConfig& cfg);
  DiscOutput forward(const torch::Tensor& x);

  std::vector<torch::nn::Conv2d> convs;
  torch::nn::Linear rf_head{nullptr};
  torch::nn::Linear grade_head{nullptr};
  double leaky_slope = 0.2;
};
TORCH_MODULE(ScaleDiscriminator);

// Three discriminators with identical architecture and disjoint parameters.
class MultiScaleDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit MultiScaleDiscriminatorImpl(const DiscConfig& cfg);
  std::vector<DiscOutput> forward(const std::vector<torch::Tensor>& pyramid);

  std::vector<ScaleDiscriminator> scales;
};
TORCH_MODULE(MultiScaleDiscriminator);

}  // namespace drgan::disc
