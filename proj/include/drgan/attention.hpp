#pragma once

#include <torch/torch.h>

#include "drgan/common.hpp"

namespace drgan::attention {

// Largest divisor of `channels` not exceeding `requested`; keeps the paper's
// reduction ratios usable at tiny test widths.
int64_t clip_reduction(int64_t channels, int64_t requested);

struct ScaOptions {
  int64_t channels = 0;   // C
  int64_t reduction = 8;  // d; channels % reduction must be 0
};

// Spatial and channel attention block.
//
// Spatial branch: three 1x1 convs on I; the first two reduce to C/d channels
// and form the (HW)x(HW) row-stochastic map a_s = rowsoftmax(I2^T I1); the
// third keeps C channels and is combined residually,
// I_s = I + reshape(I3 a_s^T). Channel branch: raw reshapes of I only,
// a_c = rowsoftmax(I I^T) over channels, I_c = I + reshape(a_c I).
// The block output is w_s*conv_s(I_s) + w_c*conv_c(I_c) with scalar fusion
// weights that are learnable and start at zero.
class ScaImpl : public torch::nn::Module {
 public:
  explicit ScaImpl(ScaOptions opts);

  torch::Tensor spatial_map(const torch::Tensor& x);   // N×(HW)×(HW)
  torch::Tensor channel_map(const torch::Tensor& x);   // N×C×C
  torch::Tensor spatial_attention(const torch::Tensor& x);  // I_s, N×C×H×W
  torch::Tensor channel_attention(const torch::Tensor& x);  // I_c, N×C×H×W
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d branch1{nullptr};  // C -> C/d
  torch::nn::Conv2d branch2{nullptr};  // C -> C/d
  torch::nn::Conv2d branch3{nullptr};  // C -> C (spatial value branch)
  torch::nn::Conv2d out_spatial{nullptr};
  torch::nn::Conv2d out_channel{nullptr};
  torch::Tensor w_spatial;
  torch::Tensor w_channel;

  const ScaOptions& options() const { return opts_; }

 private:
  void check_input(const torch::Tensor& x) const;
  ScaOptions opts_;
};
TORCH_MODULE(Sca);

}  // namespace drgan::attention
