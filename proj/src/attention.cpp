#include "drgan/attention.hpp"

namespace drgan::attention {

int64_t clip_reduction(int64_t channels, int64_t requested) {
  if (channels <= 0) throw ConfigError("clip_reduction: channels must be > 0");
  int64_t d = std::min(channels, std::max<int64_t>(1, requested));
  while (channels % d != 0) --d;
  return d;
}

ScaImpl::ScaImpl(ScaOptions opts) : opts_(opts) {
  if (opts_.channels <= 0 || opts_.reduction <= 0 ||
      opts_.channels % opts_.reduction != 0)
    throw ConfigError("SCA: channels (" + std::to_string(opts_.channels) +
                      ") must be divisible by reduction (" +
                      std::to_string(opts_.reduction) + ")");
  const int64_t reduced = opts_.channels / opts_.reduction;
  branch1 = register_module(
      "branch1", torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.channels, reduced, 1)));
  branch2 = register_module(
      "branch2", torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.channels, reduced, 1)));
  branch3 = register_module(
      "branch3",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.channels, opts_.channels, 1)));
  out_spatial = register_module(
      "out_spatial",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.channels, opts_.channels, 1)));
  out_channel = register_module(
      "out_channel",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(opts_.channels, opts_.channels, 1)));
  w_spatial = register_parameter("w_spatial", torch::zeros({}));
  w_channel = register_parameter("w_channel", torch::zeros({}));
}

void ScaImpl::check_input(const torch::Tensor& x) const {
  if (x.dim() != 4 || x.size(1) != opts_.channels)
    throw ValidationError("SCA: expected N×" + std::to_string(opts_.channels) +
                          "×H×W input");
}

torch::Tensor ScaImpl::spatial_map(const torch::Tensor& x) {
  check_input(x);
  auto i1 = branch1->forward(x).flatten(2);              // N×(C/d)×(HW)
  auto i2 = branch2->forward(x).flatten(2);              // N×(C/d)×(HW)
  auto logits = torch::bmm(i2.transpose(1, 2), i1);      // N×(HW)×(HW)
  return torch::softmax(logits, -1);
}

torch::Tensor ScaImpl::channel_map(const torch::Tensor& x) {
  check_input(x);
  auto f = x.flatten(2);                                 // N×C×(HW)
  return torch::softmax(torch::bmm(f, f.transpose(1, 2)), -1);  // N×C×C
}

torch::Tensor ScaImpl::spatial_attention(const torch::Tensor& x) {
  auto a = spatial_map(x);
  auto v = branch3->forward(x).flatten(2);               // N×C×(HW)
  return x + torch::bmm(v, a.transpose(1, 2)).view_as(x);
}

torch::Tensor ScaImpl::channel_attention(const torch::Tensor& x) {
  auto a = channel_map(x);
  auto f = x.flatten(2);
  return x + torch::bmm(a, f).view_as(x);
}

torch::Tensor ScaImpl::forward(const torch::Tensor& x) {
  auto spatial = out_spatial->forward(spatial_attention(x));
  auto channel = out_channel->forward(channel_attention(x));
  return w_spatial * spatial + w_channel * channel;
}

}  // namespace drgan::attention
