#include "drgan/discriminator.hpp"

namespace drgan::disc {

std::vector<torch::Tensor> build_pyramid(const torch::Tensor& x,
                                         const torch::Tensor& c,
                                         int64_t n_scales) {
  if (x.dim() != 4 || c.dim() != 4)
    throw ValidationError("build_pyramid expects N×C×H×W tensors");
  if (x.size(0) != c.size(0) || x.size(2) != c.size(2) || x.size(3) != c.size(3))
    throw ValidationError("build_pyramid: image/condition shapes disagree");
  std::vector<torch::Tensor> levels;
  auto level = torch::cat({c, x}, 1);
  for (int64_t s = 0; s < n_scales; ++s) {
    levels.push_back(level);
    if (s + 1 < n_scales) level = torch::avg_pool2d(level, 2);
  }
  return levels;
}

ScaleDiscriminatorImpl::ScaleDiscriminatorImpl(const DiscConfig& cfg)
    : leaky_slope(cfg.leaky_slope) {
  int64_t in = cfg.in_channels;
  int64_t out = cfg.base_channels;
  for (int64_t p = 0; p < cfg.conv_layers; ++p) {
    convs.push_back(torch::nn::Conv2d(
        torch::nn::Conv2dOptions(in, out, cfg.kernel).stride(cfg.stride).padding(1)));
    register_module("conv" + std::to_string(p), convs.back());
    in = out;
    out *= 2;
  }
  rf_head = register_module("rf_head", torch::nn::Linear(in, 1));
  grade_head = register_module("grade_head",
                               torch::nn::Linear(in, data::kNumGrades));
}

DiscOutput ScaleDiscriminatorImpl::forward(const torch::Tensor& x) {
  DiscOutput out;
  auto h = x;
  for (auto& conv : convs) {
    h = torch::leaky_relu(conv->forward(h), leaky_slope);
    out.features.push_back(h);
  }
  auto pooled = torch::adaptive_avg_pool2d(h, {1, 1}).flatten(1);
  out.rf_logit = rf_head->forward(pooled).squeeze(-1);
  out.grade_logits = grade_head->forward(pooled);
  return out;
}

MultiScaleDiscriminatorImpl::MultiScaleDiscriminatorImpl(const DiscConfig& cfg) {
  for (int64_t n = 0; n < cfg.n_scales; ++n) {
    scales.push_back(ScaleDiscriminator(cfg));
    register_module("scale" + std::to_string(n), scales.back());
  }
}

std::vector<DiscOutput> MultiScaleDiscriminatorImpl::forward(
    const std::vector<torch::Tensor>& pyramid) {
  if (pyramid.size() != scales.size())
    throw ValidationError("pyramid has " + std::to_string(pyramid.size()) +
                          " levels for " + std::to_string(scales.size()) +
                          " discriminators");
  std::vector<DiscOutput> outs;
  for (size_t n = 0; n < scales.size(); ++n)
    outs.push_back(scales[n]->forward(pyramid[n]));
  return outs;
}

}  // namespace drgan::disc
