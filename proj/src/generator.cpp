#include "drgan/generator.hpp"

#include "drgan/data.hpp"

namespace drgan::gen {

namespace {

torch::Tensor resize_condition(const torch::Tensor& c, int64_t side) {
  if (c.size(2) == side && c.size(3) == side) return c;
  return torch::adaptive_avg_pool2d(c, {side, side});
}

torch::Tensor broadcast_style(const torch::Tensor& v, int64_t channels,
                              const torch::Tensor& like) {
  if (!v.defined()) throw ValidationError("style tensor is undefined");
  torch::Tensor t = v;
  if (t.dim() == 1) t = t.unsqueeze(0);
  if (t.dim() != 2 || t.size(1) != channels)
    throw ValidationError("style length " + std::to_string(v.size(-1)) +
                          " does not match channel width " +
                          std::to_string(channels));
  return t.to(like.options()).unsqueeze(-1).unsqueeze(-1);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (full_resolution < 32 || full_resolution % 16 != 0)
    throw ConfigError("full_resolution must be >= 32 and divisible by 16");
  if (base_channels < 4) throw ConfigError("base_channels must be >= 4");
  if (n_residual_blocks < 1) throw ConfigError("n_residual_blocks must be >= 1");
  if (noise_fraction < 0) throw ConfigError("noise_fraction must be >= 0");
}

std::array<int64_t, 4> GeneratorConfig::encoder_widths() const {
  return {base_channels, 2 * base_channels, 4 * base_channels, 8 * base_channels};
}

std::array<int64_t, 4> GeneratorConfig::style_widths() const {
  return {8 * base_channels, 4 * base_channels, 2 * base_channels, base_channels};
}

int64_t GeneratorConfig::style_dim() const {
  int64_t dim = 0;
  for (int64_t w : style_widths()) dim += 2 * w;
  return dim;
}

torch::Tensor adain(const torch::Tensor& x, const torch::Tensor& gamma,
                    const torch::Tensor& beta, double eps) {
  if (x.dim() != 4) throw ValidationError("adain expects N×C×H×W input");
  const int64_t channels = x.size(1);
  auto g = broadcast_style(gamma, channels, x);
  auto b = broadcast_style(beta, channels, x);
  auto mu = x.mean({2, 3}, /*keepdim=*/true);
  auto var = (x - mu).square().mean({2, 3}, /*keepdim=*/true);
  auto norm = (x - mu) / torch::sqrt(var + eps * eps);
  return g * norm + b;
}

EncoderImpl::EncoderImpl(const GeneratorConfig& cfg)
    : expect_resolution_(cfg.full_resolution) {
  cfg.validate();
  const auto w = cfg.encoder_widths();
  conv1 = register_module(
      "conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(data::kConditionChannels,
                                                          w[0], 7)
                                     .stride(2)
                                     .padding(3)));
  conv2 = register_module(
      "conv2",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(w[0], w[1], 3).stride(2).padding(1)));
  conv3 = register_module(
      "conv3",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(w[1], w[2], 3).stride(2).padding(1)));
  conv4 = register_module(
      "conv4",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(w[2], w[3], 3).stride(2).padding(1)));
  bottleneck_conv = register_module(
      "bottleneck_conv",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(w[3], w[3], 3).padding(1)));
  bn1 = register_module("bn1", torch::nn::BatchNorm2d(w[0]));
  bn2 = register_module("bn2", torch::nn::BatchNorm2d(w[1]));
  bn3 = register_module("bn3", torch::nn::BatchNorm2d(w[2]));
  bn4 = register_module("bn4", torch::nn::BatchNorm2d(w[3]));
  bottleneck_bn = register_module("bottleneck_bn", torch::nn::BatchNorm2d(w[3]));
}

EncoderFeatures EncoderImpl::forward(const torch::Tensor& c) {
  if (c.dim() != 4 || c.size(1) != data::kConditionChannels)
    throw ValidationError("encoder expects N×8×H×W condition maps");
  if (c.size(2) != expect_resolution_ || c.size(3) != expect_resolution_)
    throw ValidationError("condition map spatial size " +
                          std::to_string(c.size(2)) +
                          " does not match configured resolution " +
                          std::to_string(expect_resolution_));
  EncoderFeatures out;
  auto x = torch::relu(bn1->forward(conv1->forward(c)));
  out.levels.push_back(x);
  x = torch::relu(bn2->forward(conv2->forward(x)));
  out.levels.push_back(x);
  x = torch::relu(bn3->forward(conv3->forward(x)));
  out.levels.push_back(x);
  x = torch::relu(bn4->forward(conv4->forward(x)));
  out.levels.push_back(x);
  out.bottleneck = torch::relu(bottleneck_bn->forward(bottleneck_conv->forward(x)));
  return out;
}

ResidualBlockImpl::ResidualBlockImpl(int64_t channels) {
  conv1 = register_module(
      "conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
  conv2 = register_module(
      "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
  bn1 = register_module("bn1", torch::nn::BatchNorm2d(channels));
  bn2 = register_module("bn2", torch::nn::BatchNorm2d(channels));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) {
  auto h = torch::relu(bn1->forward(conv1->forward(x)));
  h = bn2->forward(conv2->forward(h));
  return x + h;
}

ResidualStackImpl::ResidualStackImpl(int64_t channels, int64_t n_blocks) {
  for (int64_t i = 0; i < n_blocks; ++i) {
    blocks.push_back(ResidualBlock(channels));
    register_module("block" + std::to_string(i), blocks.back());
  }
}

torch::Tensor ResidualStackImpl::forward(const torch::Tensor& x) {
  auto h = x;
  for (auto& block : blocks) h = block->forward(h);
  return h;
}

AgmInjectorImpl::AgmInjectorImpl(int64_t channels_in, double noise_fraction,
                                 bool use_agm_in)
    : channels(channels_in), use_agm(use_agm_in) {
  if (use_agm) {
    noise_channels = std::max<int64_t>(
        1, static_cast<int64_t>(std::llround(channels * noise_fraction)));
    fuse = register_module(
        "fuse", torch::nn::Conv2d(
                    torch::nn::Conv2dOptions(channels + noise_channels, channels, 1)));
  } else {
    fallback_norm = register_module(
        "fallback_norm",
        torch::nn::InstanceNorm2d(
            torch::nn::InstanceNorm2dOptions(channels).affine(true)));
  }
}

torch::Tensor AgmInjectorImpl::forward(const torch::Tensor& x, const Style& style,
                                       torch::Generator& gen) {
  if (x.size(1) != channels)
    throw ValidationError("AGM: expected " + std::to_string(channels) +
                          " channels, got " + std::to_string(x.size(1)));
  if (!use_agm) return fallback_norm->forward(x);
  auto noise = torch::randn({x.size(0), noise_channels, x.size(2), x.size(3)},
                            gen, x.options());
  auto fused = fuse->forward(torch::cat({x, noise}, 1));
  return adain(fused, style.gamma, style.beta);
}

SynthesisBlockImpl::SynthesisBlockImpl(int64_t width, int64_t skip_width,
                                       int64_t out_width, int64_t sca_reduction,
                                       double noise_fraction, bool use_sca_in,
                                       bool use_agm_in)
    : use_sca(use_sca_in) {
  agm = register_module("agm", AgmInjector(width, noise_fraction, use_agm_in));
  const int64_t concat_width = width + skip_width + data::kConditionChannels;
  fuse = register_module(
      "fuse", torch::nn::Conv2d(torch::nn::Conv2dOptions(concat_width, width, 3).padding(1)));
  fuse_bn = register_module("fuse_bn", torch::nn::BatchNorm2d(width));
  if (use_sca) {
    sca = register_module(
        "sca", attention::Sca(attention::ScaOptions{
                   width, attention::clip_reduction(width, sca_reduction)}));
  }
  up = register_module(
      "up", torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(width, out_width, 3)
                                           .stride(2)
                                           .padding(1)
                                           .output_padding(1)));
  up_bn = register_module("up_bn", torch::nn::BatchNorm2d(out_width));
}

torch::Tensor SynthesisBlockImpl::forward(const torch::Tensor& x,
                                          const torch::Tensor& skip,
                                          const torch::Tensor& cond,
                                          const Style& style,
                                          torch::Generator& gen) {
  auto h = agm->forward(x, style, gen);
  h = torch::relu(fuse_bn->forward(fuse->forward(torch::cat({h, skip, cond}, 1))));
  // Fusion scalars start at zero, so the attention path begins as a zero
  // perturbation of the block.
  if (use_sca) h = h + sca->forward(h);
  return torch::relu(up_bn->forward(up->forward(h)));
}

GlImpl::GlImpl(const GeneratorConfig& cfg) {
  const int64_t b = cfg.base_channels;
  conv1 = register_module(
      "conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(data::kConditionChannels, b, 7)
                                     .stride(2)
                                     .padding(3)));
  conv2 = register_module(
      "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(b, b, 3).padding(1)));
  tconv1 = register_module(
      "tconv1", torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(b, b, 3).padding(1)));
  tconv2 = register_module(
      "tconv2", torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(b, 3, 3)
                                               .stride(2)
                                               .padding(1)
                                               .output_padding(1)));
  bn1 = register_module("bn1", torch::nn::BatchNorm2d(b));
  bn2 = register_module("bn2", torch::nn::BatchNorm2d(b));
  bn3 = register_module("bn3", torch::nn::BatchNorm2d(b));
}

torch::Tensor GlImpl::forward(const torch::Tensor& c, const torch::Tensor& trunk) {
  if (!trunk.defined())
    throw StateError("G_l needs trunk features captured from a G_m forward");
  auto h = torch::relu(bn1->forward(conv1->forward(c)));
  h = torch::relu(bn2->forward(conv2->forward(h)));
  return head_forward(h + trunk);
}

torch::Tensor GlImpl::head_forward(const torch::Tensor& fused) {
  auto h = torch::relu(bn3->forward(tconv1->forward(fused)));
  return torch::tanh(tconv2->forward(h));
}

GeneratorImpl::GeneratorImpl(GeneratorConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const auto w = cfg_.encoder_widths();  // b, 2b, 4b, 8b
  encoder = register_module("encoder", Encoder(cfg_));
  residuals = register_module(
      "residuals", ResidualStack(w[3], cfg_.n_residual_blocks));
  // Synthesis blocks run at R/16, R/8, R/4 before upsampling; skips come from
  // the encoder level at the same scale.
  const std::array<int64_t, 3> widths = {w[3], w[2], w[1]};
  const std::array<int64_t, 3> outs = {w[2], w[1], w[0]};
  for (int i = 0; i < 3; ++i) {
    blocks.push_back(SynthesisBlock(widths[static_cast<size_t>(i)],
                                    widths[static_cast<size_t>(i)],
                                    outs[static_cast<size_t>(i)],
                                    cfg_.sca_reductions[static_cast<size_t>(i)],
                                    cfg_.noise_fraction, cfg_.use_sca,
                                    cfg_.use_agm));
    register_module("block" + std::to_string(i), blocks.back());
  }
  head_agm = register_module(
      "head_agm", AgmInjector(w[0], cfg_.noise_fraction, cfg_.use_agm));
  head_conv = register_module(
      "head_conv",
      torch::nn::Conv2d(torch::nn::Conv2dOptions(
                            2 * w[0] + data::kConditionChannels, 3, 7)
                            .padding(3)));
  gl = register_module("gl", Gl(cfg_));
  grade_conv = register_module(
      "grade_conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(w[3], w[3], 3).padding(1)));
  grade_fc = register_module("grade_fc",
                             torch::nn::Linear(w[3], data::kNumGrades));
}

EncoderFeatures GeneratorImpl::encode(const torch::Tensor& c) {
  return encoder->forward(c);
}

torch::Tensor GeneratorImpl::residual_stack(const torch::Tensor& bottleneck) {
  return residuals->forward(bottleneck);
}

GeneratorImpl::MidResult GeneratorImpl::synthesize_mid(
    const torch::Tensor& c, const EncoderFeatures& feats, const StyleSet& styles,
    torch::Generator& gen) {
  if (styles.size() != 4)
    throw ConfigError("expected 4 styles (3 synthesis blocks + head), got " +
                      std::to_string(styles.size()));
  auto x = residuals->forward(feats.bottleneck);
  const int64_t r = cfg_.full_resolution;
  for (size_t k = 0; k < blocks.size(); ++k) {
    const int64_t side = r >> (4 - static_cast<int64_t>(k));
    x = blocks[k]->forward(x, feats.levels[3 - k], resize_condition(c, side),
                           styles[k], gen);
  }
  MidResult out;
  out.trunk = x;  // base width at R/2, fused into G_l
  auto h = head_agm->forward(x, styles[3], gen);
  h = torch::cat({h, feats.levels[0], resize_condition(c, r / 2)}, 1);
  out.mid = torch::tanh(head_conv->forward(h));
  return out;
}

torch::Tensor GeneratorImpl::enhance(const torch::Tensor& c,
                                     const torch::Tensor& trunk) {
  return gl->forward(c, trunk);
}

torch::Tensor GeneratorImpl::predict_grade(const torch::Tensor& c) {
  auto feats = encoder->forward(c);
  auto h = torch::relu(grade_conv->forward(feats.bottleneck));
  auto pooled = torch::adaptive_avg_pool2d(h, {1, 1}).flatten(1);
  return grade_fc->forward(pooled);
}

GeneratedPair GeneratorImpl::forward(const torch::Tensor& c,
                                     const StyleSet& styles,
                                     torch::Generator& gen, bool run_gl) {
  auto feats = encoder->forward(c);
  auto mid = synthesize_mid(c, feats, styles, gen);
  GeneratedPair out;
  out.mid = mid.mid;
  if (run_gl) {
    out.full = gl->forward(c, mid.trunk);
  } else {
    // Preview path while G_l is frozen: plain nearest upsample.
    out.full = torch::nn::functional::interpolate(
        mid.mid, torch::nn::functional::InterpolateFuncOptions()
                     .scale_factor(std::vector<double>{2.0, 2.0})
                     .mode(torch::kNearest));
  }
  auto h = torch::relu(grade_conv->forward(feats.bottleneck));
  out.grade_logits = grade_fc->forward(torch::adaptive_avg_pool2d(h, {1, 1}).flatten(1));
  return out;
}

}  // namespace drgan::gen
