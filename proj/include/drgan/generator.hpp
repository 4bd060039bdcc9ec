#pragma once

#include <torch/torch.h>

#include <array>
#include <vector>

#include "drgan/attention.hpp"
#include "drgan/common.hpp"

namespace drgan::gen {

struct GeneratorConfig {
  int64_t full_resolution = 256;  // paper scale 1280 reachable via config
  int64_t base_channels = 16;
  int64_t n_residual_blocks = 7;
  std::array<int64_t, 3> sca_reductions{8, 16, 32};
  double noise_fraction = 0.25;  // noise volume channels = C/4
  bool use_sca = true;           // off for the "w/o SCA" ablation
  bool use_agm = true;           // off for the "w/o AGM" ablation

  void validate() const;
  // Encoder pyramid widths at R/2, R/4, R/8, R/16.
  std::array<int64_t, 4> encoder_widths() const;
  // AGM style widths: three synthesis blocks then the output head.
  std::array<int64_t, 4> style_widths() const;
  int64_t style_dim() const;  // sum of 2*C_b over styled blocks
};

// Per-block AdaIN modulation parameters (each C_b or N×C_b).
struct Style {
  torch::Tensor gamma;
  torch::Tensor beta;
};
using StyleSet = std::vector<Style>;

// AdaIN (per-sample, per-channel instance statistics):
//   y = gamma * (x - mu(x)) / sigma(x) + beta
// with sigma floored at eps (sigma_eff = sqrt(var + eps^2)); a constant
// channel therefore maps to the constant beta.
torch::Tensor adain(const torch::Tensor& x, const torch::Tensor& gamma,
                    const torch::Tensor& beta, double eps = 1e-5);

struct EncoderFeatures {
  std::vector<torch::Tensor> levels;  // 4 tensors at R/2 .. R/16
  torch::Tensor bottleneck;           // R/16, after one more stride-1 conv
};

class EncoderImpl : public torch::nn::Module {
 public:
  explicit EncoderImpl(const GeneratorConfig& cfg);
  EncoderFeatures forward(const torch::Tensor& c);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr}, conv4{nullptr};
  torch::nn::Conv2d bottleneck_conv{nullptr};
  torch::nn::BatchNorm2d bn1{nullptr}, bn2{nullptr}, bn3{nullptr}, bn4{nullptr};
  torch::nn::BatchNorm2d bottleneck_bn{nullptr};

 private:
  int64_t expect_resolution_;
};
TORCH_MODULE(Encoder);

class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);  // x + F(x)

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::BatchNorm2d bn1{nullptr}, bn2{nullptr};
};
TORCH_MODULE(ResidualBlock);

class ResidualStackImpl : public torch::nn::Module {
 public:
  ResidualStackImpl(int64_t channels, int64_t n_blocks);
  torch::Tensor forward(const torch::Tensor& x);
  std::vector<ResidualBlock> blocks;
};
TORCH_MODULE(ResidualStack);

// Adaptive grading manipulation: concatenate a standard-normal noise volume
// (channels = noise_fraction * C, at least one), fuse with a 1x1 conv, then
// AdaIN with the injected style. With use_agm=false it degrades to instance
// normalization with a learnable per-channel affine ("w/o AGM" ablation).
class AgmInjectorImpl : public torch::nn::Module {
 public:
  AgmInjectorImpl(int64_t channels, double noise_fraction, bool use_agm);
  torch::Tensor forward(const torch::Tensor& x, const Style& style,
                        torch::Generator& gen);

  torch::nn::Conv2d fuse{nullptr};
  torch::nn::InstanceNorm2d fallback_norm{nullptr};
  int64_t channels = 0;
  int64_t noise_channels = 0;
  bool use_agm = true;
};
TORCH_MODULE(AgmInjector);

// One synthesis block: AGM injection, concat with the encoder skip and the
// resized condition map, fuse conv, residual SCA, transposed-conv upsample.
class SynthesisBlockImpl : public torch::nn::Module {
 public:
  SynthesisBlockImpl(int64_t width, int64_t skip_width, int64_t out_width,
                     int64_t sca_reduction, double noise_fraction, bool use_sca,
                     bool use_agm);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& skip,
                        const torch::Tensor& cond, const Style& style,
                        torch::Generator& gen);

  AgmInjector agm{nullptr};
  torch::nn::Conv2d fuse{nullptr};
  torch::nn::BatchNorm2d fuse_bn{nullptr};
  attention::Sca sca{nullptr};
  torch::nn::ConvTranspose2d up{nullptr};
  torch::nn::BatchNorm2d up_bn{nullptr};
  bool use_sca = true;
};
TORCH_MODULE(SynthesisBlock);

// Local enhancer G_l: two convs on the full-resolution condition map, an
// additive fusion with G_m's trunk features, and two transposed convs that
// emit the full-resolution image.
class GlImpl : public torch::nn::Module {
 public:
  explicit GlImpl(const GeneratorConfig& cfg);
  torch::Tensor forward(const torch::Tensor& c, const torch::Tensor& trunk);
  torch::Tensor head_forward(const torch::Tensor& fused);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr};
  torch::nn::ConvTranspose2d tconv1{nullptr}, tconv2{nullptr};
  torch::nn::BatchNorm2d bn1{nullptr}, bn2{nullptr}, bn3{nullptr};
};
TORCH_MODULE(Gl);

struct GeneratedPair {
  torch::Tensor mid;           // N×3×(R/2)×(R/2), tanh range
  torch::Tensor full;          // N×3×R×R
  torch::Tensor grade_logits;  // N×5
};

class GeneratorImpl : public torch::nn::Module {
 public:
  explicit GeneratorImpl(GeneratorConfig cfg);

  EncoderFeatures encode(const torch::Tensor& c);
  torch::Tensor residual_stack(const torch::Tensor& bottleneck);

  struct MidResult {
    torch::Tensor mid;    // R/2 image
    torch::Tensor trunk;  // features after the last transposed conv, for G_l
  };
  MidResult synthesize_mid(const torch::Tensor& c, const EncoderFeatures& feats,
                           const StyleSet& styles, torch::Generator& gen);
  // Requires trunk features captured from a prior G_m forward.
  torch::Tensor enhance(const torch::Tensor& c, const torch::Tensor& trunk);
  // Grade head over the last encoding block (extra conv + GAP + linear).
  torch::Tensor predict_grade(const torch::Tensor& c);

  // Full pipeline. With run_gl=false the full image is the nearest-upsampled
  // mid image (stage-1 preview path).
  GeneratedPair forward(const torch::Tensor& c, const StyleSet& styles,
                        torch::Generator& gen, bool run_gl = true);

  const GeneratorConfig& config() const { return cfg_; }

  Encoder encoder{nullptr};
  ResidualStack residuals{nullptr};
  std::vector<SynthesisBlock> blocks;
  AgmInjector head_agm{nullptr};
  torch::nn::Conv2d head_conv{nullptr};
  Gl gl{nullptr};
  torch::nn::Conv2d grade_conv{nullptr};
  torch::nn::Linear grade_fc{nullptr};

 private:
  GeneratorConfig cfg_;
};
TORCH_MODULE(Generator);

}  // namespace drgan::gen
