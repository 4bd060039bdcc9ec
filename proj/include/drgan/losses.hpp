#pragma once

#include <torch/torch.h>

#include <array>
#include <vector>

#include "drgan/common.hpp"
#include "drgan/discriminator.hpp"

namespace drgan::loss {

struct LossWeights {
  double lambda_feat = 10.0;        // feature matching
  double lambda_perceptual = 10.0;  // perceptual
  double lambda_cls = 1.0;          // grade classification
};

struct AblationFlags {
  bool no_lesion_masks = false;
  bool no_agm = false;
  bool no_perceptual = false;
  bool no_cls = false;
  bool no_sca = false;
};

struct LossReport {
  double adv_d = 0, adv_g = 0;
  double feat_match = 0, perceptual = 0;
  double cls_real = 0, cls_fake = 0;
  double total_g = 0, total_d = 0;
};

struct AdvPair {
  torch::Tensor adv_d;
  torch::Tensor adv_g;
};

// Non-saturating logistic terms, summed over scales, mean over batch:
//   adv_d = sum_n E[softplus(-rf_real)] + E[softplus(rf_fake)]
//   adv_g = sum_n E[softplus(-rf_fake)]
// which are the negated log-likelihood forms of Eq.-style log D / log(1-D).
AdvPair adversarial_terms(const std::vector<disc::DiscOutput>& d_real,
                          const std::vector<disc::DiscOutput>& d_fake);

// Sum over scales, mean over layers, mean over batch of the per-sample L2
// norm of the feature difference. Real features are detached, so gradients
// reach the generator only.
torch::Tensor feature_matching(const std::vector<disc::DiscOutput>& d_real,
                               const std::vector<disc::DiscOutput>& d_fake);

// Fixed random conv stack standing in for the paper-scale VGG-19 extractor.
// Parameters are frozen; n_layers = 0 taps the identity (raw pixels), which
// is also handy in tests.
class PerceptualNetImpl : public torch::nn::Module {
 public:
  explicit PerceptualNetImpl(int64_t n_layers = 3, int64_t base_channels = 8,
                             uint64_t seed = 0x9e11);
  std::vector<torch::Tensor> taps(const torch::Tensor& x);

  std::vector<torch::nn::Conv2d> convs;
};
TORCH_MODULE(PerceptualNet);

// Mean over layers of mean absolute difference between tapped features.
torch::Tensor perceptual(const torch::Tensor& x_real, const torch::Tensor& x_fake,
                         PerceptualNet& net);

// Mean over the batch of -alpha_y * (1 - p_y)^gamma_f * log p_y. alpha may be
// empty (all ones) or a 5-vector of per-class weights.
torch::Tensor focal(const torch::Tensor& logits, const torch::Tensor& targets,
                    double gamma_f = 2.0, const torch::Tensor& alpha = {});

// Inverse-frequency class weights, normalized to mean 1.
torch::Tensor class_balanced_alpha(const std::array<int64_t, 5>& counts);

struct TotalPair {
  torch::Tensor total_g;
  torch::Tensor total_d;
};

// Eq.-shaped combination: the generator objective excludes the grade
// classification terms (they sit under the discriminator min only) and the
// discriminator objective excludes feature matching and perceptual terms.
TotalPair total(const torch::Tensor& adv_g, const torch::Tensor& adv_d,
                const torch::Tensor& feat_match, const torch::Tensor& perceptual,
                const torch::Tensor& cls_real, const torch::Tensor& cls_fake,
                const LossWeights& w, const AblationFlags& flags);

}  // namespace drgan::loss
