#pragma once

#include <torch/torch.h>

#include <array>
#include <filesystem>
#include <vector>

#include "drgan/common.hpp"
#include "drgan/data.hpp"
#include "drgan/generator.hpp"

namespace drgan::grading {

struct GraderConfig {
  int64_t feature_dim = 128;  // penultimate width F_d
  int64_t base_channels = 16;
  double lr = 1e-3;
  double beta1 = 0.5;  // ADAM first-moment decay ("momentum 0.5")
  int64_t batch = 64;
  int64_t epochs = 5;  // paper-scale value is 30; desk knob
  double holdout_fraction = 0.2;
  double accuracy_gate = 0.80;
  uint64_t seed = 0;
};

// Small convolutional 5-way classifier standing in for the paper-scale
// ResNet-50 backbone. features() taps the penultimate layer (GAP output).
class GradingBackboneImpl : public torch::nn::Module {
 public:
  GradingBackboneImpl(int64_t base_channels, int64_t feature_dim);
  torch::Tensor features(const torch::Tensor& images);  // N×F_d
  torch::Tensor forward(const torch::Tensor& images);   // N×5 logits

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr}, conv4{nullptr};
  torch::nn::BatchNorm2d bn1{nullptr}, bn2{nullptr}, bn3{nullptr}, bn4{nullptr};
  torch::nn::Linear fc{nullptr};
  int64_t feature_dim = 0;
};
TORCH_MODULE(GradingBackbone);

struct PretrainResult {
  GradingBackbone backbone{nullptr};
  double accuracy = 0;    // held-out accuracy
  bool gate_passed = false;  // accuracy >= accuracy_gate (warning gate, not an error)
};

// Supervised pretraining on (image, grade) pairs. Requires every grade to be
// present; emits a warning when held-out accuracy stays under the gate.
PretrainResult pretrain_grader(const data::Dataset& dataset, const GraderConfig& cfg);

struct GradeSpace {
  int64_t grade = 0;
  torch::Tensor mu;      // F_d
  torch::Tensor sigma2;  // F_d, diagonal covariance, >= 0
  int64_t n_samples = 0;
};

// Per-grade mean and diagonal variance of penultimate features (population
// estimator). Needs >= 2 samples per grade.
std::array<GradeSpace, data::kNumGrades> fit_grading_spaces(
    GradingBackbone& backbone, const data::Dataset& dataset, int64_t batch = 64);

// z = mu + sqrt(sigma2) ⊙ n with n standard normal.
torch::Tensor sample_grade_vector(const GradeSpace& space, torch::Generator& gen);

void save_grade_spaces(const std::filesystem::path& path,
                       const std::array<GradeSpace, data::kNumGrades>& spaces);
std::array<GradeSpace, data::kNumGrades> load_grade_spaces(
    const std::filesystem::path& path);

// Four affine layers with LeakyReLU(0.2) between them; maps a grading vector
// to the concatenated per-block style parameters.
class MappingNetworkImpl : public torch::nn::Module {
 public:
  MappingNetworkImpl(int64_t in_dim, int64_t out_dim, int64_t hidden = 0);
  torch::Tensor forward(const torch::Tensor& z);

  torch::nn::Linear fc1{nullptr}, fc2{nullptr}, fc3{nullptr}, fc4{nullptr};
  int64_t out_dim = 0;
};
TORCH_MODULE(MappingNetwork);

// Deterministic split of a raw style vector into per-block (gamma, beta).
// gamma carries a +1 offset so a zero network output is the identity AdaIN.
gen::StyleSet split_styles(const torch::Tensor& raw,
                           const std::vector<int64_t>& block_widths);

gen::StyleSet map_to_styles(const torch::Tensor& z, MappingNetwork& net,
                            const std::vector<int64_t>& block_widths);

}  // namespace drgan::grading
