#pragma once

#include <torch/torch.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "drgan/common.hpp"

namespace drgan::data {

// Fixed channel order of the 8-channel condition map.
enum Channel : int64_t {
  kVessel = 0,
  kOpticDisk = 1,
  kMicroaneurysm = 2,
  kHemorrhage = 3,
  kHardExudate = 4,
  kSoftExudate = 5,
  kLaserMark = 6,
  kMembrane = 7,
};

inline constexpr int64_t kLesionChannels = 6;
inline constexpr int64_t kConditionChannels = 8;
inline constexpr int64_t kNumGrades = 5;

// Mask file names, in condition-channel order starting at kMicroaneurysm.
inline constexpr std::array<const char*, kLesionChannels> kLesionFiles = {
    "ma.png", "he.png", "ex.png", "se.png", "laser.png", "membrane.png"};

struct StructuralMask {
  torch::Tensor vessel;      // H×W float in {0,1}
  torch::Tensor optic_disk;  // H×W float in {0,1}
};

struct LesionMask {
  // 6×H×W float in [0,1], ordered MA, HE, EX, SE, laser mark, membrane.
  // Laser/membrane channels stay soft-valued, the rest are binary.
  torch::Tensor channels;
};

struct Sample {
  std::string id;
  torch::Tensor condition;  // 8×H×W float
  torch::Tensor image;      // 3×H×W float in [0,1]
  int64_t grade = 0;
};

struct Dataset {
  std::vector<Sample> samples;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  std::array<int64_t, kNumGrades> counts_per_grade() const;
  int64_t resolution() const;  // spatial side of the first sample, 0 if empty
};

// Per-grade lesion count policy for the toy generator. Count ranges are
// inclusive and drawn uniformly. Grade 3 requires at least one of
// {soft exudate, laser mark}; grade 4 always adds a proliferate membrane.
struct LesionPolicy {
  struct Range {
    int lo = 0;
    int hi = 0;
  };
  Range microaneurysm, hemorrhage, hard_exudate, soft_exudate, laser, membrane;
};

const std::array<LesionPolicy, kNumGrades>& lesion_policy_table();

// Centered field-of-view disc of radius 0.48*min(H,W). Pixels outside are
// forced black in rendered images and masks.
torch::Tensor fov_mask(int64_t height, int64_t width);

// Deterministic toy sample for (seed, grade, resolution). Lesion counts
// follow lesion_policy_table(); the rendered image is a shaded fundus disc
// with vessels, a bright optic disk and per-lesion-type color stamps.
Sample generate_toy_sample(uint64_t seed, int64_t grade, int64_t resolution);

// Exactly counts_per_grade[g] samples per grade, ids unique, deterministic.
Dataset generate_corpus(uint64_t seed,
                        const std::array<int64_t, kNumGrades>& counts_per_grade,
                        int64_t resolution);

// EyePACS grade imbalance profile (73.67 / 6.95 / 14.87 / 2.35 / 2.16 %)
// scaled to `total` samples with largest-remainder rounding.
std::array<int64_t, kNumGrades> eyepacs_counts(int64_t total);

// Channel-wise concatenation (vessel, optic disk, 6 lesion channels).
torch::Tensor encode_condition(const StructuralMask& s, const LesionMask& l);
StructuralMask structural_slice(const torch::Tensor& condition);
LesionMask lesion_slice(const torch::Tensor& condition);

// Dataset directory layout: <root>/<id>/{image.png, vessel.png,
// optic_disk.png, ma.png, he.png, ex.png, se.png, laser.png, membrane.png,
// meta.json}. PNGs are 8-bit, masks grayscale.
void save_sample(const std::filesystem::path& root, const Sample& sample);
void save_dataset(const std::filesystem::path& root, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& root);

// Batch assembly helpers. Images are mapped to [-1,1] by the caller when fed
// to the GAN; these stack raw [0,1] tensors.
torch::Tensor stack_conditions(const Dataset& d, const std::vector<int64_t>& idx);
torch::Tensor stack_images(const Dataset& d, const std::vector<int64_t>& idx);
torch::Tensor stack_grades(const Dataset& d, const std::vector<int64_t>& idx);

}  // namespace drgan::data
