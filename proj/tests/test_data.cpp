#include "doctest_torch.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "drgan/data.hpp"

using namespace drgan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("drgan_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("grade 0 has no lesions") {
  auto s = data::generate_toy_sample(0, 0, 64);
  CHECK(data::lesion_slice(s.condition).channels.abs().sum().item<float>() == 0.0f);
}

TEST_CASE("grade 4 includes a proliferate membrane region") {
  auto s = data::generate_toy_sample(7, 4, 64);
  CHECK(s.condition[data::kMembrane].gt(0).sum().item<int64_t>() > 0);
}

TEST_CASE("generation is byte-deterministic") {
  auto a = data::generate_toy_sample(3, 2, 64);
  auto b = data::generate_toy_sample(3, 2, 64);
  CHECK(torch::equal(a.condition, b.condition));
  CHECK(torch::equal(a.image, b.image));
  CHECK(a.id == b.id);
}

TEST_CASE("invalid arguments are rejected") {
  CHECK_THROWS_AS(data::generate_toy_sample(0, 0, 60), ConfigError);
  CHECK_THROWS_AS(data::generate_toy_sample(0, 5, 64), ValidationError);
  CHECK_THROWS_AS(data::generate_toy_sample(0, -1, 64), ValidationError);
}

TEST_CASE("policy: lesion channels obey the per-grade table") {
  for (uint64_t seed = 0; seed < 8; ++seed) {
    for (int64_t grade = 0; grade < 5; ++grade) {
      auto s = data::generate_toy_sample(seed, grade, 64);
      auto has = [&](int64_t ch) {
        return s.condition[ch].gt(0).any().item<bool>();
      };
      if (grade == 0) {
        for (int64_t ch = data::kMicroaneurysm; ch < 8; ++ch) CHECK(!has(ch));
      }
      if (grade >= 1) CHECK(has(data::kMicroaneurysm));
      if (grade >= 2) CHECK(has(data::kHemorrhage));
      if (grade < 2) {
        CHECK(!has(data::kHemorrhage));
        CHECK(!has(data::kHardExudate));
      }
      if (grade >= 3) CHECK((has(data::kSoftExudate) || has(data::kLaserMark)));
      if (grade < 3) {
        CHECK(!has(data::kSoftExudate));
        CHECK(!has(data::kLaserMark));
      }
      if (grade == 4) CHECK(has(data::kMembrane));
      if (grade < 4) CHECK(!has(data::kMembrane));
    }
  }
}

TEST_CASE("policy: expected lesion mass is non-decreasing in grade") {
  std::array<double, 5> mean_pixels{};
  for (int64_t grade = 0; grade < 5; ++grade) {
    double total = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
      auto s = data::generate_toy_sample(seed, grade, 64);
      total += data::lesion_slice(s.condition).channels.gt(0).sum().item<int64_t>();
    }
    mean_pixels[static_cast<size_t>(grade)] = total / 100.0;
  }
  for (int64_t g = 1; g < 5; ++g)
    CHECK(mean_pixels[static_cast<size_t>(g)] >=
          mean_pixels[static_cast<size_t>(g - 1)]);
}

TEST_CASE("lesions and vessels stay inside the field of view") {
  auto fov = data::fov_mask(64, 64);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto s = data::generate_toy_sample(seed, 4, 64);
    auto outside = (1.0f - fov).unsqueeze(0) * s.condition;
    CHECK(outside.abs().sum().item<float>() == 0.0f);
    // Rendered image is black outside the disc.
    CHECK(((1.0f - fov).unsqueeze(0) * s.image).abs().sum().item<float>() == 0.0f);
  }
}

TEST_CASE("structural mask invariants hold") {
  auto fov = data::fov_mask(64, 64);
  const double fov_area = fov.sum().item<float>();
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto s = data::generate_toy_sample(seed, 1, 64);
    auto sm = data::structural_slice(s.condition);
    const double cover = sm.vessel.sum().item<float>() / fov_area;
    CHECK(cover > 0.005);
    CHECK(cover < 0.15);
    CHECK(sm.optic_disk.sum().item<float>() > 0.0f);
    // Binary-valued rasters.
    CHECK(torch::logical_or(sm.vessel.eq(0), sm.vessel.eq(1)).all().item<bool>());
    CHECK(torch::logical_or(sm.optic_disk.eq(0), sm.optic_disk.eq(1)).all().item<bool>());
  }
}

TEST_CASE("corpus bookkeeping") {
  auto d = data::generate_corpus(1, {10, 10, 10, 10, 10}, 64);
  CHECK(d.size() == 50);
  auto counts = d.counts_per_grade();
  for (auto c : counts) CHECK(c == 10);
  std::set<std::string> ids;
  for (const auto& s : d.samples) ids.insert(s.id);
  CHECK(ids.size() == 50);

  auto single = data::generate_corpus(1, {0, 0, 0, 0, 1}, 64);
  CHECK(single.size() == 1);
  CHECK(single.samples[0].grade == 4);
}

TEST_CASE("eyepacs imbalance profile scales to 1000") {
  auto counts = data::eyepacs_counts(1000);
  CHECK(counts[0] == 737);
  CHECK(counts[4] == 22);
  int64_t total = 0;
  for (auto c : counts) total += c;
  CHECK(total == 1000);
}

TEST_CASE("encode_condition is a channel-exact bijection") {
  auto zero = torch::zeros({16, 16});
  auto zl = torch::zeros({6, 16, 16});
  auto all_zero = data::encode_condition({zero, zero}, {zl});
  CHECK(all_zero.abs().sum().item<float>() == 0.0f);
  CHECK(all_zero.size(0) == data::kConditionChannels);

  auto vessel_only = data::encode_condition({torch::ones({16, 16}), zero}, {zl});
  CHECK(vessel_only[0].min().item<float>() == 1.0f);
  CHECK(vessel_only.slice(0, 1, 8).abs().sum().item<float>() == 0.0f);

  torch::manual_seed(0);
  auto v = torch::rand({16, 16});
  auto o = torch::rand({16, 16});
  auto l = torch::rand({6, 16, 16});
  auto c = data::encode_condition({v, o}, {l});
  CHECK(torch::equal(c[0], v));
  CHECK(torch::equal(c[1], o));
  for (int64_t k = 0; k < 6; ++k) CHECK(torch::equal(c[k + 2], l[k]));
  // Slicing recovers the inputs exactly.
  auto sm = data::structural_slice(c);
  auto lm = data::lesion_slice(c);
  CHECK(torch::equal(sm.vessel, v));
  CHECK(torch::equal(sm.optic_disk, o));
  CHECK(torch::equal(lm.channels, l));

  CHECK_THROWS_AS(data::encode_condition({v, torch::rand({8, 8})}, {l}),
                  ValidationError);
}

TEST_CASE("dataset round trip through the directory layout") {
  auto root = temp_dir("roundtrip");
  auto d = data::generate_corpus(5, {1, 0, 1, 0, 1}, 64);
  data::save_dataset(root, d);
  auto loaded = data::load_dataset(root);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded.samples[0].grade == d.samples[0].grade);
  CHECK(loaded.samples[0].condition.sizes() == d.samples[0].condition.sizes());
  // 8-bit quantization bounds the reload error.
  CHECK((loaded.samples[0].image - d.samples[0].image).abs().max().item<float>() <
        1.0f / 255.0f + 1e-5f);
  fs::remove_all(root);
}

TEST_CASE("missing mask file names the sample id") {
  auto root = temp_dir("missing");
  auto d = data::generate_corpus(6, {2, 0, 0, 0, 0}, 64);
  data::save_dataset(root, d);
  fs::remove(root / d.samples[1].id / "optic_disk.png");
  try {
    data::load_dataset(root);
    FAIL("expected IngestionError");
  } catch (const IngestionError& e) {
    CHECK(std::string(e.what()).find(d.samples[1].id) != std::string::npos);
    CHECK(std::string(e.what()).find("optic_disk.png") != std::string::npos);
  }
  fs::remove_all(root);
}

TEST_CASE("empty dataset directory loads as empty with a warning") {
  auto root = temp_dir("empty");
  auto d = data::load_dataset(root);
  CHECK(d.size() == 0);
  fs::remove_all(root);
  CHECK_THROWS_AS(data::load_dataset(root / "nope"), IngestionError);
}

TEST_SUITE_END();
