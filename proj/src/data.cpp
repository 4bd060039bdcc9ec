#include "drgan/data.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include <nlohmann/json.hpp>

namespace drgan::data {

namespace {

double urand(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * ((rng() >> 11) * (1.0 / 9007199254740992.0));
}

int irand(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

// Deterministic per-pixel value noise in [0,1).
double hash_noise(uint64_t s, int64_t x, int64_t y) {
  uint64_t h = mix64(s ^ (static_cast<uint64_t>(x) * 0x9E3779B1ULL),
                     static_cast<uint64_t>(y));
  return (h >> 11) * (1.0 / 9007199254740992.0);
}

struct Vec2 {
  double x = 0, y = 0;
};

void stamp_disc(torch::TensorAccessor<float, 2> m, int64_t h, int64_t w,
                double cx, double cy, double r, float value) {
  const int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(cy - r - 1)));
  const int64_t y1 = std::min<int64_t>(h - 1, static_cast<int64_t>(std::ceil(cy + r + 1)));
  const int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(cx - r - 1)));
  const int64_t x1 = std::min<int64_t>(w - 1, static_cast<int64_t>(std::ceil(cx + r + 1)));
  const double r2 = r * r;
  for (int64_t y = y0; y <= y1; ++y) {
    for (int64_t x = x0; x <= x1; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r2) m[y][x] = std::max(m[y][x], value);
    }
  }
}

// Gaussian falloff stamp, support limited to radius r.
void stamp_soft(torch::TensorAccessor<float, 2> m, int64_t h, int64_t w,
                double cx, double cy, double r, float peak) {
  const int64_t y0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(cy - r - 1)));
  const int64_t y1 = std::min<int64_t>(h - 1, static_cast<int64_t>(std::ceil(cy + r + 1)));
  const int64_t x0 = std::max<int64_t>(0, static_cast<int64_t>(std::floor(cx - r - 1)));
  const int64_t x1 = std::min<int64_t>(w - 1, static_cast<int64_t>(std::ceil(cx + r + 1)));
  const double r2 = r * r;
  for (int64_t y = y0; y <= y1; ++y) {
    for (int64_t x = x0; x <= x1; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double d2 = dx * dx + dy * dy;
      if (d2 <= r2) {
        const float v = peak * static_cast<float>(std::exp(-2.5 * d2 / r2));
        m[y][x] = std::max(m[y][x], v);
      }
    }
  }
}

void draw_bezier(torch::TensorAccessor<float, 2> m, int64_t h, int64_t w,
                 Vec2 p0, Vec2 p1, Vec2 p2, double w0, double w1) {
  const double approx_len = std::hypot(p1.x - p0.x, p1.y - p0.y) +
                            std::hypot(p2.x - p1.x, p2.y - p1.y);
  const int steps = std::max(8, static_cast<int>(2.0 * approx_len));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const double u = 1.0 - t;
    const double qx = u * u * p0.x + 2 * u * t * p1.x + t * t * p2.x;
    const double qy = u * u * p0.y + 2 * u * t * p1.y + t * t * p2.y;
    const double radius = std::max(0.5, 0.5 * (w0 + (w1 - w0) * t));
    stamp_disc(m, h, w, qx, qy, radius, 1.0f);
  }
}

Vec2 random_fov_point(std::mt19937_64& rng, double cx, double cy, double fovr,
                      double margin) {
  for (;;) {
    const double x = urand(rng, -1.0, 1.0);
    const double y = urand(rng, -1.0, 1.0);
    if (x * x + y * y <= margin * margin)
      return {cx + fovr * x, cy + fovr * y};
  }
}

void blend(torch::TensorAccessor<float, 3> img, int64_t h, int64_t w,
           torch::TensorAccessor<float, 2> mask, float r, float g, float b,
           float alpha_scale) {
  for (int64_t y = 0; y < h; ++y) {
    for (int64_t x = 0; x < w; ++x) {
      const float a = alpha_scale * mask[y][x];
      if (a <= 0.0f) continue;
      img[0][y][x] = (1 - a) * img[0][y][x] + a * r;
      img[1][y][x] = (1 - a) * img[1][y][x] + a * g;
      img[2][y][x] = (1 - a) * img[2][y][x] + a * b;
    }
  }
}

void write_gray_png(const std::filesystem::path& path, const torch::Tensor& m) {
  auto t = (m.clamp(0, 1) * 255.0f).round().to(torch::kU8).contiguous();
  cv::Mat mat(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)), CV_8UC1,
              t.data_ptr<uint8_t>());
  if (!cv::imwrite(path.string(), mat))
    throw IngestionError("failed to write " + path.string());
}

void write_color_png(const std::filesystem::path& path, const torch::Tensor& img) {
  // imwrite expects BGR; flip the RGB channel axis before layout change.
  auto hwc = (img.clamp(0, 1) * 255.0f).round().to(torch::kU8)
                 .flip(0).permute({1, 2, 0}).contiguous();
  cv::Mat bgr(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC3,
              hwc.data_ptr<uint8_t>());
  if (!cv::imwrite(path.string(), bgr))
    throw IngestionError("failed to write " + path.string());
}

torch::Tensor read_gray_png(const std::filesystem::path& path) {
  cv::Mat mat = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (mat.empty()) throw IngestionError("failed to read " + path.string());
  auto t = torch::from_blob(mat.data, {mat.rows, mat.cols}, torch::kU8);
  return t.to(torch::kFloat32).div(255.0f).clone();
}

torch::Tensor read_color_png(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IngestionError("failed to read " + path.string());
  auto t = torch::from_blob(bgr.data, {bgr.rows, bgr.cols, 3}, torch::kU8);
  return t.to(torch::kFloat32).div(255.0f).permute({2, 0, 1}).flip(0).clone();
}

}  // namespace

std::array<int64_t, kNumGrades> Dataset::counts_per_grade() const {
  std::array<int64_t, kNumGrades> counts{};
  for (const auto& s : samples) counts[static_cast<size_t>(s.grade)]++;
  return counts;
}

int64_t Dataset::resolution() const {
  return samples.empty() ? 0 : samples.front().image.size(1);
}

const std::array<LesionPolicy, kNumGrades>& lesion_policy_table() {
  // Counts chosen so expected lesion pixel mass grows with grade and a small
  // classifier can separate grades on rendered images.
  static const std::array<LesionPolicy, kNumGrades> table = {{
      /* grade 0 */ {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
      /* grade 1 */ {{1, 5}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
      /* grade 2 */ {{1, 5}, {1, 4}, {0, 3}, {0, 0}, {0, 0}, {0, 0}},
      /* grade 3 */ {{1, 5}, {1, 4}, {0, 3}, {0, 2}, {0, 1}, {0, 0}},
      /* grade 4 */ {{1, 5}, {1, 4}, {0, 3}, {0, 2}, {0, 1}, {1, 2}},
  }};
  return table;
}

torch::Tensor fov_mask(int64_t height, int64_t width) {
  auto mask = torch::zeros({height, width});
  auto acc = mask.accessor<float, 2>();
  const double cy = (height - 1) / 2.0, cx = (width - 1) / 2.0;
  const double r = 0.48 * std::min(height, width);
  const double r2 = r * r;
  for (int64_t y = 0; y < height; ++y)
    for (int64_t x = 0; x < width; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r2) acc[y][x] = 1.0f;
  return mask;
}

Sample generate_toy_sample(uint64_t seed, int64_t grade, int64_t resolution) {
  if (resolution != 64 && resolution != 128 && resolution != 256)
    throw ConfigError("toy resolution must be one of {64,128,256}, got " +
                      std::to_string(resolution));
  if (grade < 0 || grade >= kNumGrades)
    throw ValidationError("grade out of range: " + std::to_string(grade));

  const int64_t R = resolution;
  const double scale = R / 64.0;
  std::mt19937_64 rng(mix64(seed, static_cast<uint64_t>(grade),
                            static_cast<uint64_t>(resolution)));

  auto vessel = torch::zeros({R, R});
  auto disk = torch::zeros({R, R});
  auto lesions = torch::zeros({kLesionChannels, R, R});
  auto image = torch::zeros({3, R, R});
  auto fovm = fov_mask(R, R);

  auto vessel_acc = vessel.accessor<float, 2>();
  auto disk_acc = disk.accessor<float, 2>();
  auto fov_acc = fovm.accessor<float, 2>();

  const double cy = (R - 1) / 2.0, cx = (R - 1) / 2.0;
  const double fovr = 0.48 * R;
  const double fov_area = fovm.sum().item<float>();

  // Optic disk: one filled disc offset to a nasal side.
  const bool left = (rng() & 1) != 0;
  const double theta = (left ? M_PI : 0.0) + urand(rng, -0.35, 0.35);
  const double dist = urand(rng, 0.50, 0.62) * fovr;
  const double ox = cx + dist * std::cos(theta);
  const double oy = cy + 0.6 * dist * std::sin(theta);
  const double disk_r = urand(rng, 0.10, 0.14) * fovr;
  stamp_disc(disk_acc, R, R, ox, oy, disk_r, 1.0f);

  // Vessels: quadratic splines fanning out from the optic disk until a target
  // coverage in (0.5%, 15%) of the field of view is reached.
  const double target_cov = urand(rng, 0.018, 0.05) * fov_area;
  int branches = 0;
  while (branches < 40) {
    const double ang = urand(rng, 0.0, 2.0 * M_PI);
    const double len = urand(rng, 0.8, 1.3) * fovr;
    Vec2 p0{ox, oy};
    Vec2 p2{ox + len * std::cos(ang), oy + len * std::sin(ang)};
    // Pull endpoints that left the field of view back inside.
    const double d2c = std::hypot(p2.x - cx, p2.y - cy);
    if (d2c > 0.95 * fovr) {
      p2.x = cx + (p2.x - cx) * 0.95 * fovr / d2c;
      p2.y = cy + (p2.y - cy) * 0.95 * fovr / d2c;
    }
    Vec2 mid{(p0.x + p2.x) / 2, (p0.y + p2.y) / 2};
    const double nx = -(p2.y - p0.y), ny = p2.x - p0.x;
    const double bend = urand(rng, -0.22, 0.22);
    Vec2 p1{mid.x + bend * nx, mid.y + bend * ny};
    const double w0 = urand(rng, 1.2, 1.9) * scale;
    const double w1 = 0.55 * scale;
    draw_bezier(vessel_acc, R, R, p0, p1, p2, w0, w1);
    if (branches % 2 == 1) {
      const double t = urand(rng, 0.3, 0.7);
      const double u = 1.0 - t;
      Vec2 q{u * u * p0.x + 2 * u * t * p1.x + t * t * p2.x,
             u * u * p0.y + 2 * u * t * p1.y + t * t * p2.y};
      const double sang = ang + urand(rng, -1.2, 1.2);
      const double slen = urand(rng, 0.25, 0.5) * fovr;
      Vec2 s2{q.x + slen * std::cos(sang), q.y + slen * std::sin(sang)};
      Vec2 s1{(q.x + s2.x) / 2 + urand(rng, -4, 4) * scale,
              (q.y + s2.y) / 2 + urand(rng, -4, 4) * scale};
      draw_bezier(vessel_acc, R, R, q, s1, s2, 0.8 * w0, w1);
    }
    ++branches;
    if ((vessel * fovm).sum().item<float>() >= target_cov) break;
  }
  vessel.mul_(fovm);
  disk.mul_(fovm);

  // Lesions per the policy table.
  const LesionPolicy& policy = lesion_policy_table()[static_cast<size_t>(grade)];
  auto count = [&](const LesionPolicy::Range& r) {
    return r.hi <= 0 ? 0 : irand(rng, r.lo, r.hi);
  };
  int n_ma = count(policy.microaneurysm);
  int n_he = count(policy.hemorrhage);
  int n_ex = count(policy.hard_exudate);
  int n_se = count(policy.soft_exudate);
  int n_laser = count(policy.laser);
  int n_mem = count(policy.membrane);
  if (grade == 3 || grade == 4) {
    if (n_se == 0 && n_laser == 0) n_se = 1;  // grade 3+ requires SE and/or laser
  }

  auto ma_view = lesions[kMicroaneurysm - 2];
  auto he_view = lesions[kHemorrhage - 2];
  auto ex_view = lesions[kHardExudate - 2];
  auto se_view = lesions[kSoftExudate - 2];
  auto laser_view = lesions[kLaserMark - 2];
  auto mem_view = lesions[kMembrane - 2];
  auto ma_acc = ma_view.accessor<float, 2>();
  auto he_acc = he_view.accessor<float, 2>();
  auto ex_acc = ex_view.accessor<float, 2>();
  auto se_acc = se_view.accessor<float, 2>();
  auto laser_acc = laser_view.accessor<float, 2>();
  auto mem_acc = mem_view.accessor<float, 2>();

  for (int i = 0; i < n_ma; ++i) {
    Vec2 p = random_fov_point(rng, cx, cy, fovr, 0.85);
    stamp_disc(ma_acc, R, R, p.x, p.y, std::max(1.0, 1.2 * scale), 1.0f);
  }
  for (int i = 0; i < n_he; ++i) {
    Vec2 p = random_fov_point(rng, cx, cy, fovr, 0.82);
    stamp_disc(he_acc, R, R, p.x, p.y, urand(rng, 1.8, 3.6) * scale, 1.0f);
  }
  for (int i = 0; i < n_ex; ++i) {
    Vec2 p = random_fov_point(rng, cx, cy, fovr, 0.80);
    const int dots = irand(rng, 2, 4);
    for (int j = 0; j < dots; ++j) {
      stamp_disc(ex_acc, R, R, p.x + urand(rng, -3, 3) * scale,
                 p.y + urand(rng, -3, 3) * scale, urand(rng, 1.0, 2.0) * scale,
                 1.0f);
    }
  }
  for (int i = 0; i < n_se; ++i) {
    Vec2 p = random_fov_point(rng, cx, cy, fovr, 0.78);
    stamp_disc(se_acc, R, R, p.x, p.y, urand(rng, 2.5, 4.5) * scale, 1.0f);
  }
  if (n_laser > 0) {
    // Laser scars: a ring of soft stamps in a peripheral annulus.
    const int n_scars = irand(rng, 8, 14);
    const double ring_r = urand(rng, 0.55, 0.8) * fovr;
    const double phase = urand(rng, 0.0, 2.0 * M_PI);
    for (int i = 0; i < n_scars; ++i) {
      const double a = phase + 2.0 * M_PI * i / n_scars + urand(rng, -0.1, 0.1);
      stamp_soft(laser_acc, R, R, cx + ring_r * std::cos(a),
                 cy + ring_r * std::sin(a), urand(rng, 1.6, 2.4) * scale,
                 static_cast<float>(urand(rng, 0.55, 0.95)));
    }
  }
  for (int i = 0; i < n_mem; ++i) {
    Vec2 p = random_fov_point(rng, cx, cy, fovr, 0.55);
    stamp_soft(mem_acc, R, R, p.x, p.y, urand(rng, 5.0, 9.0) * scale,
               static_cast<float>(urand(rng, 0.6, 0.95)));
  }
  lesions.mul_(fovm.unsqueeze(0));

  // Render: shaded fundus base, vessels dark red, optic disk bright, then
  // per-lesion-type color stamps; outside the field of view stays black.
  const float tr = static_cast<float>(0.80 + urand(rng, -0.06, 0.06));
  const float tg = static_cast<float>(0.42 + urand(rng, -0.05, 0.05));
  const float tb = static_cast<float>(0.20 + urand(rng, -0.04, 0.04));
  const uint64_t noise_seed = mix64(seed, 0xF00Du, static_cast<uint64_t>(grade));
  auto img_acc = image.accessor<float, 3>();
  for (int64_t y = 0; y < R; ++y) {
    for (int64_t x = 0; x < R; ++x) {
      if (fov_acc[y][x] == 0.0f) continue;
      const double rr = std::hypot(x - cx, y - cy) / fovr;
      const float shade = static_cast<float>(1.0 - 0.30 * rr * rr);
      const float n = static_cast<float>((hash_noise(noise_seed, x, y) - 0.5) * 0.05);
      img_acc[0][y][x] = tr * shade + n;
      img_acc[1][y][x] = tg * shade + n;
      img_acc[2][y][x] = tb * shade + n;
    }
  }
  blend(img_acc, R, R, vessel_acc, 0.33f, 0.08f, 0.07f, 0.85f);
  blend(img_acc, R, R, disk_acc, 0.97f, 0.90f, 0.66f, 0.92f);
  blend(img_acc, R, R, ma_acc, 0.30f, 0.05f, 0.05f, 0.90f);
  blend(img_acc, R, R, he_acc, 0.42f, 0.05f, 0.04f, 0.90f);
  blend(img_acc, R, R, ex_acc, 0.98f, 0.90f, 0.33f, 0.95f);
  blend(img_acc, R, R, se_acc, 0.93f, 0.88f, 0.60f, 0.80f);
  blend(img_acc, R, R, laser_acc, 0.86f, 0.80f, 0.62f, 0.85f);
  blend(img_acc, R, R, mem_acc, 0.88f, 0.86f, 0.80f, 0.65f);
  image.mul_(fovm.unsqueeze(0)).clamp_(0, 1);

  Sample sample;
  sample.id = "toy-s" + std::to_string(seed) + "-g" + std::to_string(grade);
  sample.condition = encode_condition({vessel, disk}, {lesions});
  sample.image = image;
  sample.grade = grade;
  return sample;
}

Dataset generate_corpus(uint64_t seed,
                        const std::array<int64_t, kNumGrades>& counts_per_grade,
                        int64_t resolution) {
  Dataset dataset;
  for (int64_t g = 0; g < kNumGrades; ++g) {
    if (counts_per_grade[static_cast<size_t>(g)] < 0)
      throw ValidationError("negative per-grade count");
    for (int64_t i = 0; i < counts_per_grade[static_cast<size_t>(g)]; ++i) {
      const uint64_t sample_seed =
          mix64(seed, static_cast<uint64_t>(g), static_cast<uint64_t>(i));
      Sample s = generate_toy_sample(sample_seed, g, resolution);
      char buf[40];
      std::snprintf(buf, sizeof(buf), "g%ld-%05ld", static_cast<long>(g),
                    static_cast<long>(i));
      s.id = buf;
      dataset.samples.push_back(std::move(s));
    }
  }
  return dataset;
}

std::array<int64_t, kNumGrades> eyepacs_counts(int64_t total) {
  constexpr std::array<double, kNumGrades> pct = {73.67, 6.95, 14.87, 2.35, 2.16};
  std::array<int64_t, kNumGrades> counts{};
  std::array<double, kNumGrades> remainder{};
  int64_t assigned = 0;
  for (size_t g = 0; g < kNumGrades; ++g) {
    const double exact = pct[g] / 100.0 * static_cast<double>(total);
    counts[g] = static_cast<int64_t>(std::floor(exact));
    remainder[g] = exact - std::floor(exact);
    assigned += counts[g];
  }
  std::array<size_t, kNumGrades> order = {0, 1, 2, 3, 4};
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return remainder[a] > remainder[b]; });
  for (int64_t k = 0; k < total - assigned; ++k) counts[order[static_cast<size_t>(k)]]++;
  return counts;
}

torch::Tensor encode_condition(const StructuralMask& s, const LesionMask& l) {
  if (s.vessel.dim() != 2 || s.optic_disk.dim() != 2 || l.channels.dim() != 3 ||
      l.channels.size(0) != kLesionChannels)
    throw ValidationError("encode_condition: bad mask ranks");
  if (!s.vessel.sizes().equals(s.optic_disk.sizes()) ||
      s.vessel.size(0) != l.channels.size(1) ||
      s.vessel.size(1) != l.channels.size(2))
    throw ValidationError("encode_condition: spatial dims disagree");
  return torch::cat(
      {s.vessel.unsqueeze(0), s.optic_disk.unsqueeze(0), l.channels}, 0);
}

StructuralMask structural_slice(const torch::Tensor& condition) {
  return {condition[kVessel], condition[kOpticDisk]};
}

LesionMask lesion_slice(const torch::Tensor& condition) {
  return {condition.slice(0, kMicroaneurysm, kConditionChannels)};
}

void save_sample(const std::filesystem::path& root, const Sample& sample) {
  const auto dir = root / sample.id;
  std::filesystem::create_directories(dir);
  write_color_png(dir / "image.png", sample.image);
  write_gray_png(dir / "vessel.png", sample.condition[kVessel]);
  write_gray_png(dir / "optic_disk.png", sample.condition[kOpticDisk]);
  for (int64_t c = 0; c < kLesionChannels; ++c)
    write_gray_png(dir / kLesionFiles[static_cast<size_t>(c)],
                   sample.condition[kMicroaneurysm + c]);
  nlohmann::json meta;
  meta["grade"] = sample.grade;
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
}

void save_dataset(const std::filesystem::path& root, const Dataset& dataset) {
  std::filesystem::create_directories(root);
  for (const auto& s : dataset.samples) save_sample(root, s);
}

Dataset load_dataset(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw IngestionError("dataset root does not exist: " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  Dataset dataset;
  if (ids.empty()) {
    std::cerr << "warning: dataset root " << root << " holds no samples\n";
    return dataset;
  }
  for (const auto& id : ids) {
    const auto dir = root / id;
    auto require = [&](const char* name) {
      if (!std::filesystem::exists(dir / name))
        throw IngestionError("sample '" + id + "': missing " + name);
      return dir / name;
    };
    Sample s;
    s.id = id;
    s.image = read_color_png(require("image.png"));
    auto vessel = read_gray_png(require("vessel.png"));
    auto disk = read_gray_png(require("optic_disk.png"));
    std::vector<torch::Tensor> lesions;
    for (const char* name : kLesionFiles)
      lesions.push_back(read_gray_png(require(name)).clamp(0, 1));
    for (const auto& t : lesions)
      if (!t.sizes().equals(vessel.sizes()))
        throw ValidationError("sample '" + id + "': mask dims disagree");
    if (s.image.size(1) != vessel.size(0) || s.image.size(2) != vessel.size(1))
      throw ValidationError("sample '" + id + "': image/mask dims disagree");
    std::ifstream meta_in(require("meta.json"));
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    const int64_t grade = meta.at("grade").get<int64_t>();
    if (grade < 0 || grade >= kNumGrades)
      throw ValidationError("sample '" + id + "': grade out of range");
    s.grade = grade;
    s.condition = encode_condition({vessel, disk}, {torch::stack(lesions, 0)});
    dataset.samples.push_back(std::move(s));
  }
  return dataset;
}

torch::Tensor stack_conditions(const Dataset& d, const std::vector<int64_t>& idx) {
  std::vector<torch::Tensor> parts;
  parts.reserve(idx.size());
  for (int64_t i : idx) parts.push_back(d.samples[static_cast<size_t>(i)].condition);
  return torch::stack(parts, 0);
}

torch::Tensor stack_images(const Dataset& d, const std::vector<int64_t>& idx) {
  std::vector<torch::Tensor> parts;
  parts.reserve(idx.size());
  for (int64_t i : idx) parts.push_back(d.samples[static_cast<size_t>(i)].image);
  return torch::stack(parts, 0);
}

torch::Tensor stack_grades(const Dataset& d, const std::vector<int64_t>& idx) {
  std::vector<int64_t> grades;
  grades.reserve(idx.size());
  for (int64_t i : idx) grades.push_back(d.samples[static_cast<size_t>(i)].grade);
  return torch::tensor(grades, torch::kInt64);
}

}  // namespace drgan::data
