#include "drgan/grading.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace drgan::grading {

GradingBackboneImpl::GradingBackboneImpl(int64_t base_channels, int64_t fd)
    : feature_dim(fd) {
  const int64_t b = base_channels;
  conv1 = register_module(
      "conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, b, 3).stride(2).padding(1)));
  conv2 = register_module(
      "conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(b, 2 * b, 3).stride(2).padding(1)));
  conv3 = register_module(
      "conv3", torch::nn::Conv2d(torch::nn::Conv2dOptions(2 * b, 4 * b, 3).stride(2).padding(1)));
  conv4 = register_module(
      "conv4", torch::nn::Conv2d(torch::nn::Conv2dOptions(4 * b, fd, 3).stride(2).padding(1)));
  bn1 = register_module("bn1", torch::nn::BatchNorm2d(b));
  bn2 = register_module("bn2", torch::nn::BatchNorm2d(2 * b));
  bn3 = register_module("bn3", torch::nn::BatchNorm2d(4 * b));
  bn4 = register_module("bn4", torch::nn::BatchNorm2d(fd));
  fc = register_module("fc", torch::nn::Linear(fd, data::kNumGrades));
}

torch::Tensor GradingBackboneImpl::features(const torch::Tensor& images) {
  auto h = torch::leaky_relu(bn1->forward(conv1->forward(images)), 0.2);
  h = torch::leaky_relu(bn2->forward(conv2->forward(h)), 0.2);
  h = torch::leaky_relu(bn3->forward(conv3->forward(h)), 0.2);
  h = torch::leaky_relu(bn4->forward(conv4->forward(h)), 0.2);
  return torch::adaptive_avg_pool2d(h, {1, 1}).flatten(1);
}

torch::Tensor GradingBackboneImpl::forward(const torch::Tensor& images) {
  return fc->forward(features(images));
}

PretrainResult pretrain_grader(const data::Dataset& dataset, const GraderConfig& cfg) {
  const auto counts = dataset.counts_per_grade();
  for (int64_t g = 0; g < data::kNumGrades; ++g)
    if (counts[static_cast<size_t>(g)] == 0)
      throw ValidationError("pretrain_grader: dataset lacks grade " +
                            std::to_string(g));

  torch::manual_seed(cfg.seed);
  PretrainResult result;
  result.backbone = GradingBackbone(cfg.base_channels, cfg.feature_dim);

  // Deterministic stratified holdout: the last holdout_fraction of each
  // grade's samples (by dataset order) is held out.
  std::vector<int64_t> train_idx, holdout_idx;
  {
    std::array<std::vector<int64_t>, data::kNumGrades> by_grade;
    for (int64_t i = 0; i < dataset.size(); ++i)
      by_grade[static_cast<size_t>(dataset.samples[static_cast<size_t>(i)].grade)]
          .push_back(i);
    for (auto& idx : by_grade) {
      const auto held = std::max<int64_t>(
          1, static_cast<int64_t>(std::llround(cfg.holdout_fraction *
                                               static_cast<double>(idx.size()))));
      const auto cut = static_cast<int64_t>(idx.size()) - held;
      for (int64_t k = 0; k < static_cast<int64_t>(idx.size()); ++k)
        (k < cut ? train_idx : holdout_idx).push_back(idx[static_cast<size_t>(k)]);
    }
  }
  if (train_idx.empty()) throw ValidationError("pretrain_grader: empty train split");

  torch::optim::Adam opt(result.backbone->parameters(),
                         torch::optim::AdamOptions(cfg.lr).betas({cfg.beta1, 0.999}));
  std::mt19937_64 order_rng(mix64(cfg.seed, 0x9d2aULL));
  result.backbone->train();
  for (int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), order_rng);
    for (size_t start = 0; start < train_idx.size();
         start += static_cast<size_t>(cfg.batch)) {
      const size_t stop = std::min(train_idx.size(), start + static_cast<size_t>(cfg.batch));
      std::vector<int64_t> batch(train_idx.begin() + static_cast<int64_t>(start),
                                 train_idx.begin() + static_cast<int64_t>(stop));
      auto images = data::stack_images(dataset, batch);
      auto labels = data::stack_grades(dataset, batch);
      opt.zero_grad();
      auto loss = torch::nn::functional::cross_entropy(
          result.backbone->forward(images), labels);
      loss.backward();
      opt.step();
    }
  }

  // Held-out accuracy drives the pretrained-space quality gate.
  result.backbone->eval();
  int64_t correct = 0;
  {
    torch::NoGradGuard ng;
    for (size_t start = 0; start < holdout_idx.size(); start += 64) {
      const size_t stop = std::min(holdout_idx.size(), start + 64);
      std::vector<int64_t> batch(holdout_idx.begin() + static_cast<int64_t>(start),
                                 holdout_idx.begin() + static_cast<int64_t>(stop));
      auto pred = result.backbone->forward(data::stack_images(dataset, batch))
                      .argmax(1);
      correct += pred.eq(data::stack_grades(dataset, batch)).sum().item<int64_t>();
    }
  }
  result.accuracy = holdout_idx.empty()
                        ? 0.0
                        : static_cast<double>(correct) /
                              static_cast<double>(holdout_idx.size());
  result.gate_passed = result.accuracy >= cfg.accuracy_gate;
  if (!result.gate_passed) {
    std::cerr << "warning: pretrained grading accuracy " << result.accuracy
              << " is under the " << cfg.accuracy_gate
              << " gate; the latent grading space may be unusable\n";
  }
  return result;
}

std::array<GradeSpace, data::kNumGrades> fit_grading_spaces(
    GradingBackbone& backbone, const data::Dataset& dataset, int64_t batch) {
  std::array<std::vector<torch::Tensor>, data::kNumGrades> feats;
  backbone->eval();
  torch::NoGradGuard ng;
  std::vector<int64_t> idx(static_cast<size_t>(dataset.size()));
  std::iota(idx.begin(), idx.end(), 0);
  for (size_t start = 0; start < idx.size(); start += static_cast<size_t>(batch)) {
    const size_t stop = std::min(idx.size(), start + static_cast<size_t>(batch));
    std::vector<int64_t> chunk(idx.begin() + static_cast<int64_t>(start),
                               idx.begin() + static_cast<int64_t>(stop));
    auto f = backbone->features(data::stack_images(dataset, chunk));
    for (size_t k = 0; k < chunk.size(); ++k)
      feats[static_cast<size_t>(
                dataset.samples[static_cast<size_t>(chunk[k])].grade)]
          .push_back(f[static_cast<int64_t>(k)]);
  }

  std::array<GradeSpace, data::kNumGrades> spaces;
  for (int64_t g = 0; g < data::kNumGrades; ++g) {
    auto& bag = feats[static_cast<size_t>(g)];
    if (bag.size() < 2)
      throw ValidationError("fit_grading_spaces: grade " + std::to_string(g) +
                            " has fewer than 2 samples");
    auto x = torch::stack(bag, 0);  // n×F_d
    GradeSpace s;
    s.grade = g;
    s.mu = x.mean(0);
    s.sigma2 = (x - s.mu).square().mean(0);  // population variance, >= 0
    s.n_samples = x.size(0);
    spaces[static_cast<size_t>(g)] = std::move(s);
  }
  return spaces;
}

torch::Tensor sample_grade_vector(const GradeSpace& space, torch::Generator& gen) {
  auto n = torch::randn(space.mu.sizes(), gen, space.mu.options());
  return space.mu + space.sigma2.sqrt() * n;
}

void save_grade_spaces(const std::filesystem::path& path,
                       const std::array<GradeSpace, data::kNumGrades>& spaces) {
  nlohmann::json doc;
  for (const auto& s : spaces) {
    nlohmann::json entry;
    entry["n"] = s.n_samples;
    auto mu = s.mu.to(torch::kFloat64).contiguous();
    auto sigma2 = s.sigma2.to(torch::kFloat64).contiguous();
    entry["mu"] = std::vector<double>(mu.data_ptr<double>(),
                                      mu.data_ptr<double>() + mu.numel());
    entry["sigma2"] = std::vector<double>(
        sigma2.data_ptr<double>(), sigma2.data_ptr<double>() + sigma2.numel());
    doc[std::to_string(s.grade)] = std::move(entry);
  }
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

std::array<GradeSpace, data::kNumGrades> load_grade_spaces(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  std::array<GradeSpace, data::kNumGrades> spaces;
  for (int64_t g = 0; g < data::kNumGrades; ++g) {
    const auto& entry = doc.at(std::to_string(g));
    GradeSpace s;
    s.grade = g;
    s.n_samples = entry.at("n").get<int64_t>();
    auto mu = entry.at("mu").get<std::vector<double>>();
    auto sigma2 = entry.at("sigma2").get<std::vector<double>>();
    s.mu = torch::tensor(mu, torch::kFloat32);
    s.sigma2 = torch::tensor(sigma2, torch::kFloat32);
    spaces[static_cast<size_t>(g)] = std::move(s);
  }
  return spaces;
}

MappingNetworkImpl::MappingNetworkImpl(int64_t in_dim, int64_t out_dim_in,
                                       int64_t hidden)
    : out_dim(out_dim_in) {
  if (hidden <= 0) hidden = std::max(in_dim, out_dim);
  fc1 = register_module("fc1", torch::nn::Linear(in_dim, hidden));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, hidden));
  fc3 = register_module("fc3", torch::nn::Linear(hidden, hidden));
  fc4 = register_module("fc4", torch::nn::Linear(hidden, out_dim));
}

torch::Tensor MappingNetworkImpl::forward(const torch::Tensor& z) {
  auto h = torch::leaky_relu(fc1->forward(z), 0.2);
  h = torch::leaky_relu(fc2->forward(h), 0.2);
  h = torch::leaky_relu(fc3->forward(h), 0.2);
  return fc4->forward(h);
}

gen::StyleSet split_styles(const torch::Tensor& raw,
                           const std::vector<int64_t>& block_widths) {
  int64_t need = 0;
  for (int64_t w : block_widths) need += 2 * w;
  auto v = raw.dim() == 1 ? raw.unsqueeze(0) : raw;
  if (v.dim() != 2 || v.size(1) != need)
    throw ConfigError("style vector length " + std::to_string(raw.size(-1)) +
                      " does not match 2*sum(block widths) = " +
                      std::to_string(need));
  gen::StyleSet styles;
  int64_t offset = 0;
  for (int64_t w : block_widths) {
    gen::Style s;
    s.gamma = v.slice(1, offset, offset + w) + 1.0;  // zero output -> identity
    offset += w;
    s.beta = v.slice(1, offset, offset + w);
    offset += w;
    styles.push_back(std::move(s));
  }
  return styles;
}

gen::StyleSet map_to_styles(const torch::Tensor& z, MappingNetwork& net,
                            const std::vector<int64_t>& block_widths) {
  auto zz = z.dim() == 1 ? z.unsqueeze(0) : z;
  return split_styles(net->forward(zz), block_widths);
}

}  // namespace drgan::grading
