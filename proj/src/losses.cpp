#include "drgan/losses.hpp"

namespace drgan::loss {

namespace {

void check_finite_logits(const std::vector<disc::DiscOutput>& outs,
                         const char* tag) {
  for (const auto& o : outs)
    if (!torch::isfinite(o.rf_logit).all().item<bool>())
      throw NumericError(std::string("adversarial_terms: non-finite ") + tag +
                         " logits");
}

}  // namespace

AdvPair adversarial_terms(const std::vector<disc::DiscOutput>& d_real,
                          const std::vector<disc::DiscOutput>& d_fake) {
  if (d_real.size() != d_fake.size())
    throw ValidationError("adversarial_terms: scale count mismatch");
  check_finite_logits(d_real, "real");
  check_finite_logits(d_fake, "fake");
  torch::Tensor adv_d, adv_g;
  for (size_t n = 0; n < d_real.size(); ++n) {
    // softplus(-x) = -log sigmoid(x); keeps the log terms stable.
    auto d_term = torch::softplus(-d_real[n].rf_logit).mean() +
                  torch::softplus(d_fake[n].rf_logit).mean();
    auto g_term = torch::softplus(-d_fake[n].rf_logit).mean();
    adv_d = adv_d.defined() ? adv_d + d_term : d_term;
    adv_g = adv_g.defined() ? adv_g + g_term : g_term;
  }
  return {adv_d, adv_g};
}

torch::Tensor feature_matching(const std::vector<disc::DiscOutput>& d_real,
                               const std::vector<disc::DiscOutput>& d_fake) {
  if (d_real.size() != d_fake.size())
    throw ValidationError("feature_matching: scale count mismatch");
  torch::Tensor out;
  for (size_t n = 0; n < d_real.size(); ++n) {
    if (d_real[n].features.size() != d_fake[n].features.size())
      throw ValidationError("feature_matching: layer count mismatch");
    torch::Tensor scale_term;
    for (size_t p = 0; p < d_real[n].features.size(); ++p) {
      const auto& fr = d_real[n].features[p];
      const auto& ff = d_fake[n].features[p];
      if (!fr.sizes().equals(ff.sizes()))
        throw ValidationError("feature_matching: feature shape mismatch");
      // Per-sample L2 norm over the layer, mean over the batch.
      auto term = (fr.detach() - ff).flatten(1).norm(2, 1).mean();
      scale_term = scale_term.defined() ? scale_term + term : term;
    }
    scale_term = scale_term / static_cast<double>(d_real[n].features.size());
    out = out.defined() ? out + scale_term : scale_term;
  }
  return out;
}

PerceptualNetImpl::PerceptualNetImpl(int64_t n_layers, int64_t base_channels,
                                     uint64_t seed) {
  auto gen = at::detail::createCPUGenerator(seed);
  int64_t in = 3;
  int64_t out = base_channels;
  for (int64_t q = 0; q < n_layers; ++q) {
    auto conv = torch::nn::Conv2d(
        torch::nn::Conv2dOptions(in, out, 3).stride(2).padding(1));
    {
      torch::NoGradGuard ng;
      conv->weight.normal_(0.0, 0.2, gen);
      conv->bias.zero_();
    }
    convs.push_back(conv);
    register_module("conv" + std::to_string(q), convs.back());
    in = out;
    out *= 2;
  }
  for (auto& p : parameters()) p.set_requires_grad(false);
}

std::vector<torch::Tensor> PerceptualNetImpl::taps(const torch::Tensor& x) {
  if (convs.empty()) return {x};  // identity extractor
  std::vector<torch::Tensor> out;
  auto h = x;
  for (auto& conv : convs) {
    h = torch::leaky_relu(conv->forward(h), 0.2);
    out.push_back(h);
  }
  return out;
}

torch::Tensor perceptual(const torch::Tensor& x_real, const torch::Tensor& x_fake,
                         PerceptualNet& net) {
  if (!x_real.sizes().equals(x_fake.sizes()))
    throw ValidationError("perceptual: image shapes disagree");
  auto real_taps = net->taps(x_real);
  auto fake_taps = net->taps(x_fake);
  torch::Tensor out;
  for (size_t q = 0; q < real_taps.size(); ++q) {
    auto term = (real_taps[q].detach() - fake_taps[q]).abs().mean();
    out = out.defined() ? out + term : term;
  }
  return out / static_cast<double>(real_taps.size());
}

torch::Tensor focal(const torch::Tensor& logits, const torch::Tensor& targets,
                    double gamma_f, const torch::Tensor& alpha) {
  if (logits.dim() != 2 || targets.dim() != 1 || logits.size(0) != targets.size(0))
    throw ValidationError("focal: expected N×K logits and N labels");
  const int64_t k = logits.size(1);
  if (targets.numel() > 0 &&
      (targets.min().item<int64_t>() < 0 || targets.max().item<int64_t>() >= k))
    throw ValidationError("focal: label out of range");
  auto logp = torch::log_softmax(logits, 1);
  auto logp_y = logp.gather(1, targets.unsqueeze(1)).squeeze(1);
  auto p_y = logp_y.exp();
  auto weight = torch::pow(1.0 - p_y, gamma_f);
  auto term = -weight * logp_y;
  if (alpha.defined() && alpha.numel() > 0) {
    if (alpha.numel() != k)
      throw ValidationError("focal: alpha must have one weight per class");
    term = term * alpha.to(logits.options()).index_select(0, targets);
  }
  return term.mean();
}

torch::Tensor class_balanced_alpha(const std::array<int64_t, 5>& counts) {
  std::array<double, 5> raw{};
  double sum = 0;
  for (size_t c = 0; c < 5; ++c) {
    raw[c] = 1.0 / static_cast<double>(std::max<int64_t>(1, counts[c]));
    sum += raw[c];
  }
  std::vector<double> alpha(5);
  for (size_t c = 0; c < 5; ++c) alpha[c] = raw[c] * 5.0 / sum;  // mean 1
  return torch::tensor(alpha, torch::kFloat32);
}

TotalPair total(const torch::Tensor& adv_g, const torch::Tensor& adv_d,
                const torch::Tensor& feat_match, const torch::Tensor& perceptual,
                const torch::Tensor& cls_real, const torch::Tensor& cls_fake,
                const LossWeights& w, const AblationFlags& flags) {
  auto zero = torch::zeros_like(adv_g);
  auto fm = feat_match.defined() ? feat_match : zero;
  auto perc = (flags.no_perceptual || !perceptual.defined()) ? zero : perceptual;
  auto cr = (flags.no_cls || !cls_real.defined()) ? zero : cls_real;
  auto cf = (flags.no_cls || !cls_fake.defined()) ? zero : cls_fake;
  TotalPair out;
  out.total_g = adv_g + w.lambda_feat * fm + w.lambda_perceptual * perc;
  out.total_d = adv_d + w.lambda_cls * (cr + cf);
  return out;
}

}  // namespace drgan::loss
