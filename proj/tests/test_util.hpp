#pragma once

#include <torch/torch.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testutil {

struct GradCheck {
  double rel_err = 0;
  double analytic_norm = 0;
  double fd_norm = 0;
};

// Central finite-difference comparison of d loss / d leaf against autograd,
// over a random sample of coordinates per leaf tensor. Tensors must be
// float64 for the stated tolerances to be meaningful.
inline GradCheck finite_diff_check(const std::function<torch::Tensor()>& loss_fn,
                                   std::vector<torch::Tensor> leaves,
                                   int coords_per_leaf = 6, uint64_t seed = 0) {
  for (auto& p : leaves) {
    p.requires_grad_(true);
    if (p.grad().defined()) p.mutable_grad().reset();
  }
  auto loss = loss_fn();
  loss.backward();

  std::vector<double> analytic, fd;
  std::mt19937_64 rng(seed);
  for (auto& p : leaves) {
    auto flat = p.detach().view(-1);
    auto gflat = p.grad().defined() ? p.grad().view(-1)
                                    : torch::zeros_like(flat);
    const int64_t n = flat.size(0);
    const int take = static_cast<int>(std::min<int64_t>(coords_per_leaf, n));
    for (int k = 0; k < take; ++k) {
      const int64_t idx = static_cast<int64_t>(rng() % static_cast<uint64_t>(n));
      const double v = flat[idx].item<double>();
      const double h = 1e-5 * std::max(1.0, std::abs(v));
      double y1, y0;
      {
        torch::NoGradGuard ng;
        flat[idx] = v + h;
        y1 = loss_fn().item<double>();
        flat[idx] = v - h;
        y0 = loss_fn().item<double>();
        flat[idx] = v;
      }
      fd.push_back((y1 - y0) / (2 * h));
      analytic.push_back(gflat[idx].item<double>());
    }
  }

  GradCheck out;
  double diff2 = 0, a2 = 0, f2 = 0;
  for (size_t i = 0; i < fd.size(); ++i) {
    diff2 += (fd[i] - analytic[i]) * (fd[i] - analytic[i]);
    a2 += analytic[i] * analytic[i];
    f2 += fd[i] * fd[i];
  }
  out.analytic_norm = std::sqrt(a2);
  out.fd_norm = std::sqrt(f2);
  out.rel_err = std::sqrt(diff2) / std::max({out.analytic_norm, out.fd_norm, 1e-12});
  return out;
}

inline void set_identity_conv1x1(torch::nn::Conv2d& conv) {
  torch::NoGradGuard ng;
  const int64_t c = conv->weight.size(0);
  conv->weight.copy_(torch::eye(c, conv->weight.options()).view({c, c, 1, 1}));
  conv->bias.zero_();
}

}  // namespace testutil
