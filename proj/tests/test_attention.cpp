#include "doctest_torch.hpp"

#include <cmath>
#include <vector>

#include "drgan/attention.hpp"
#include "test_util.hpp"

using namespace drgan;
using attention::Sca;
using attention::ScaOptions;

namespace {

// Loop-based oracles, independent of the torch op path.

std::vector<std::vector<double>> conv1x1_oracle(const torch::Tensor& x,
                                                const torch::Tensor& w,
                                                const torch::Tensor& b) {
  const int64_t cin = x.size(0), hw = x.size(1) * x.size(2);
  const int64_t cout = w.size(0);
  auto xa = x.reshape({cin, hw});
  std::vector<std::vector<double>> out(
      static_cast<size_t>(cout), std::vector<double>(static_cast<size_t>(hw), 0));
  for (int64_t o = 0; o < cout; ++o)
    for (int64_t p = 0; p < hw; ++p) {
      double acc = b[o].item<double>();
      for (int64_t i = 0; i < cin; ++i)
        acc += w[o][i][0][0].item<double>() * xa[i][p].item<double>();
      out[static_cast<size_t>(o)][static_cast<size_t>(p)] = acc;
    }
  return out;
}

void rowsoftmax_inplace(std::vector<std::vector<double>>& m) {
  for (auto& row : m) {
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double sum = 0;
    for (double& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : row) v /= sum;
  }
}

torch::Tensor spatial_oracle(Sca& sca, const torch::Tensor& x) {
  const int64_t c = x.size(0), h = x.size(1), w = x.size(2);
  const int64_t hw = h * w;
  auto q = conv1x1_oracle(x, sca->branch1->weight.detach(), sca->branch1->bias.detach());
  auto k = conv1x1_oracle(x, sca->branch2->weight.detach(), sca->branch2->bias.detach());
  auto v = conv1x1_oracle(x, sca->branch3->weight.detach(), sca->branch3->bias.detach());
  const int64_t red = static_cast<int64_t>(q.size());
  // a = rowsoftmax(K^T Q), (HW)x(HW)
  std::vector<std::vector<double>> a(
      static_cast<size_t>(hw), std::vector<double>(static_cast<size_t>(hw), 0));
  for (int64_t i = 0; i < hw; ++i)
    for (int64_t j = 0; j < hw; ++j) {
      double acc = 0;
      for (int64_t m = 0; m < red; ++m)
        acc += k[static_cast<size_t>(m)][static_cast<size_t>(i)] *
               q[static_cast<size_t>(m)][static_cast<size_t>(j)];
      a[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
    }
  rowsoftmax_inplace(a);
  // out = x + reshape(V A^T)
  auto out = torch::zeros_like(x);
  auto xa = x.reshape({c, hw});
  auto oa = out.reshape({c, hw});
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t p = 0; p < hw; ++p) {
      double acc = xa[ch][p].item<double>();
      for (int64_t i = 0; i < hw; ++i)
        acc += v[static_cast<size_t>(ch)][static_cast<size_t>(i)] *
               a[static_cast<size_t>(p)][static_cast<size_t>(i)];
      oa[ch][p] = acc;
    }
  return out.reshape({c, h, w});
}

torch::Tensor channel_oracle(const torch::Tensor& x) {
  const int64_t c = x.size(0), h = x.size(1), w = x.size(2);
  const int64_t hw = h * w;
  auto f = x.reshape({c, hw});
  std::vector<std::vector<double>> a(
      static_cast<size_t>(c), std::vector<double>(static_cast<size_t>(c), 0));
  for (int64_t i = 0; i < c; ++i)
    for (int64_t j = 0; j < c; ++j) {
      double acc = 0;
      for (int64_t p = 0; p < hw; ++p)
        acc += f[i][p].item<double>() * f[j][p].item<double>();
      a[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
    }
  rowsoftmax_inplace(a);
  auto out = torch::zeros_like(x);
  auto oa = out.reshape({c, hw});
  for (int64_t ch = 0; ch < c; ++ch)
    for (int64_t p = 0; p < hw; ++p) {
      double acc = f[ch][p].item<double>();
      for (int64_t j = 0; j < c; ++j)
        acc += a[static_cast<size_t>(ch)][static_cast<size_t>(j)] *
               f[j][p].item<double>();
      oa[ch][p] = acc;
    }
  return out.reshape({c, h, w});
}

Sca make_sca(int64_t channels, int64_t reduction, uint64_t seed) {
  torch::manual_seed(seed);
  Sca sca(ScaOptions{channels, reduction});
  sca->to(torch::kFloat64);
  return sca;
}

}  // namespace

TEST_SUITE_BEGIN("attention");

TEST_CASE("clip_reduction picks the largest divisor") {
  CHECK(attention::clip_reduction(128, 8) == 8);
  CHECK(attention::clip_reduction(64, 16) == 16);
  CHECK(attention::clip_reduction(32, 32) == 32);
  CHECK(attention::clip_reduction(6, 4) == 3);
  CHECK(attention::clip_reduction(5, 4) == 1);
  CHECK(attention::clip_reduction(2, 32) == 2);
}

TEST_CASE("channels not divisible by reduction is a configuration error") {
  CHECK_THROWS_AS(Sca(ScaOptions{6, 4}), ConfigError);
}

TEST_CASE("attention maps are row-stochastic on random tiny configs") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const int64_t c = 2 + static_cast<int64_t>(seed % 4) * 2;  // 2,4,6,8
    const int64_t d = attention::clip_reduction(c, 2 + static_cast<int64_t>(seed % 3));
    auto sca = make_sca(c, d, seed);
    torch::manual_seed(1000 + seed);
    auto x = torch::randn({1, c, 3, 2}, torch::kFloat64);
    auto as = sca->spatial_map(x);
    auto ac = sca->channel_map(x);
    CHECK(as.min().item<double>() >= 0.0);
    CHECK(ac.min().item<double>() >= 0.0);
    CHECK((as.sum(-1) - 1).abs().max().item<double>() < 1e-5);
    CHECK((ac.sum(-1) - 1).abs().max().item<double>() < 1e-5);
  }
}

TEST_CASE("zeroed value branch reduces spatial attention to identity") {
  auto sca = make_sca(4, 2, 3);
  {
    torch::NoGradGuard ng;
    sca->branch3->weight.zero_();
    sca->branch3->bias.zero_();
  }
  torch::manual_seed(5);
  auto x = torch::randn({2, 4, 3, 3}, torch::kFloat64);
  CHECK(torch::equal(sca->spatial_attention(x), x));
}

TEST_CASE("single-channel map is [[1]] and doubles the input") {
  auto sca = make_sca(1, 1, 9);
  torch::manual_seed(11);
  auto x = torch::randn({1, 1, 2, 2}, torch::kFloat64);
  auto ac = sca->channel_map(x);
  CHECK(ac.sizes() == torch::IntArrayRef({1, 1, 1}));
  CHECK(ac.item<double>() == doctest::Approx(1.0));
  CHECK(torch::allclose(sca->channel_attention(x), 2 * x));
}

TEST_CASE("spatial attention matches the loop oracle") {
  auto sca = make_sca(2, 2, 21);
  torch::manual_seed(22);
  auto x = torch::randn({2, 2, 2}, torch::kFloat64);
  auto got = sca->spatial_attention(x.unsqueeze(0)).squeeze(0);
  auto want = spatial_oracle(sca, x);
  CHECK((got - want).abs().max().item<double>() < 1e-6);
}

TEST_CASE("channel attention matches the loop oracle") {
  auto sca = make_sca(3, 1, 31);
  torch::manual_seed(32);
  auto x = torch::randn({3, 2, 2}, torch::kFloat64);
  auto got = sca->channel_attention(x.unsqueeze(0)).squeeze(0);
  auto want = channel_oracle(x);
  CHECK((got - want).abs().max().item<double>() < 1e-6);
}

TEST_CASE("fusion scalars gate the block output") {
  auto sca = make_sca(4, 2, 41);
  torch::manual_seed(42);
  auto x = torch::randn({1, 4, 3, 3}, torch::kFloat64);
  // Freshly constructed blocks start at w_s = w_c = 0.
  CHECK(sca->forward(x).abs().max().item<double>() == 0.0);

  {
    torch::NoGradGuard ng;
    sca->w_spatial.fill_(1.0);
    sca->w_channel.fill_(0.0);
    testutil::set_identity_conv1x1(sca->out_spatial);
  }
  CHECK(torch::allclose(sca->forward(x), sca->spatial_attention(x)));
}

TEST_CASE("block output matches the composed oracle") {
  auto sca = make_sca(2, 1, 51);
  {
    torch::NoGradGuard ng;
    sca->w_spatial.fill_(0.7);
    sca->w_channel.fill_(-0.3);
  }
  torch::manual_seed(52);
  auto x = torch::randn({2, 2, 2}, torch::kFloat64);
  auto is = spatial_oracle(sca, x);
  auto ic = channel_oracle(x);
  auto cs = conv1x1_oracle(is, sca->out_spatial->weight.detach(),
                           sca->out_spatial->bias.detach());
  auto cc = conv1x1_oracle(ic, sca->out_channel->weight.detach(),
                           sca->out_channel->bias.detach());
  auto want = torch::zeros_like(x).reshape({2, 4});
  for (int64_t ch = 0; ch < 2; ++ch)
    for (int64_t p = 0; p < 4; ++p)
      want[ch][p] = 0.7 * cs[static_cast<size_t>(ch)][static_cast<size_t>(p)] -
                    0.3 * cc[static_cast<size_t>(ch)][static_cast<size_t>(p)];
  auto got = sca->forward(x.unsqueeze(0)).squeeze(0);
  CHECK((got - want.reshape({2, 2, 2})).abs().max().item<double>() < 1e-6);
}

TEST_CASE("shape preservation across sizes") {
  for (auto hw : {2, 3, 5}) {
    auto sca = make_sca(4, 4, 60 + static_cast<uint64_t>(hw));
    auto x = torch::randn({2, 4, hw, hw}, torch::kFloat64);
    CHECK(sca->forward(x).sizes() == x.sizes());
    CHECK(sca->spatial_attention(x).sizes() == x.sizes());
    CHECK(sca->channel_attention(x).sizes() == x.sizes());
  }
}

TEST_CASE("gradients match central finite differences") {
  auto sca = make_sca(4, 2, 71);
  {
    torch::NoGradGuard ng;
    sca->w_spatial.fill_(0.4);
    sca->w_channel.fill_(0.6);
  }
  torch::manual_seed(72);
  auto x = torch::randn({1, 4, 3, 3}, torch::kFloat64);
  auto target = torch::randn({1, 4, 3, 3}, torch::kFloat64);
  std::vector<torch::Tensor> leaves = {x, sca->branch1->weight, sca->branch3->weight,
                                       sca->out_spatial->weight, sca->w_spatial,
                                       sca->w_channel};
  auto check = testutil::finite_diff_check(
      [&] { return (sca->forward(x) * target).sum(); }, leaves, 5, 7);
  CHECK(check.rel_err < 1e-3);
  CHECK(check.analytic_norm > 0.0);
}

TEST_SUITE_END();
