// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"

using namespace aams;

namespace {

const WeightBundle& bundle() {
  static const WeightBundle b = make_random_bundle(5);
  return b;
}

Tensor grid(std::vector<float> v) { return Tensor(1, 4, 4, std::move(v)); }

}  // namespace

TEST(ContentLoss, ZeroOnIdenticalImages) {
  oracle::Rng rng(1);
  const Tensor img = rng.tensor(3, 16, 16, 0, 1);
  EXPECT_EQ(content_loss(img, img, bundle()), 0.0);
}

TEST(ContentLoss, DegenerateEncoderLeavesPixelTerm) {
  oracle::Rng rng(2);
  WeightBundle zero = bundle();
  for (const auto& [name, blob] : zero.entries()) std::fill(zero.at(name).values.begin(), zero.at(name).values.end(), 0.0f);
  const Tensor a = rng.tensor(3, 8, 8, 0, 1), b = rng.tensor(3, 8, 8, 0, 1);
  EXPECT_EQ(content_loss(a, b, zero, LossWeights{1, 0, 6, 10}), 0.0);
  EXPECT_NEAR(content_loss(a, b, zero), 10.0 * mean_squared_difference(a, b), 1e-12);
}

TEST(ContentLoss, TwoLayerStandInMatchesDirectSum) {
  oracle::Rng rng(3);
  const Filter k1 = rng.filter(4, 3, 3, 3), k2 = rng.filter(2, 4, 3, 3);
  auto encoder = [&](const Tensor& x) {
    const Tensor h1 = conv2d(x, k1, {}, 1, Padding::reflection_same, Activation::relu);
    const Tensor h2 = conv2d(h1, k2, {}, 1, Padding::reflection_same, Activation::relu);
    return std::vector<Tensor>{h1, h2};
  };
  const Tensor a = rng.tensor(3, 6, 7, 0, 1), b = rng.tensor(3, 6, 7, 0, 1);
  const std::vector<Tensor> fa = encoder(a), fb = encoder(b);
  long double want = 0;
  for (std::size_t l = 0; l < 2; ++l) {
    long double s = 0;
    for (std::size_t i = 0; i < fa[l].size(); ++i) s += std::pow(static_cast<long double>(fa[l].data()[i]) - fb[l].data()[i], 2);
    want += s / fa[l].size();
  }
  long double px = 0;
  for (std::size_t i = 0; i < a.size(); ++i) px += std::pow(static_cast<long double>(a.data()[i]) - b.data()[i], 2);
  want += 10 * px / a.size();
  EXPECT_NEAR(content_loss(a, b, encoder), static_cast<double>(want), 1e-6);
  EXPECT_THROW(content_loss(a, rng.tensor(3, 6, 6), encoder), DimensionError);
}

TEST(AttentionSparseLoss, Values) {
  EXPECT_EQ(attention_sparse_loss({Tensor(4, 3, 3)}), 0.0);
  EXPECT_NEAR(attention_sparse_loss({Tensor(2, 3, 3, -0.7f)}), 0.7, 1e-7);
  oracle::Rng rng(4);
  const Tensor a = rng.tensor(5, 4, 6);
  long double s = 0;
  for (float v : a.data()) s += std::fabs(v);
  EXPECT_NEAR(attention_sparse_loss({a}), static_cast<double>(s / a.size()), 1e-7);
}

TEST(TvLoss, Values) {
  EXPECT_EQ(tv_loss(Tensor(3, 5, 5, 0.4f)), 0.0);
  EXPECT_NEAR(tv_loss(Tensor(1, 1, 2, {0.25f, 1.0f})), 0.5625, 1e-12);
  oracle::Rng rng(5);
  const Tensor t = rng.tensor(2, 5, 6);
  long double s = 0;
  long n = 0;
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) {
        if (y + 1 < 5) s += std::pow(static_cast<long double>(t(c, y + 1, x)) - t(c, y, x), 2), ++n;
        if (x + 1 < 6) s += std::pow(static_cast<long double>(t(c, y, x + 1)) - t(c, y, x), 2), ++n;
      }
  EXPECT_NEAR(tv_loss(t), static_cast<double>(s / n), 1e-6);
  EXPECT_THROW(tv_loss(Tensor(3, 1, 1)), ValidationError);
}

TEST(TotalLoss, Combination) {
  EXPECT_EQ(total_loss({0, 0, 0}), 0.0);
  EXPECT_EQ(total_loss({1, 1, 1}), 17.0);
  const LossWeights w{2.5, 10, 0.25, 3};
  EXPECT_EQ(total_loss({0.5, 4, 2}, w), 2.5 * 0.5 + 0.25 * 4 + 3 * 2);
  // Linear in each part.
  EXPECT_DOUBLE_EQ(total_loss({2, 0, 0}) - total_loss({1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(total_loss({0, 2, 0}) - total_loss({0, 1, 0}), 6.0);
}

TEST(Saliency, IdenticalMaps) {
  oracle::Rng rng(6);
  const Tensor m = rng.tensor(1, 6, 6, 0, 1);
  const SaliencyScores s = saliency_metrics({m, m, std::nullopt});
  EXPECT_NEAR(s.cc, 1.0, 1e-12);
  EXPECT_NEAR(s.sim, 1.0, 1e-12);
  EXPECT_LE(s.kl, 1e-9);
}

TEST(Saliency, ConstantStylizedMapDegenerates) {
  oracle::Rng rng(7);
  const SaliencyScores s = saliency_metrics({rng.tensor(1, 4, 4, 0, 1), Tensor(1, 4, 4, 0.5f), std::nullopt});
  EXPECT_EQ(s.nss, 0.0);
  EXPECT_EQ(s.cc, 0.0);
  EXPECT_TRUE(std::isfinite(s.kl));
}

TEST(Saliency, HandBuiltMatchesTextbookFormulas) {
  const Tensor content = grid({0.9f, 0.8f, 0.1f, 0.0f, 0.7f, 0.6f, 0.2f, 0.1f, 0.3f, 0.2f, 0.1f, 0.0f, 0.1f, 0.0f, 0.0f, 0.4f});
  const Tensor stylized = grid({0.6f, 0.9f, 0.3f, 0.1f, 0.5f, 0.4f, 0.2f, 0.0f, 0.2f, 0.3f, 0.2f, 0.1f, 0.0f, 0.1f, 0.3f, 0.2f});
  const Tensor fix = grid({1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0});
  const SaliencyScores got = saliency_metrics({content, stylized, fix});
  auto d = [](const Tensor& t) { return std::vector<double>(t.data().begin(), t.data().end()); };
  std::vector<int> mask;
  for (float v : fix.data()) mask.push_back(v != 0.0f);
  const oracle::Saliency want = oracle::saliency(d(content), d(stylized), mask);
  EXPECT_NEAR(got.auc_judd, want.auc_judd, 1e-6);
  EXPECT_NEAR(got.sim, want.sim, 1e-6);
  EXPECT_NEAR(got.nss, want.nss, 1e-6);
  EXPECT_NEAR(got.cc, want.cc, 1e-6);
  EXPECT_NEAR(got.kl, want.kl, 1e-6);
}

TEST(Saliency, PropertiesOnRandomMaps) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor a = rng.tensor(1, 7, 5, 0, 1), b = rng.tensor(1, 7, 5, 0, 1);
    const SaliencyScores ab = saliency_metrics({a, b, std::nullopt});
    const SaliencyScores ba = saliency_metrics({b, a, std::nullopt});
    EXPECT_NEAR(ab.cc, ba.cc, 1e-12);
    EXPECT_GE(ab.sim, 0.0);
    EXPECT_LE(ab.sim, 1.0 + 1e-12);
    EXPECT_GE(ab.auc_judd, 0.0);
    EXPECT_LE(ab.auc_judd, 1.0);
  }
}

TEST(Saliency, AucIsOneWhenFixationsAreTopScored) {
  const Tensor stylized = grid({0.1f, 0.2f, 0.9f, 0.3f, 0.0f, 0.8f, 0.2f, 0.1f, 0.4f, 0.3f, 0.2f, 0.1f, 0.95f, 0.0f, 0.1f, 0.2f});
  const Tensor fix = grid({0, 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0});
  EXPECT_NEAR(saliency_metrics({stylized, stylized, fix}).auc_judd, 1.0, 1e-12);
}

TEST(Saliency, DefaultMaskIsTopDecileOfContent) {
  oracle::Rng rng(9);
  const Tensor content = rng.tensor(1, 10, 10, 0, 1), stylized = rng.tensor(1, 10, 10, 0, 1);
  std::vector<float> sorted(content.data().begin(), content.data().end());
  std::sort(sorted.begin(), sorted.end());
  Tensor mask(1, 10, 10);
  for (std::size_t i = 0; i < 100; ++i) mask.data()[i] = content.data()[i] >= sorted[89] ? 1.0f : 0.0f;
  const SaliencyScores implicit = saliency_metrics({content, stylized, std::nullopt});
  const SaliencyScores explicit_mask = saliency_metrics({content, stylized, mask});
  EXPECT_EQ(implicit.nss, explicit_mask.nss);
  EXPECT_EQ(implicit.auc_judd, explicit_mask.auc_judd);
}

TEST(Saliency, ErrorsAndRecords) {
  EXPECT_THROW(saliency_metrics({Tensor(1, 4, 4), Tensor(1, 4, 5), std::nullopt}), DimensionError);
  EXPECT_THROW(saliency_metrics({Tensor(1, 4, 4, 0.5f), Tensor(1, 4, 4, 0.5f), Tensor(1, 4, 4)}), ValidationError);
  EXPECT_THROW(saliency_metrics({Tensor(1, 2, 2, -1.0f), Tensor(1, 2, 2), std::nullopt}), ValidationError);
  const SaliencyScores s{0.5, 0.25, 1.5, 0.75, 0.125};
  EXPECT_EQ(to_record(s), "auc_judd=0.5 sim=0.25 nss=1.5 cc=0.75 kl=0.125");
  EXPECT_EQ(to_csv_row(s), "0.5,0.25,1.5,0.75,0.125");
  EXPECT_STREQ(kSaliencyCsvHeader, "auc_judd,sim,nss,cc,kl");
}
