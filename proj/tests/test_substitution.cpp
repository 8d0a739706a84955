#include "i2p/core_nets.hpp"
#include "i2p/errors.hpp"
#include "i2p/injection.hpp"
#include "i2p/ops.hpp"
#include "i2p/substitution.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace i2p;
using namespace i2p::testing;

namespace {

DecouplerConfig config_for(const FeatureExtractor& enc, int img_res, int feature_dim = 64) {
  const Shape fs = enc.feature_shape(img_res);
  return {fs[0], fs[1], fs[0], feature_dim};
}

ParamSet fresh_decoupler(const DecouplerConfig& cfg, std::uint64_t seed, double std = 0.02) {
  std::mt19937_64 rng(seed);
  return init_decoupler(cfg, std, rng);
}

double row_norm(const Tensor& t, int row) {
  const int d = t.dim(1);
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += t[row * d + i] * t[row * d + i];
  return std::sqrt(s);
}

std::vector<double> row(const Tensor& t, int r) {
  const int d = t.shape().back();
  return {t.data() + static_cast<std::size_t>(r) * d, t.data() + static_cast<std::size_t>(r + 1) * d};
}

}  // namespace

TEST(Encoder, ShapeDeterminismAndFrozenParameters) {
  const auto enc = make_extractor("frozen-conv-v1");
  EXPECT_EQ(enc->feature_shape(32), (Shape{32, 8, 8}));
  const Tensor x = rand_image({2, 3, 32, 32}, 1);
  const Tensor f = enc->encode(Var(x)).value();
  EXPECT_EQ(f.shape(), (Shape{2, 32, 8, 8}));
  EXPECT_EQ(f, enc->encode(Var(x)).value());
  EXPECT_EQ(enc->checksum(), make_extractor("frozen-conv-v1")->checksum());

  const std::uint64_t before = enc->checksum();
  Var xv(x, true);
  backward(probe(enc->encode(xv), 2));
  EXPECT_GT(xv.grad().max_abs(), 0.0);
  const auto& conv = dynamic_cast<const FrozenConvEncoder&>(*enc);
  for (const auto& [name, p] : conv.params()) {
    EXPECT_FALSE(p.requires_grad()) << name;
    EXPECT_EQ(p.grad().max_abs(), 0.0) << name;
  }
  EXPECT_EQ(enc->checksum(), before);
}

TEST(Encoder, UnknownIdAndBadShapes) {
  EXPECT_THROW(make_extractor("clip-vit-b32"), ConfigError);
  const auto enc = make_extractor("frozen-conv-v1");
  EXPECT_THROW(enc->encode(Var(Tensor({1, 1, 32, 32}))), InvalidInput);
}

TEST(Encoder, PixelGradients) {
  const auto enc = make_extractor("frozen-conv-v1");
  Var x(rand_image({1, 3, 8, 8}, 3));
  const GradCheckResult r = grad_check([&] { return probe(enc->encode(x), 4); }, {{"x", x}}, 100, 5);
  EXPECT_TRUE(r.ok()) << r.max_rel_err << " " << r.worst;
}

TEST(Decoupler, UnitNormAndDeterminism) {
  const auto enc = make_extractor("frozen-conv-v1");
  const DecouplerConfig cfg = config_for(*enc, 32);
  const ParamSet dec = fresh_decoupler(cfg, 1);
  const Var f = enc->encode(Var(rand_image({3, 3, 32, 32}, 2)));
  const StyleContent a = decouple(dec, cfg, f), b = decouple(dec, cfg, f);
  EXPECT_EQ(a.style.value(), b.style.value());
  EXPECT_EQ(a.content.value(), b.content.value());
  EXPECT_EQ(a.style.shape(), (Shape{3, 64}));
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(row_norm(a.style.value(), i), 1.0, 1e-6);
    EXPECT_NEAR(row_norm(a.content.value(), i), 1.0, 1e-6);
  }
}

TEST(Decoupler, StyleAndContentAreNotCollinearAtInit) {
  const auto enc = make_extractor("frozen-conv-v1");
  const DecouplerConfig cfg = config_for(*enc, 32);
  const ParamSet dec = fresh_decoupler(cfg, 7);
  const StyleContent images = decouple(dec, cfg, enc->encode(Var(rand_image({50, 3, 32, 32}, 8))));
  EXPECT_LT(max_style_content_cosine(images), 0.99);
  const StyleContent noise = decouple(dec, cfg, Var(randn({50, 32, 8, 8}, 9)));
  EXPECT_LT(max_style_content_cosine(noise), 0.99);
}

TEST(Decoupler, ZeroFeaturesGiveNormalisedHeadBiases) {
  const DecouplerConfig cfg{32, 8, 32, 16};
  ParamSet dec = fresh_decoupler(cfg, 2);
  std::mt19937_64 rng(3);
  dec.at("style_head.bias").mutable_value() = normal_tensor({16}, 1.0, rng);
  dec.at("content_head.bias").mutable_value() = normal_tensor({16}, 1.0, rng);
  const Var zero(Tensor({2, 32, 8, 8}));
  const StyleContent sc = decouple(dec, cfg, zero);
  const Tensor& sb = dec.at("style_head.bias").value();
  const Tensor& cb = dec.at("content_head.bias").value();
  double ns = 0.0, nc = 0.0;
  for (int i = 0; i < 16; ++i) {
    ns += sb[i] * sb[i];
    nc += cb[i] * cb[i];
  }
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i < 16; ++i) {
      EXPECT_NEAR(sc.style.value()[r * 16 + i], sb[i] / std::sqrt(ns), 1e-12);
      EXPECT_NEAR(sc.content.value()[r * 16 + i], cb[i] / std::sqrt(nc), 1e-12);
    }
  EXPECT_EQ(sc.style.value(), decouple(dec, cfg, zero).style.value());
}

TEST(Decoupler, ShapeMismatchThrows) {
  const DecouplerConfig cfg{32, 8, 32, 16};
  const ParamSet dec = fresh_decoupler(cfg, 2);
  EXPECT_THROW(decouple(dec, cfg, Var(Tensor({1, 32, 4, 4}))), InvalidInput);
}

TEST(Decoupler, Gradients) {
  const DecouplerConfig cfg{4, 4, 3, 5};
  ParamSet dec = fresh_decoupler(cfg, 4, 0.5);
  Var f(randn({2, 4, 4, 4}, 5));
  auto leaves = leaves_of(dec, "dec.");
  leaves.emplace_back("f", f);
  const GradCheckResult r = grad_check(
      [&] {
        const StyleContent sc = decouple(dec, cfg, f);
        return ops::add(probe(sc.style, 6), probe(sc.content, 7));
      },
      leaves, 30, 8);
  EXPECT_TRUE(r.ok()) << r.max_rel_err << " " << r.worst;
}

TEST(Modulate, FixedPointStatsAndShiftInvariance) {
  const Tensor c = randn({4, 64}, 1), s = randn({4, 64}, 2, 0.2);
  EXPECT_LT(max_abs_diff(modulate(Var(c), Var(c)).value(), c), 1e-6);
  const Tensor m = modulate(Var(c), Var(s)).value();
  for (int r = 0; r < 4; ++r) {
    const RefStats ms = ref_stats(row(m, r)), ss = ref_stats(row(s, r));
    EXPECT_NEAR(static_cast<double>(ms.mean), static_cast<double>(ss.mean), 1e-5);
    EXPECT_NEAR(static_cast<double>(ms.std), static_cast<double>(ss.std), 1e-5);
  }
  Tensor shifted = c;
  for (std::size_t i = 0; i < shifted.numel(); ++i) shifted[i] += 3.7;
  EXPECT_LT(max_abs_diff(modulate(Var(shifted), Var(s)).value(), m), 1e-6);
}

TEST(Modulate, IsAdain) {
  const Tensor c = randn({5, 64}, 3), s = randn({5, 64}, 4, 3.0);
  const Tensor m = modulate(Var(c), Var(s)).value();
  EXPECT_LE(max_abs_diff(m, adain(Var(c), Var(s), 64).value()), 1e-12);
  for (int r = 0; r < 5; ++r) {
    const auto ref = adain(std::span<const double>(row(c, r)), std::span<const double>(row(s, r)));
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(m[r * 64 + i], ref[static_cast<std::size_t>(i)], 1e-12);
  }
  EXPECT_THROW(modulate(Var(Tensor({1, 4})), Var(Tensor({1, 5}))), InvalidInput);
}

TEST(Modulate, Gradients) {
  Var c(randn({2, 6}, 5)), s(randn({2, 6}, 6));
  const GradCheckResult r = grad_check([&] { return probe(modulate(c, s), 7); }, {{"C", c}, {"S", s}}, 12, 8);
  EXPECT_TRUE(r.ok()) << r.max_rel_err << " " << r.worst;
}

TEST(SubstitutionPass, IdenticalInputsAndStatistics) {
  const auto enc = make_extractor("frozen-conv-v1");
  const DecouplerConfig cfg = config_for(*enc, 32);
  const ParamSet dec = fresh_decoupler(cfg, 1);
  const Var x(rand_image({2, 3, 32, 32}, 2));
  const SubstitutionFeatures f = substitution_pass(x, x, x, *enc, dec, cfg);
  EXPECT_LT(max_abs_diff(f.m_cs_sr.value(), f.m_ct_sr.value()), 1e-6);
  EXPECT_LT(max_abs_diff(f.m_cs_sr.value(), f.m_cs_st.value()), 1e-6);

  const Var xs(rand_image({2, 3, 32, 32}, 3)), xt(rand_image({2, 3, 32, 32}, 4)), xr(rand_image({2, 3, 32, 32}, 5));
  const SubstitutionFeatures g = substitution_pass(xs, xt, xr, *enc, dec, cfg);
  for (int r = 0; r < 2; ++r) {
    const RefStats m = ref_stats(row(g.m_cs_st.value(), r)), s = ref_stats(row(g.target.style.value(), r));
    EXPECT_NEAR(static_cast<double>(m.mean), static_cast<double>(s.mean), 1e-5);
    EXPECT_NEAR(static_cast<double>(m.std), static_cast<double>(s.std), 1e-5);
  }
  const SubstitutionFeatures h = substitution_pass(xs, xt, xr, *enc, dec, cfg);
  EXPECT_EQ(h.m_cs_sr.value(), g.m_cs_sr.value());
  EXPECT_EQ(h.m_ct_sr.value(), g.m_ct_sr.value());
  EXPECT_EQ(h.m_cs_st.value(), g.m_cs_st.value());
}

TEST(SubstitutionPass, BatchMismatchThrows) {
  const auto enc = make_extractor("frozen-conv-v1");
  const DecouplerConfig cfg = config_for(*enc, 32);
  const ParamSet dec = fresh_decoupler(cfg, 1);
  const Var a(rand_image({2, 3, 32, 32}, 1)), b(rand_image({3, 3, 32, 32}, 2));
  EXPECT_THROW(substitution_pass(a, a, b, *enc, dec, cfg), InvalidInput);
}

TEST(SubstitutionPass, SynthFeaturesDifferentiateBackToGeneratorPixels) {
  const ArchConfig arch = ArchConfig::micro();
  const auto enc = make_extractor("frozen-conv-v1");
  const DecouplerConfig cfg = config_for(*enc, arch.img_res(), 6);
  ParamSet dec = fresh_decoupler(cfg, 4, 0.5);
  Var xs(rand_image({2, 3, 4, 4}, 5)), xt(rand_image({2, 3, 4, 4}, 6)), xr(rand_image({2, 3, 4, 4}, 7));
  const auto m_probe = [&] {
    const SubstitutionFeatures f = substitution_pass(xs, xt, xr, *enc, dec, cfg);
    return ops::add(ops::add(probe(f.m_cs_sr, 1), probe(f.m_ct_sr, 2)), probe(f.m_cs_st, 3));
  };
  auto leaves = leaves_of(dec, "dec.");
  leaves.insert(leaves.end(), {{"x_S", xs}, {"x_T", xt}, {"x_R", xr}});
  const GradCheckResult r = grad_check(m_probe, leaves, 24, 9);
  EXPECT_TRUE(r.ok()) << r.max_rel_err << " " << r.worst;
}
