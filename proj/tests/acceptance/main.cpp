// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "i2p/consistency.hpp"
#include "i2p/domains.hpp"
#include "i2p/errors.hpp"
#include "i2p/injection.hpp"
#include "i2p/metrics.hpp"
#include "i2p/ops.hpp"
#include "i2p/run.hpp"
#include "i2p/training.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/reference.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace i2p;
using namespace i2p::testing;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kInjectFixedTol = 1e-6;
constexpr double kStatsTol = 1e-5;
constexpr double kAffineTol = 1e-8;
constexpr double kAdainFixedTol = 1e-12;
constexpr double kModulateTol = 1e-12;
constexpr double kScaleInvTol = 1e-9;
constexpr double kZeroLogitTol = 1e-9;
constexpr double kFidRefTol = 1e-6;
constexpr double kFidLawTol = 1e-8;

constexpr double kBudget1 = 5, kBudget2 = 5, kBudget3 = 5, kBudget4 = 120, kBudget5 = 10, kBudget6 = 10,
                 kBudget7 = 60, kBudget8 = 1800, kBudget9 = 7200;

constexpr int kPretrainIters = 2000;
constexpr int kTargetImages = 10;
constexpr int kEvalSamples = 64;
constexpr std::uint64_t kEvalSeed = 99;

/// Collects named checks; any failure fails the criterion.
class Checks {
 public:
  void that(bool ok, const std::string& what) {
    ++count_;
    if (!ok) failures_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << got << " want " << want << " tol " << tol;
    that(std::abs(got - want) <= tol, os.str());
  }
  void note(const std::string& s) { notes_.push_back(s); }

  bool ok() const { return failures_.empty() && count_ > 0; }
  int count() const { return count_; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  int count_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

fs::path work_root() {
  static const fs::path root = scratch_dir("acceptance");
  return root;
}

std::vector<double> row_of(const Tensor& t, int r, int d) {
  return {t.data() + static_cast<std::size_t>(r) * d, t.data() + static_cast<std::size_t>(r + 1) * d};
}

double max_row_stat_dev(const Tensor& a, const Tensor& b, int d) {
  double worst = 0.0;
  for (int r = 0; r < static_cast<int>(a.numel()) / d; ++r) {
    const RefStats sa = ref_stats(row_of(a, r, d)), sb = ref_stats(row_of(b, r, d));
    worst = std::max({worst, static_cast<double>(std::abs(sa.mean - sb.mean)),
                      static_cast<double>(std::abs(sa.std - sb.std))});
  }
  return worst;
}

// 1. Injection algebra.
void injection_algebra(Checks& c) {
  const int n = 4, layers = 4, d = 64;
  const Tensor wt = randn({n, layers, d}, 1, 0.7);
  Tensor ws = randn({n, layers, d}, 2, 1.9);
  for (std::size_t i = 0; i < ws.numel(); i += 7) ws[i] += 0.4;
  const Var vt(wt), vs(ws);

  c.that(max_abs_diff(inject(vt, vs, {0.0}).value(), wt) == 0.0, "inject(w_T, w_S, 0) == w_T bit for bit");

  const std::vector<double> alphas{0.1, 0.25, 0.5, 0.75, 0.9, 1.0};
  for (double a : alphas)
    c.near(max_abs_diff(inject(vt, vt, {a}).value(), wt), 0.0, kInjectFixedTol,
           "inject(w, w, " + std::to_string(a) + ") fixed point");

  c.near(max_row_stat_dev(inject(vt, vs, {1.0}).value(), ws, d), 0.0, kStatsTol, "alpha=1 per-layer stats vs w_S");

  const Tensor f0 = inject(vt, vs, {0.0}).value(), f1 = inject(vt, vs, {1.0}).value();
  double residual = 0.0;
  for (double a : alphas) {
    const Tensor fa = inject(vt, vs, {a}).value();
    for (std::size_t i = 0; i < fa.numel(); ++i)
      residual = std::max(residual, std::abs(fa[i] - ((1 - a) * f0[i] + a * f1[i])));
  }
  c.near(residual, 0.0, kAffineTol, "affine-in-alpha residual");
}

// 2. AdaIN and the reconstruction modulator.
void adain_modulator(Checks& c) {
  const int rows = 6, d = 64;
  const Tensor x = randn({rows, d}, 3, 1.3), s = randn({rows, d}, 4, 2.7);
  Tensor s_shift = s;
  for (std::size_t i = 0; i < s_shift.numel(); ++i) s_shift[i] += 1.5;

  c.near(max_abs_diff(adain(Var(x), Var(x), d).value(), x), 0.0, kAdainFixedTol, "adain(x, x) == x");
  const Tensor out = adain(Var(x), Var(s_shift), d).value();
  c.near(max_row_stat_dev(out, s_shift, d), 0.0, kStatsTol, "adain output stats vs style stats");
  double worst_ref = 0.0;
  for (int r = 0; r < rows; ++r) {
    const auto ref = ref_adain(row_of(x, r, d), row_of(s_shift, r, d));
    for (int i = 0; i < d; ++i) worst_ref = std::max(worst_ref, std::abs(out[r * d + i] - ref[i]));
  }
  c.near(worst_ref, 0.0, 1e-12, "adain vs long-double reference");
  c.near(max_abs_diff(modulate(Var(x), Var(s_shift)).value(), out), 0.0, kModulateTol, "modulate == adain");
}

// 3. Losses.
void loss_suite(Checks& c) {
  const auto scalar = [](double v) { return Var(Tensor({1}, {v})); };
  c.that(ops::smooth_l1(scalar(0.0), scalar(0.5)).item() == 0.125, "smooth_l1 at 0.5 == 0.125");
  c.that(ops::smooth_l1(scalar(0.0), scalar(3.0)).item() == 2.5, "smooth_l1 at 3 == 2.5");

  const Tensor m1 = randn({5, 16}, 5), m2 = randn({5, 16}, 6), m3 = randn({5, 16}, 7);
  const double base = synthesis_loss(Var(m1), Var(m2), Var(m3)).item();
  for (double k : {1e-3, 0.1, 7.0, 1e3}) {
    c.near(synthesis_loss(ops::scale(Var(m1), k), Var(m2), Var(m3)).item(), base, kScaleInvTol, "L_r scale m1");
    c.near(synthesis_loss(Var(m1), ops::scale(Var(m2), k), Var(m3)).item(), base, kScaleInvTol, "L_r scale m2");
    c.near(synthesis_loss(Var(m1), Var(m2), ops::scale(Var(m3), k)).item(), base, kScaleInvTol, "L_r scale m3");
  }

  const LossWeights w;
  const Tensor v = randn({4 * 100}, 8);
  bool exact = true;
  for (int i = 0; i < 100; ++i) {
    const double a = v[4 * i], lc = std::abs(v[4 * i + 1]), ls = std::abs(v[4 * i + 2]), lr = std::abs(v[4 * i + 3]);
    exact = exact && total_loss(a, lc, ls, lr, w) == a + w.lambda * (lc + ls + lr);
    const Var g = total_loss(scalar(a), scalar(lc), scalar(ls), scalar(lr), w);
    exact = exact && g.item() == a + w.lambda * (lc + ls + lr);
  }
  c.that(exact, "total loss at default weights == L_adv + lambda (L_c + L_s + L_r) exactly");

  const Var zero(Tensor({8}));
  c.near(discriminator_loss(zero, zero).item(), 2.0 * std::log(2.0), kZeroLogitTol, "critic loss at zero logits");
  c.near(generator_loss(zero).item(), std::log(2.0), kZeroLogitTol, "generator loss at zero logits");
}

// 4. Finite-difference gradient checks on micro configurations.
void gradient_checks(Checks& c) {
  const ArchConfig arch = ArchConfig::micro();
  const int res = arch.img_res();
  ModelBundle src = ModelBundle::create(arch, 21);
  ModelBundle tgt = ModelBundle::create(arch, 22);
  AdaptConfig cfg;
  cfg.feature_dim = 6;
  const AdaptContext ctx = AdaptContext::create(src, cfg);
  std::mt19937_64 dec_rng(23);
  ParamSet dec = init_decoupler(ctx.decoupler, arch.init_std, dec_rng);
  const FeatureExtractor& enc = *ctx.encoder;

  const auto run = [&](const std::string& what, const std::function<Var()>& loss, std::vector<NamedLeaf> leaves,
                       std::size_t per_leaf, std::uint64_t seed) {
    const GradCheckResult r = grad_check(loss, leaves, per_leaf, seed);
    std::ostringstream os;
    os << what << ": max rel err " << r.max_rel_err << " over " << r.checked << " entries";
    if (!r.ok()) os << " (worst " << r.worst << ")";
    c.that(r.ok(), os.str());
    c.note(os.str());
  };
  const auto with = [](std::vector<NamedLeaf> a, std::initializer_list<NamedLeaf> b) {
    a.insert(a.end(), b);
    return a;
  };

  Var z(randn({2, arch.z_dim}, 31));
  run("mapping", [&] { return probe(map_latent(tgt.mapping, arch, z), 1); },
      with(leaves_of(tgt.mapping, "F."), {{"z", z}}), 30, 2);
  Var w(randn({2, arch.num_layers(), arch.w_dim}, 32));
  run("synthesis", [&] { return probe(synthesize(tgt.synthesis, arch, w), 3); },
      with(leaves_of(tgt.synthesis, "G."), {{"w", w}}), 30, 4);
  Var x(rand_image({2, 3, res, res}, 33));
  run("discriminator", [&] { return probe(discriminate(tgt.discriminator, arch, x), 5); },
      with(leaves_of(tgt.discriminator, "D."), {{"x", x}}), 30, 6);
  run("encoder", [&] { return probe(enc.encode(x), 7); }, {{"x", x}}, 48, 8);

  Var wt(randn({2, arch.num_layers(), arch.w_dim}, 34)), ws(randn({2, arch.num_layers(), arch.w_dim}, 35, 2.0));
  for (double a : {0.5, 1.0})
    run("injection alpha=" + std::to_string(a), [&] { return probe(inject(wt, ws, {a}), 9); },
        {{"w_T", wt}, {"w_S", ws}}, 48, 10);

  Var feat(randn({2, ctx.decoupler.feature_channels, ctx.decoupler.feature_res, ctx.decoupler.feature_res}, 36));
  run("decoupler",
      [&] {
        const StyleContent sc = decouple(dec, ctx.decoupler, feat);
        return ops::add(probe(sc.style, 11), probe(sc.content, 12));
      },
      with(leaves_of(dec, "dec."), {{"features", feat}}), 24, 13);
  Var cv(randn({3, 6}, 37)), sv(randn({3, 6}, 38));
  run("modulator", [&] { return probe(modulate(cv, sv), 14); }, {{"C", cv}, {"S", sv}}, 18, 15);

  Var xs(rand_image({2, 3, res, res}, 39)), xt(rand_image({2, 3, res, res}, 40)), xr(rand_image({2, 3, res, res}, 41));
  const auto pixel_leaves = with(leaves_of(dec, "dec."), {{"x_S", xs}, {"x_T", xt}, {"x_R", xr}});
  const auto features = [&] { return substitution_pass(xs, xt, xr, enc, dec, ctx.decoupler); };
  run("content loss from pixels", [&] { const auto f = features(); return content_loss(f.source.content, f.target.content); },
      pixel_leaves, 16, 16);
  run("style loss from pixels", [&] { const auto f = features(); return style_loss(f.target.style, f.raw.style); },
      pixel_leaves, 16, 17);
  run("synthesis loss from pixels",
      [&] { const auto f = features(); return synthesis_loss(f.m_cs_sr, f.m_ct_sr, f.m_cs_st); }, pixel_leaves, 16, 18);
  run("adversarial losses from pixels",
      [&] {
        const AdversarialLosses l = adversarial_losses(tgt.discriminator, arch, xr, xt);
        return ops::add(l.loss_d, ops::scale(l.loss_g, 0.5));
      },
      with(leaves_of(tgt.discriminator, "D."), {{"x_real", xr}, {"x_fake", xt}}), 20, 19);

  // Full generator objective: latent -> injection -> synthesis -> encoder ->
  // decoupler -> modulator -> weighted losses, into F_T, G_T and the decoupler.
  Var zz(randn({2, arch.z_dim}, 42));
  Var raw(rand_image({2, 3, res, res}, 43));
  const LossWeights weights = LossWeights::from_ratio(0.8, 0.3);
  const auto objective = [&] {
    const Var w_s = map_latent(src.mapping, arch, zz);
    const Var w_inj = inject(map_latent(tgt.mapping, arch, zz), w_s, {0.5});
    const Var x_s = synthesize(src.synthesis, arch, w_s);
    const Var x_t = synthesize(tgt.synthesis, arch, w_inj);
    const SubstitutionFeatures f = substitution_pass(x_s, x_t, raw, enc, dec, ctx.decoupler);
    return total_loss(generator_loss(discriminate(tgt.discriminator, arch, x_t)),
                      content_loss(f.source.content, f.target.content), style_loss(f.target.style, f.raw.style),
                      synthesis_loss(f.m_cs_sr, f.m_ct_sr, f.m_cs_st), weights);
  };
  std::vector<NamedLeaf> all = leaves_of(tgt.mapping, "F_T.");
  for (auto& l : leaves_of(tgt.synthesis, "G_T.")) all.push_back(l);
  for (auto& l : leaves_of(dec, "dec.")) all.push_back(l);
  all.emplace_back("x_R", raw);
  run("total generator objective", objective, all, 6, 20);

  // R1: surrogate parameter gradient against differences of the penalty value.
  const Tensor x_real = rand_image({2, 3, res, res}, 44);
  const double gamma = 0.5;
  tgt.discriminator.zero_grad();
  backward(r1_penalty(tgt.discriminator, arch, x_real, gamma).surrogate);
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& [name, p] : tgt.discriminator) {
    Var v = p;
    const Tensor analytic = v.grad();
    for (std::size_t i = 0; i < v.numel(); i += std::max<std::size_t>(1, v.numel() / 10)) {
      const double saved = v.value()[i];
      v.mutable_value()[i] = saved + kGradStep;
      const double up = r1_penalty(tgt.discriminator, arch, x_real, gamma).value;
      v.mutable_value()[i] = saved - kGradStep;
      const double down = r1_penalty(tgt.discriminator, arch, x_real, gamma).value;
      v.mutable_value()[i] = saved;
      const double numeric = (up - down) / (2 * kGradStep);
      worst = std::max(worst, std::abs(analytic[i] - numeric) /
                                  std::max({std::abs(analytic[i]), std::abs(numeric), kGradFloor}));
      ++checked;
    }
  }
  std::ostringstream os;
  os << "R1 penalty: max rel err " << worst << " over " << checked << " entries";
  c.that(checked > 0 && worst < kGradTol, os.str());
  c.note(os.str());
}

// 5. FID against the long-double reference.
void fid_oracle(Checks& c) {
  const int d = 8;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  const auto random_summary = [&](double shift) {
    GaussianSummary s;
    s.mu = Eigen::VectorXd(d);
    for (int i = 0; i < d; ++i) s.mu(i) = shift + normal(rng);
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
    s.sigma = a * a.transpose() / d + 0.05 * Eigen::MatrixXd::Identity(d, d);
    s.n = 100;
    return s;
  };
  const auto lvec = [](const Eigen::VectorXd& v) { return std::vector<long double>(v.data(), v.data() + v.size()); };
  const auto lmat = [](const Eigen::MatrixXd& m) {
    LMatrix out(static_cast<std::size_t>(m.rows()), std::vector<long double>(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
  };

  double worst = 0.0;
  for (int p = 0; p < 20; ++p) {
    const GaussianSummary a = random_summary(0.0), b = random_summary(0.3);
    const double ref = static_cast<double>(ref_fid(lvec(a.mu), lmat(a.sigma), lvec(b.mu), lmat(b.sigma)));
    worst = std::max(worst, std::abs(fid(a, b) - ref));
    c.near(fid(a, b), ref, kFidRefTol, "pair " + std::to_string(p) + " vs reference");
    c.near(fid(a, b), fid(b, a), kFidLawTol, "pair " + std::to_string(p) + " symmetry");
  }
  char buf[80];
  std::snprintf(buf, sizeof(buf), "max |fid - reference| over 20 pairs: %.3e", worst);
  c.note(buf);

  const GaussianSummary a = random_summary(0.0);
  c.near(fid(a, a), 0.0, kFidLawTol, "fid(a, a)");
  GaussianSummary shifted = a;
  Eigen::VectorXd delta(d);
  delta << 1, -2, 0.5, 0, 3, 0.25, -1, 2;
  shifted.mu += delta;
  c.near(fid(a, shifted), delta.squaredNorm(), kFidLawTol, "mean shift law");
}

// 6. Intra-LPIPS against brute-force enumeration.
void intra_lpips_oracle(Checks& c) {
  const auto enc = make_extractor("frozen-conv-v1");
  const std::vector<Tensor> centers = sample_domain("two-tone-shapes", 2, 32, 61);
  const int owner[6] = {0, 1, 0, 1, 0, 0};
  std::vector<Tensor> generated;
  for (int i = 0; i < 6; ++i) {
    Tensor g = centers[static_cast<std::size_t>(owner[i])];
    const Tensor noise = randn(g.shape(), 70 + i, 0.05 * (1 + i));
    for (std::size_t k = 0; k < g.numel(); ++k) g[k] += noise[k];
    generated.push_back(g);
  }
  const auto brute = brute_intra_lpips(generated, centers, [&](const Tensor& a, const Tensor& b) { return lpips(a, b, *enc); });
  const auto got = intra_lpips(generated, centers, *enc);
  c.that(brute.has_value() && got.has_value(), "both defined");
  if (brute && got) {
    std::ostringstream os;
    os.precision(17);
    os << "intra_lpips " << *got << " brute force " << *brute;
    c.that(*got == *brute, os.str());
    c.note(os.str());
  }
}

// 7. alpha = 0, lambda = 0 adaptation equals plain fine-tuning bit for bit.
void reduction_equivalence(Checks& c) {
  ModelBundle src = ModelBundle::create(ArchConfig{}, 71);
  src.set_trainable(false);
  FewShotDataset data;
  data.images = sample_domain("two-tone-shapes-hue90", kTargetImages, src.arch.img_res(), 72);
  AdaptConfig cfg;
  cfg.alpha = 0.0;
  cfg.lambda = 0.0;
  cfg.iterations = 20;
  cfg.seed = 73;
  cfg.checkpoint_every = 0;
  const AdaptResult full = adapt(src, data, cfg, work_root() / "reduction");

  const AdaptContext ctx = AdaptContext::create(src, cfg);
  TrainState plain = init_train_state(ctx, cfg);
  for (int i = 0; i < cfg.iterations; ++i) finetune_step(plain, data, cfg);

  c.that(full.target.mapping.checksum() == plain.target.mapping.checksum(), "mapping bit-identical");
  c.that(full.target.synthesis.checksum() == plain.target.synthesis.checksum(), "synthesis bit-identical");
  c.that(full.target.discriminator.checksum() == plain.target.discriminator.checksum(), "critic bit-identical");
  c.that(full.target.mapping.max_abs_diff(src.mapping) > 0.0, "parameters actually moved");
  bool same_losses = full.log.size() == plain.history.size();
  for (std::size_t i = 0; same_losses && i < full.log.size(); ++i)
    same_losses = full.log[i].l_adv_d == plain.history[i].l_adv_d && full.log[i].l_adv_g == plain.history[i].l_adv_g;
  c.that(same_losses, "adversarial losses bit-identical at every step");
}

struct Shared {
  fs::path source_ckpt;
  fs::path target_dir;
};

// 8. Directional toy experiment.
void toy_experiment(Checks& c, Shared& shared) {
  const fs::path root = work_root() / "toy";
  fs::create_directories(root);
  PretrainConfig pc;
  pc.iterations = kPretrainIters;
  const PretrainResult pre = pretrain_source("two-tone-shapes", pc);
  shared.source_ckpt = root / "source.ckpt";
  save_checkpoint(shared.source_ckpt, source_checkpoint(pre.source, pc, "two-tone-shapes"));
  const ModelBundle source = load_source(shared.source_ckpt);

  shared.target_dir = root / "target";
  save_images(sample_domain("two-tone-shapes-hue90", kTargetImages, source.arch.img_res(), 0), shared.target_dir);
  const FewShotDataset data = load_dataset(shared.target_dir, source.arch.img_res());

  const auto enc = make_extractor("frozen-conv-v1");
  const std::vector<Tensor> source_samples = generate_images(source, kEvalSamples, kEvalSeed);
  int diversity_wins = 0, identity_wins = 0;
  bool finite = true;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    double intra[2] = {0, 0}, cosine[2] = {0, 0};
    for (int arm = 0; arm < 2; ++arm) {
      AdaptConfig cfg;
      cfg.seed = seed;
      if (arm == 1) {
        cfg.alpha = 0.0;
        cfg.lambda = 0.0;
      }
      const std::string name = (arm == 0 ? "i2p_" : "baseline_") + std::to_string(seed);
      const AdaptResult r = adapt(source, data, cfg, root / name);
      for (const LossReport& rep : r.log) finite = finite && rep.all_finite();
      const auto samples = Generator::adapted(r.target, source, cfg.injection()).generate(kEvalSamples, kEvalSeed);
      const auto il = intra_lpips(samples, data.images, *enc);
      intra[arm] = il ? *il : -1.0;
      cosine[arm] = feature_cosine(source_samples, samples, *enc);
    }
    diversity_wins += intra[0] >= intra[1];
    identity_wins += cosine[0] > cosine[1];
    char buf[200];
    std::snprintf(buf, sizeof(buf), "seed %llu: intra_lpips %.4f vs %.4f, feature_cosine %.4f vs %.4f (method vs baseline)",
                  static_cast<unsigned long long>(seed), intra[0], intra[1], cosine[0], cosine[1]);
    c.note(buf);
  }
  c.that(finite, "(a) all logged losses finite");
  c.that(diversity_wins >= 2, "(b) intra_lpips >= baseline in " + std::to_string(diversity_wins) + " of 3 seeds");
  c.that(identity_wins >= 2, "(c) feature_cosine > baseline in " + std::to_string(identity_wins) + " of 3 seeds");
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(I2P_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// 9. Ablation mechanics through the command line.
void ablation_mechanics(Checks& c, const Shared& shared) {
  if (shared.source_ckpt.empty() || !fs::is_regular_file(shared.source_ckpt)) {
    c.that(false, "source checkpoint from criterion 8 is missing");
    return;
  }
  const fs::path root = work_root() / "ablate";
  fs::create_directories(root);
  const std::string common = "--source " + shared.source_ckpt.string() + " --data " + shared.target_dir.string();
  const AdaptConfig defaults;

  const auto check_run = [&](const fs::path& dir, const std::string& key, const std::string& value) {
    const std::string tag = dir.filename().string();
    c.that(fs::is_regular_file(dir / "config.txt"), tag + ": config.txt");
    c.that(fs::is_regular_file(dir / "grid.png"), tag + ": grid.png");
    std::ifstream cfg_in(dir / "config.txt");
    bool recorded = false;
    for (std::string line; std::getline(cfg_in, line);)
      if (line.starts_with(key + " = ")) recorded = std::stod(line.substr(key.size() + 3)) == std::stod(value);
    c.that(recorded, tag + ": resolved config records " + key + " = " + value);
    const auto rows = read_csv(dir / "loss.csv");
    c.that(!rows.empty() && rows[0].size() == 8 && rows[0][0] == "step", tag + ": loss.csv header");
    c.that(rows.size() == static_cast<std::size_t>(defaults.iterations) + 1, tag + ": loss.csv has one row per step");
    bool finite = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      for (std::size_t k = 1; k < rows[i].size(); ++k) finite = finite && std::isfinite(std::stod(rows[i][k]));
    c.that(finite, tag + ": logged losses finite");
  };

  const std::vector<std::pair<std::string, std::vector<std::string>>> sweeps{
      {"alpha", {"0.1", "0.3", "0.5", "0.7", "0.9"}}, {"loss_ratio_r", {"0", "0.25", "0.5", "0.75", "1"}}};
  for (const auto& [key, values] : sweeps) {
    std::string joined;
    for (const auto& v : values) joined += (joined.empty() ? "" : ",") + v;
    const fs::path out = root / key;
    const int code = run_cli("ablate " + common + " --ablate-key " + key + " --ablate-values " + joined + " --out " +
                                 out.string(),
                             root / (key + ".log"));
    c.that(code == 0, "ablate " + key + " exit code " + std::to_string(code));
    for (const auto& v : values) check_run(out / (key + "=" + v), key, v);
  }

  const fs::path full = root / "alpha_1";
  const int code = run_cli("adapt " + common + " --alpha 1 --out " + full.string(), root / "alpha_1.log");
  c.that(code == 0, "alpha=1 adapt exit code " + std::to_string(code));
  check_run(full, "alpha", "1");
  const auto stats = read_csv(full / "injection_stats.csv");
  c.that(stats.size() == static_cast<std::size_t>(defaults.iterations) + 1, "alpha=1: one stats row per logged step");
  double worst = 0.0;
  for (std::size_t i = 1; i < stats.size(); ++i) worst = std::max({worst, std::stod(stats[i][1]), std::stod(stats[i][2])});
  c.near(worst, 0.0, kStatsTol, "alpha=1: max injected-vs-source stat deviation over all logged steps");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<void(Checks&)> body;
  };
  Shared shared;
  const std::vector<Criterion> criteria{
      {1, "injection algebra", kBudget1, injection_algebra},
      {2, "adain and modulator", kBudget2, adain_modulator},
      {3, "loss suite", kBudget3, loss_suite},
      {4, "gradient checks", kBudget4, gradient_checks},
      {5, "fid oracle", kBudget5, fid_oracle},
      {6, "intra-lpips oracle", kBudget6, intra_lpips_oracle},
      {7, "reduction equivalence", kBudget7, reduction_equivalence},
      {8, "toy adaptation experiment", kBudget8, [&](Checks& c) { toy_experiment(c, shared); }},
      {9, "ablation mechanics", kBudget9, [&](Checks& c) { ablation_mechanics(c, shared); }},
  };

  int failed = 0;
  for (const Criterion& cr : criteria) {
    Checks checks;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(checks);
    } catch (const std::exception& e) {
      checks.that(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= cr.budget_s;
    const bool pass = checks.ok() && in_time;
    failed += !pass;
    std::printf("criterion %d %s: %s (%d checks, %.1fs of %.0fs budget)\n", cr.id, cr.name.c_str(),
                pass ? "PASS" : "FAIL", checks.count(), secs, cr.budget_s);
    for (const auto& n : checks.notes()) std::printf("    %s\n", n.c_str());
    for (const auto& f : checks.failures()) std::printf("    failed: %s\n", f.c_str());
    if (!in_time) std::printf("    failed: over the time budget\n");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
