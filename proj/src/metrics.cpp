#include "i2p/metrics.hpp"

#include "i2p/errors.hpp"
#include "i2p/training.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace i2p {

namespace {

constexpr double kSymTol = 1e-9;
constexpr double kNegEigTol = 1e-8;
constexpr double kLpipsEps = 1e-10;

/// Per image: each tap normalised to unit channel vectors, as [C, H*W].
using TapStack = std::vector<Eigen::MatrixXd>;

std::vector<TapStack> normalized_taps(const std::vector<Tensor>& images, const FeatureExtractor& extractor) {
  std::vector<TapStack> out;
  if (images.empty()) return out;
  constexpr int kChunk = 16;
  for (std::size_t b = 0; b < images.size(); b += kChunk) {
    const std::size_t e = std::min(images.size(), b + kChunk);
    const Tensor batch = batch_of({images.begin() + b, images.begin() + e});
    const std::vector<Var> taps = extractor.taps(Var(batch));
    for (std::size_t i = 0; i < e - b; ++i) {
      TapStack stack;
      for (const Var& tap : taps) {
        const Tensor& t = tap.value();
        const int c = t.dim(1), hw = t.dim(2) * t.dim(3);
        Eigen::MatrixXd m(c, hw);
        for (int ch = 0; ch < c; ++ch)
          for (int p = 0; p < hw; ++p) m(ch, p) = t[(i * c + ch) * hw + p];
        for (int p = 0; p < hw; ++p) m.col(p) /= (m.col(p).norm() + kLpipsEps);
        stack.push_back(std::move(m));
      }
      out.push_back(std::move(stack));
    }
  }
  return out;
}

double tap_distance(const TapStack& a, const TapStack& b, const std::vector<double>& weights) {
  double d = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double w = weights[l];
    d += (w * (a[l] - b[l])).squaredNorm() / static_cast<double>(a[l].cols());
  }
  return d;
}

}  // namespace

GaussianSummary summarize(const Eigen::MatrixXd& features) {
  const auto n = features.rows();
  if (n < 2) throw InvalidInput("summarize needs at least 2 samples, got " + std::to_string(n));
  GaussianSummary s;
  s.n = static_cast<int>(n);
  s.mu = features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = features.rowwise() - s.mu.transpose();
  s.sigma = centered.transpose() * centered / static_cast<double>(n - 1);
  return s;
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InvalidInput("sqrtm_psd: matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale)
    throw InvalidInput("sqrtm_psd: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -kNegEigTol * scale)
      throw InvalidInput("sqrtm_psd: matrix has eigenvalue " + std::to_string(ev[i]) + " (not PSD)");
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double fid(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mu.size() != b.mu.size() || a.sigma.rows() != b.sigma.rows())
    throw InvalidInput("fid: summaries have different dimensions");
  const Eigen::MatrixXd root_a = sqrtm_psd(a.sigma);
  Eigen::MatrixXd inner = root_a * b.sigma * root_a;
  inner = 0.5 * (inner + inner.transpose());
  const double cross = sqrtm_psd(inner).trace();
  const double value = (a.mu - b.mu).squaredNorm() + a.sigma.trace() + b.sigma.trace() - 2.0 * cross;
  return std::max(value, 0.0);
}

double lpips(const Tensor& x, const Tensor& x0, const FeatureExtractor& extractor) {
  if (x.shape() != x0.shape())
    throw InvalidInput("lpips: shape " + shape_str(x.shape()) + " vs " + shape_str(x0.shape()));
  const auto taps = normalized_taps({x, x0}, extractor);
  return tap_distance(taps[0], taps[1], extractor.tap_weights());
}

std::optional<double> intra_lpips(const std::vector<Tensor>& generated, const std::vector<Tensor>& centers,
                                  const FeatureExtractor& extractor) {
  if (generated.size() < 2) throw InvalidInput("intra_lpips needs at least 2 generated images");
  if (centers.empty()) throw InvalidInput("intra_lpips needs at least 1 center");
  const std::vector<double> weights = extractor.tap_weights();
  const auto gen = normalized_taps(generated, extractor);
  const auto ctr = normalized_taps(centers, extractor);

  std::vector<std::vector<std::size_t>> clusters(centers.size());
  for (std::size_t i = 0; i < gen.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < ctr.size(); ++c) {
      const double d = tap_distance(gen[i], ctr[c], weights);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    clusters[best].push_back(i);
  }

  double total = 0.0;
  int used = 0;
  for (const auto& members : clusters) {
    if (members.size() < 2) continue;
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        sum += tap_distance(gen[members[i]], gen[members[j]], weights);
        ++pairs;
      }
    total += sum / pairs;
    ++used;
  }
  if (used == 0) return std::nullopt;
  return total / used;
}

Eigen::MatrixXd pooled_embeddings(const std::vector<Tensor>& images, const FeatureExtractor& extractor) {
  if (images.empty()) throw InvalidInput("pooled_embeddings: no images");
  Eigen::MatrixXd out;
  constexpr int kChunk = 16;
  for (std::size_t b = 0; b < images.size(); b += kChunk) {
    const std::size_t e = std::min(images.size(), b + kChunk);
    const Tensor f = extractor.encode(Var(batch_of({images.begin() + b, images.begin() + e}))).value();
    const int c = f.dim(1), hw = f.dim(2) * f.dim(3);
    if (out.size() == 0) out.resize(static_cast<Eigen::Index>(images.size()), c);
    for (std::size_t i = 0; i < e - b; ++i)
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int p = 0; p < hw; ++p) s += f[(i * c + ch) * hw + p];
        out(static_cast<Eigen::Index>(b + i), ch) = s / hw;
      }
  }
  return out;
}

double feature_cosine(const std::vector<Tensor>& set_a, const std::vector<Tensor>& set_b,
                      const FeatureExtractor& extractor) {
  if (set_a.empty() || set_b.empty()) throw InvalidInput("feature_cosine: empty image set");
  const std::size_t n = std::min(set_a.size(), set_b.size());
  const Eigen::MatrixXd ea = pooled_embeddings({set_a.begin(), set_a.begin() + n}, extractor);
  const Eigen::MatrixXd eb = pooled_embeddings({set_b.begin(), set_b.begin() + n}, extractor);
  double total = 0.0;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    const double na = ea.row(i).norm(), nb = eb.row(i).norm();
    if (na == 0.0 || nb == 0.0) throw InvalidInput("feature_cosine: zero embedding for pair " + std::to_string(i));
    total += ea.row(i).dot(eb.row(i)) / (na * nb);
  }
  return total / static_cast<double>(n);
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  if (fid) j["fid"] = *fid;
  if (intra_lpips_requested) j["intra_lpips"] = intra_lpips ? nlohmann::json(*intra_lpips) : nlohmann::json(nullptr);
  if (feature_cosine) j["feature_cosine"] = *feature_cosine;
  j["extractor"] = extractor;
  j["n_real"] = n_real;
  j["n_fake"] = n_fake;
  return j;
}

MetricReport evaluate(const std::vector<Tensor>& real, const std::vector<Tensor>& fake,
                      const std::vector<std::string>& metrics, const FeatureExtractor& extractor) {
  MetricReport r;
  r.extractor = extractor.id();
  r.n_real = static_cast<int>(real.size());
  r.n_fake = static_cast<int>(fake.size());
  for (const std::string& m : metrics) {
    if (m == "fid") {
      r.fid = fid(summarize(pooled_embeddings(real, extractor)), summarize(pooled_embeddings(fake, extractor)));
    } else if (m == "intra_lpips") {
      r.intra_lpips_requested = true;
      r.intra_lpips = intra_lpips(fake, real, extractor);
    } else if (m == "feature_cosine") {
      r.feature_cosine = feature_cosine(real, fake, extractor);
    } else {
      throw ConfigError("unknown metric '" + m + "' (known: fid, intra_lpips, feature_cosine)");
    }
  }
  return r;
}

}  // namespace i2p
