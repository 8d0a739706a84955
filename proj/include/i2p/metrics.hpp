#pragma once

#include "i2p/substitution.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace i2p {

struct GaussianSummary {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;  // unbiased sample covariance
  int n = 0;
};

/// Mean and unbiased covariance of the rows of `features` (needs >= 2 rows).
GaussianSummary summarize(const Eigen::MatrixXd& features);

/// Principal square root of a symmetric PSD matrix by eigendecomposition.
/// With s = max(1, max|a_ij|), eigenvalues in [-1e-8 s, 0) are treated as
/// zero; anything lower, or an asymmetry above 1e-9 s, is rejected.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& a);

/// Frechet distance between two Gaussian summaries, using the symmetric form
/// tr sqrt(S1^{1/2} S2 S1^{1/2}) for the cross term. Clipped at 0.
double fid(const GaussianSummary& a, const GaussianSummary& b);

/// Channel-normalised squared feature difference summed over the extractor's
/// taps, each averaged over spatial positions.
double lpips(const Tensor& x, const Tensor& x0, const FeatureExtractor& extractor);

/// Cluster `generated` around their LPIPS-nearest `centers` and average the
/// within-cluster pairwise LPIPS over clusters with >= 2 members.
/// nullopt when no cluster has two members.
std::optional<double> intra_lpips(const std::vector<Tensor>& generated, const std::vector<Tensor>& centers,
                                  const FeatureExtractor& extractor);

/// Spatially averaged semantic features, one row per image.
Eigen::MatrixXd pooled_embeddings(const std::vector<Tensor>& images, const FeatureExtractor& extractor);

/// Mean cosine between pooled embeddings of index-paired images (sets are
/// truncated to the shorter length).
double feature_cosine(const std::vector<Tensor>& set_a, const std::vector<Tensor>& set_b,
                      const FeatureExtractor& extractor);

struct MetricReport {
  std::optional<double> fid;
  std::optional<double> intra_lpips;
  std::optional<double> feature_cosine;
  bool intra_lpips_requested = false;
  std::string extractor;
  int n_real = 0;
  int n_fake = 0;

  /// Flat key -> number document; an undefined Intra-LPIPS is written as null.
  nlohmann::json to_json() const;
};

/// Computes the selected metrics ("fid", "intra_lpips", "feature_cosine").
/// Intra-LPIPS uses the real images as cluster centres; feature_cosine pairs
/// real and fake by index.
MetricReport evaluate(const std::vector<Tensor>& real, const std::vector<Tensor>& fake,
                      const std::vector<std::string>& metrics, const FeatureExtractor& extractor);

}  // namespace i2p
