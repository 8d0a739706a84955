#pragma once

#include "i2p/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace i2p {

/// Built-in procedural image distributions.
///
/// "two-tone-shapes": one filled circle, square or triangle in a warm colour
/// on a cool background, random placement and size.
/// "two-tone-shapes-hue<deg>": the same family with both hues rotated by
/// <deg> degrees.
struct ShapesDomain {
  std::string id;
  double hue_shift_deg = 0.0;

  static ShapesDomain parse(const std::string& id);
  /// One [3,res,res] image in [-1,1].
  Tensor sample(int res, std::mt19937_64& rng) const;
};

std::vector<Tensor> sample_domain(const std::string& id, int count, int res, std::uint64_t seed);

}  // namespace i2p
