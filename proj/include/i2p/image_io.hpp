#pragma once

#include "i2p/tensor.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace i2p {

struct FewShotDataset {
  std::vector<Tensor> images;  // [3,R,R] each, values in [-1,1]
  std::vector<std::string> sources;

  int size() const { return static_cast<int>(images.size()); }
};

/// Decodes every image file in `dir` (lexicographic order), centre-crops to a
/// square, resizes to `resolution` and maps 8-bit values v to 2 v / 255 - 1.
FewShotDataset load_dataset(const std::filesystem::path& dir, int resolution);

/// Writes each image as <dir>/<prefix><index>.png.
void save_images(const std::vector<Tensor>& images, const std::filesystem::path& dir,
                 const std::string& prefix = "img_");

/// Row-major tiling of equally sized images into one PNG. With labels, a
/// caption band is drawn above the first row.
void emit_grid(const std::vector<Tensor>& images, int rows, int cols, const std::filesystem::path& path,
               const std::vector<std::string>& column_labels = {});

/// Decodes a PNG (or other raster) into [3,H,W] in [-1,1] without resizing.
Tensor read_image(const std::filesystem::path& path);

/// 8-bit quantisation used when writing: round((v + 1) / 2 * 255), clamped.
unsigned char quantize(double v);

}  // namespace i2p
