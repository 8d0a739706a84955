#include "i2p/image_io.hpp"

#include "i2p/errors.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace i2p {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kImageExtensions = {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm",
                                                ".pnm", ".tif", ".tiff", ".webp"};

Tensor mat_to_tensor(const cv::Mat& rgb) {
  const int h = rgb.rows, w = rgb.cols;
  Tensor t({3, h, w});
  for (int y = 0; y < h; ++y) {
    const auto* row = rgb.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        t[(static_cast<std::size_t>(c) * h + y) * w + x] = 2.0 * (row[x][c] / 255.0) - 1.0;
  }
  return t;
}

cv::Mat decode_rgb(const fs::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) return bgr;
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

}  // namespace

unsigned char quantize(double v) {
  const double s = std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 0.5 * 255.0);
  return static_cast<unsigned char>(std::clamp(s, 0.0, 255.0));
}

FewShotDataset load_dataset(const fs::path& dir, int resolution) {
  if (!fs::is_directory(dir)) throw DataError("dataset directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (kImageExtensions.contains(ext)) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (files.empty()) throw DataError("dataset directory " + dir.string() + " contains no image files");

  FewShotDataset ds;
  std::vector<std::string> failures;
  for (const auto& f : files) {
    cv::Mat rgb = decode_rgb(f);
    if (rgb.empty()) {
      failures.push_back(f.string());
      continue;
    }
    const int side = std::min(rgb.rows, rgb.cols);
    cv::Mat square = rgb(cv::Rect((rgb.cols - side) / 2, (rgb.rows - side) / 2, side, side));
    cv::Mat sized;
    if (side == resolution)
      sized = square.clone();
    else
      cv::resize(square, sized, cv::Size(resolution, resolution), 0, 0,
                 side > resolution ? cv::INTER_AREA : cv::INTER_LINEAR);
    ds.images.push_back(mat_to_tensor(sized));
    ds.sources.push_back(f.string());
  }
  if (!failures.empty()) {
    std::string msg = "undecodable image files:";
    for (const auto& f : failures) msg += "\n  " + f;
    throw DataError(msg);
  }
  if (ds.size() > 1000) throw DataError("few-shot dataset holds more than 1000 images");
  return ds;
}

Tensor read_image(const fs::path& path) {
  cv::Mat rgb = decode_rgb(path);
  if (rgb.empty()) throw DataError("cannot decode image " + path.string());
  return mat_to_tensor(rgb);
}

void save_images(const std::vector<Tensor>& images, const fs::path& dir, const std::string& prefix) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%04zu.png", i);
    emit_grid({images[i]}, 1, 1, dir / (prefix + name));
  }
}

void emit_grid(const std::vector<Tensor>& images, int rows, int cols, const fs::path& path,
               const std::vector<std::string>& column_labels) {
  if (images.empty()) throw InvalidInput("emit_grid: no images");
  if (rows < 1 || cols < 1 || static_cast<std::size_t>(rows * cols) < images.size())
    throw InvalidInput("emit_grid: " + std::to_string(images.size()) + " images do not fit a " +
                       std::to_string(rows) + "x" + std::to_string(cols) + " grid");
  const Shape& cell = images.front().shape();
  if (cell.size() != 3 || cell[0] != 3) throw InvalidInput("emit_grid: expected [3,H,W] cells, got " + shape_str(cell));
  for (const auto& img : images)
    if (img.shape() != cell) throw InvalidInput("emit_grid: cells differ in shape");
  const int h = cell[1], w = cell[2];
  const int band = column_labels.empty() ? 0 : 14;

  cv::Mat canvas(band + rows * h, cols * w, CV_8UC3, cv::Scalar(0, 0, 0));
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int r = static_cast<int>(i) / cols, c = static_cast<int>(i) % cols;
    for (int y = 0; y < h; ++y) {
      auto* row = canvas.ptr<cv::Vec3b>(band + r * h + y);
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch)  // canvas is BGR
          row[c * w + x][2 - ch] = quantize(images[i][(static_cast<std::size_t>(ch) * h + y) * w + x]);
    }
  }
  for (std::size_t c = 0; c < column_labels.size() && static_cast<int>(c) < cols; ++c)
    cv::putText(canvas, column_labels[c], cv::Point(static_cast<int>(c) * w + 1, band - 3), cv::FONT_HERSHEY_PLAIN,
                0.8, cv::Scalar(255, 255, 255));

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  try {
    if (!cv::imwrite(path.string(), canvas)) throw DataError("failed to write grid " + path.string());
  } catch (const cv::Exception& e) {
    throw DataError("failed to write grid " + path.string() + ": " + e.what());
  }
}

}  // namespace i2p
