#include "i2p/domains.hpp"

#include "i2p/errors.hpp"

#include <array>
#include <cmath>

namespace i2p {

namespace {

constexpr const char* kBase = "two-tone-shapes";

std::array<double, 3> hsv_to_rgb(double h_deg, double s, double v) {
  const double h = std::fmod(std::fmod(h_deg, 360.0) + 360.0, 360.0) / 60.0;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

ShapesDomain ShapesDomain::parse(const std::string& id) {
  if (id == kBase) return {id, 0.0};
  const std::string prefix = std::string(kBase) + "-hue";
  if (id.starts_with(prefix)) {
    try {
      std::size_t used = 0;
      const double deg = std::stod(id.substr(prefix.size()), &used);
      if (used == id.size() - prefix.size()) return {id, deg};
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown procedural domain '" + id + "' (known: two-tone-shapes, two-tone-shapes-hue<deg>)");
}

Tensor ShapesDomain::sample(int res, std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto bg = hsv_to_rgb(210.0 + 30.0 * u(rng) + hue_shift_deg, 0.5 + 0.3 * u(rng), 0.3 + 0.2 * u(rng));
  const auto fg = hsv_to_rgb(20.0 + 25.0 * u(rng) + hue_shift_deg, 0.7 + 0.2 * u(rng), 0.8 + 0.2 * u(rng));
  const int kind = static_cast<int>(u(rng) * 3.0) % 3;
  const double cx = (0.3 + 0.4 * u(rng)) * res;
  const double cy = (0.3 + 0.4 * u(rng)) * res;
  const double r = (0.15 + 0.15 * u(rng)) * res;
  const double angle = 2.0 * M_PI * u(rng);

  std::array<double, 6> tri{};
  for (int k = 0; k < 3; ++k) {
    tri[2 * k] = cx + r * std::cos(angle + k * 2.0 * M_PI / 3.0);
    tri[2 * k + 1] = cy + r * std::sin(angle + k * 2.0 * M_PI / 3.0);
  }

  Tensor img({3, res, res});
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      bool inside = false;
      if (kind == 0) {
        inside = (px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r;
      } else if (kind == 1) {
        inside = std::abs(px - cx) <= 0.8 * r && std::abs(py - cy) <= 0.8 * r;
      } else {
        const double e0 = edge(tri[0], tri[1], tri[2], tri[3], px, py);
        const double e1 = edge(tri[2], tri[3], tri[4], tri[5], px, py);
        const double e2 = edge(tri[4], tri[5], tri[0], tri[1], px, py);
        inside = (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
      }
      const auto& c = inside ? fg : bg;
      for (int ch = 0; ch < 3; ++ch) img[(static_cast<std::size_t>(ch) * res + y) * res + x] = 2.0 * c[ch] - 1.0;
    }
  }
  return img;
}

std::vector<Tensor> sample_domain(const std::string& id, int count, int res, std::uint64_t seed) {
  const ShapesDomain domain = ShapesDomain::parse(id);
  std::mt19937_64 rng(seed);
  std::vector<Tensor> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(domain.sample(res, rng));
  return out;
}

}  // namespace i2p
