#include "i2p/checkpoint.hpp"

#include "i2p/errors.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace i2p {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'I', '2', 'P', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("truncated checkpoint " + path.string());
  return v;
}

std::string read_string(std::istream& is, std::size_t n, const std::filesystem::path& path) {
  std::string s(n, '\0');
  if (n > 0 && !is.read(s.data(), static_cast<std::streamsize>(n)))
    throw DataError("truncated checkpoint " + path.string());
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  const std::string manifest = ckpt.manifest.dump();
  put<std::uint64_t>(os, manifest.size());
  os.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
  put<std::uint64_t>(os, ckpt.tensors.size());
  for (const auto& [key, t] : ckpt.tensors) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(key.size()));
    os.write(key.data(), static_cast<std::streamsize>(key.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape()) put<std::int64_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
  }
  if (!os) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || !std::equal(magic, magic + 8, kMagic))
    throw DataError(path.string() + " is not an i2p checkpoint");
  Checkpoint ckpt;
  const auto manifest_len = get<std::uint64_t>(is, path);
  try {
    ckpt.manifest = nlohmann::json::parse(read_string(is, manifest_len, path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corrupt manifest in " + path.string() + ": " + e.what());
  }
  const auto count = get<std::uint64_t>(is, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string key = read_string(is, get<std::uint32_t>(is, path), path);
    const auto rank = get<std::uint32_t>(is, path);
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(static_cast<int>(get<std::int64_t>(is, path)));
    Tensor t(shape);
    if (t.numel() > 0 &&
        !is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(double))))
      throw DataError("truncated tensor '" + key + "' in " + path.string());
    ckpt.tensors.emplace(key, std::move(t));
  }
  return ckpt;
}

void put_params(Checkpoint& ckpt, const std::string& collection, const ParamSet& params) {
  for (const auto& [name, v] : params) ckpt.tensors[collection + "/" + name] = v.value();
}

ParamSet get_params(const Checkpoint& ckpt, const std::string& collection) {
  ParamSet p;
  const std::string prefix = collection + "/";
  for (auto it = ckpt.tensors.lower_bound(prefix); it != ckpt.tensors.end() && it->first.starts_with(prefix); ++it)
    p.add(it->first.substr(prefix.size()), it->second);
  return p;
}

void put_adam(Checkpoint& ckpt, const std::string& collection, const AdamState& state) {
  for (const auto& [name, m] : state.m) ckpt.tensors["adam/" + collection + "/" + name + "/m"] = m;
  for (const auto& [name, v] : state.v) ckpt.tensors["adam/" + collection + "/" + name + "/v"] = v;
  ckpt.manifest["adam_steps"][collection] = state.steps;
}

AdamState get_adam(const Checkpoint& ckpt, const std::string& collection) {
  AdamState s;
  const std::string prefix = "adam/" + collection + "/";
  for (auto it = ckpt.tensors.lower_bound(prefix); it != ckpt.tensors.end() && it->first.starts_with(prefix); ++it) {
    const std::string rest = it->first.substr(prefix.size());
    const std::string name = rest.substr(0, rest.size() - 2);
    (rest.ends_with("/m") ? s.m : s.v)[name] = it->second;
  }
  if (ckpt.manifest.contains("adam_steps") && ckpt.manifest["adam_steps"].contains(collection))
    s.steps = ckpt.manifest["adam_steps"][collection].get<std::int64_t>();
  return s;
}

void put_bundle(Checkpoint& ckpt, const ModelBundle& bundle) {
  ckpt.manifest["arch"] = bundle.arch;
  put_params(ckpt, "mapping", bundle.mapping);
  put_params(ckpt, "synthesis", bundle.synthesis);
  put_params(ckpt, "discriminator", bundle.discriminator);
  put_params(ckpt, "decoupler", bundle.decoupler);
}

ModelBundle get_bundle(const Checkpoint& ckpt, const ArchConfig* expected) {
  if (!ckpt.manifest.contains("arch")) throw ConfigError("checkpoint manifest has no architecture record");
  ModelBundle b;
  b.arch = ckpt.manifest["arch"].get<ArchConfig>();
  if (expected && !(*expected == b.arch))
    throw ConfigError("checkpoint architecture " + ckpt.manifest["arch"].dump() + " does not match requested " +
                      nlohmann::json(*expected).dump());
  b.mapping = get_params(ckpt, "mapping");
  b.synthesis = get_params(ckpt, "synthesis");
  b.discriminator = get_params(ckpt, "discriminator");
  b.decoupler = get_params(ckpt, "decoupler");
  // Shape check against a fresh instance of the recorded architecture.
  const ModelBundle ref = ModelBundle::create(b.arch, 0);
  auto check = [](const ParamSet& got, const ParamSet& want, const char* what) {
    if (got.size() != want.size()) throw ConfigError(std::string("checkpoint ") + what + " parameter count mismatch");
    for (const auto& [name, v] : want)
      if (!got.contains(name) || got.at(name).shape() != v.shape())
        throw ConfigError(std::string("checkpoint ") + what + " parameter '" + name + "' missing or misshapen");
  };
  check(b.mapping, ref.mapping, "mapping");
  check(b.synthesis, ref.synthesis, "synthesis");
  check(b.discriminator, ref.discriminator, "discriminator");
  return b;
}

}  // namespace i2p
