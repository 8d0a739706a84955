#pragma once

#include "i2p/core_nets.hpp"
#include "i2p/optim.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace i2p {

/// In-memory form of a checkpoint archive.
///
/// On disk (all integers little-endian):
///   8 bytes   magic "I2PCKPT1"
///   u64       manifest length, then that many bytes of UTF-8 JSON
///   u64       tensor count, then per tensor in key order:
///             u32 key length, key bytes, u32 rank, rank x i64 dims,
///             numel x f64 values
///
/// Keys are "<collection>/<param>" for parameters (collections: mapping,
/// synthesis, discriminator, decoupler) and "adam/<collection>/<param>/{m,v}"
/// for optimiser moments.
struct Checkpoint {
  nlohmann::json manifest;
  std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void put_params(Checkpoint& ckpt, const std::string& collection, const ParamSet& params);
/// Rebuilds a ParamSet from every "<collection>/..." key (may be empty).
ParamSet get_params(const Checkpoint& ckpt, const std::string& collection);

void put_adam(Checkpoint& ckpt, const std::string& collection, const AdamState& state);
AdamState get_adam(const Checkpoint& ckpt, const std::string& collection);

/// Serialises every collection of `bundle` plus "arch" into the manifest.
void put_bundle(Checkpoint& ckpt, const ModelBundle& bundle);
/// Reads a bundle back; throws ConfigError if `expected` is given and the
/// stored architecture differs.
ModelBundle get_bundle(const Checkpoint& ckpt, const ArchConfig* expected = nullptr);

}  // namespace i2p
