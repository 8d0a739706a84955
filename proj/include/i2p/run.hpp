#pragma once

#include "i2p/config.hpp"
#include "i2p/metrics.hpp"

#include <filesystem>
#include <vector>

namespace i2p {

/// Pretrains on cfg.domain and writes the source checkpoint to cfg.out
/// (resolved config beside it as <out>.config.txt).
PretrainResult run_pretrain(const RunConfig& cfg, const ArchConfig& arch = {});

/// Adapts cfg.source to the images in cfg.data inside run directory cfg.out.
AdaptResult run_adapt(const RunConfig& cfg);

/// Samples cfg.num_samples images from the checkpoint in cfg.source (adapted
/// checkpoints sample through the injection). When
/// cfg.out ends in ".png" only the grid is written; otherwise cfg.out is a
/// directory receiving samples/*.png plus grid.png.
void run_generate(const RunConfig& cfg);

/// Computes the selected metrics for cfg.real vs cfg.fake; the JSON report
/// goes to cfg.out when it is set.
MetricReport run_evaluate(const RunConfig& cfg);

/// One run_adapt per value of cfg.ablate_key, in cfg.out/<key>=<value>/.
std::vector<std::filesystem::path> run_ablate(const RunConfig& cfg);

/// Throws DataError unless `dir` holds config.txt, loss.csv, final.ckpt,
/// checkpoints/ and grid.png.
void verify_run_dir(const std::filesystem::path& dir);

}  // namespace i2p
