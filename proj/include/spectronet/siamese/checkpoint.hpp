#pragma once

#include <optional>
#include <string>

#include "spectronet/siamese/loss.hpp"
#include "spectronet/siamese/model.hpp"

namespace spectronet {

/// Run metadata echoed into the checkpoint header alongside the
/// architecture.
struct CheckpointMeta {
    SiameseArch arch;
    std::string init_scheme = "fan_in_uniform";
    Similarity similarity = Similarity::cosine;
};

/// Text header (one "key value" line each, terminated by "data") followed
/// by raw little-endian float32 blocks: per channel, conv weight/bias and
/// batch-norm gamma/beta/running stats in layer order.
void save_checkpoint(SiameseModel<float>& m, const CheckpointMeta& meta,
                     const std::string& path);

std::pair<SiameseModel<float>, CheckpointMeta>
load_checkpoint(const std::string& path);

/// Loads and verifies the stored architecture against an expectation;
/// throws CheckpointError naming the mismatching field otherwise.
std::pair<SiameseModel<float>, CheckpointMeta>
load_checkpoint(const std::string& path, const SiameseArch& expected);

} // namespace spectronet
