#pragma once

#include <cstdint>
#include <vector>

#include "spectronet/dataset.hpp"
#include "spectronet/siamese/checkpoint.hpp"
#include "spectronet/siamese/loss.hpp"
#include "spectronet/siamese/model.hpp"

namespace spectronet {

struct TrainConfig {
    std::size_t batch_size = 512; // triplets per optimizer step
    std::size_t epochs = 60;
    double lr = 0.1;
    double momentum = 0.9;
    std::size_t n_align = 1;
    double lambda_rec = 1.0;
    double lambda_orth = 1.0;
    double lambda_align = 1.0;
    Similarity similarity = Similarity::cosine;
    /// Divide the batch loss sum by batch_size (keeps lr defaults stable
    /// across batch sizes); switch off for the plain sum.
    bool normalize_batch = true;
    bool squared_rec = false;
    /// Tuples per forward/backward pass. Gradients accumulate across
    /// micro-batches into one optimizer step; batch-norm statistics are per
    /// micro-batch pass.
    std::size_t micro_batch = 32;
    /// Epoch at which the lr starts a cosine decay to zero. Defaults to
    /// "never": the quoted recipe keeps the lr constant. Decaying it lets a
    /// short run settle instead of rattling around the optimum (the
    /// unsquared reconstruction norm has constant-magnitude gradients).
    std::size_t lr_decay_start = SIZE_MAX;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainResult {
    SiameseModel<float> model;
    std::vector<double> epoch_loss;     // mean total per epoch
    std::vector<LossTerms> epoch_terms; // mean per-term breakdown per epoch

    TrainResult(SiameseModel<float> m) : model(std::move(m)) {}
};

/// Trains the two-channel model on triplet batches drawn from the dataset.
/// Fully determined by cfg.seed. Throws DivergedError naming the epoch and
/// batch if the loss goes non-finite.
TrainResult train(const Dataset& d, const TrainConfig& cfg, SiameseArch arch);

} // namespace spectronet
