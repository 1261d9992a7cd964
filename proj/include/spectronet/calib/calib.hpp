#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spectronet/dataset.hpp"
#include "spectronet/oxides.hpp"

namespace spectronet {

/// Scalar-output linear head for one oxide.
struct LinearHead {
    std::vector<double> weights;
    double bias = 0.0;
    Oxide oxide = Oxide::SiO2;

    double predict(const std::vector<double>& rep) const;
};

/// Hyperparameters of the head trainer: initial lr 1.0 held for 75 epochs,
/// then cosine-annealed to zero at epoch 200; batches of 64 shot-averaged
/// examples drawn without replacement each epoch.
struct HeadConfig {
    std::size_t epochs = 200;
    double lr0 = 1.0;
    std::size_t decay_start = 75;
    std::size_t batch_size = 64;
    double momentum = 0.0;
    std::uint64_t seed = 0;
};

/// Trains a linear head by SGD on the squared-error objective. Parameters
/// start at zero. Deterministic per cfg.seed. Emits a stderr warning (and
/// still returns) when all inputs are identical. lr_trace, when given,
/// receives the lr used at each epoch.
LinearHead train_head(const std::vector<std::vector<double>>& reps,
                      const std::vector<double>& labels, Oxide oxide,
                      const HeadConfig& cfg,
                      std::vector<double>* lr_trace = nullptr);

double rmse(const std::vector<double>& pred, const std::vector<double>& truth);
double maxe(const std::vector<double>& pred, const std::vector<double>& truth);

/// Per-standard results of one oxide's leave-one-out evaluation.
struct CalibrationRecord {
    Oxide oxide = Oxide::SiO2;
    std::vector<std::string> target_ids;
    std::vector<double> truth;
    std::vector<double> prediction;
    std::vector<LinearHead> heads; // head used for each held-out standard
    double rmse = 0.0;
    double maxe = 0.0;
};

using RepFn = std::function<std::vector<double>(const Spectrum&)>;

struct LooConfig {
    HeadConfig head;
    std::uint64_t seed = 0;
    /// With kfold > 1 and more than 100 standards, grouped k-fold replaces
    /// full leave-one-out. 0 keeps full LOO always.
    std::size_t kfold = 0;
    bool clamp_nonnegative = false;
};

/// Leave-one-standard-out protocol: representations are shot-averaged per
/// (target, location); for each standard a head is trained from scratch on
/// every other standard's averages (seeded by (seed, standard index)) and
/// its held-out averages are predicted; the per-standard prediction is
/// their mean.
CalibrationRecord loo_evaluate(const Dataset& d, const RepFn& rep_fn,
                               Oxide oxide, const LooConfig& cfg);

} // namespace spectronet
