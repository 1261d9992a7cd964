#pragma once

#include <cstdint>
#include <vector>

#include "spectronet/dataset.hpp"
#include "spectronet/oxides.hpp"

namespace spectronet {

/// Ground-truth emission profile of one synthetic target: a set of Gaussian
/// lines plus the oxide composition implied by their amplitudes.
struct TargetProfile {
    std::vector<double> peak_centers;    // nm
    std::vector<double> peak_amplitudes; // >= 0
    std::vector<double> peak_widths;     // nm, > 0
    OxideVector composition{};

    void validate() const;
};

/// Stationary instrument-noise model: a smooth strictly positive baseline
/// (dark current + continuum), a per-shot multiplicative gain jitter on the
/// baseline, and per-bin additive white noise.
struct NoiseModel {
    std::vector<double> baseline_profile; // length = grid length
    double gain_sigma = 0.0;
    double white_sigma = 0.0;

    void validate() const;
};

/// Per-sample ground-truth decomposition. signal[i] + noise[i] equals the
/// emitted intensities of sample i bit-exactly (components are quantized to
/// multiples of 2^-20 so the double-precision sum is exact).
struct SyntheticTruth {
    std::vector<std::vector<double>> signal;
    std::vector<std::vector<double>> noise;
};

/// Sum of Gaussian lines evaluated on the grid. Deterministic.
std::vector<double> gen_signal(const TargetProfile& p,
                               const std::vector<double>& grid);

/// One draw of baseline * (1 + g) + white_sigma * w with g a per-shot
/// scalar normal and w per-bin standard normal.
std::vector<double> gen_noise(const NoiseModel& nm, std::uint64_t seed);

/// Default baseline: a wide decaying exponential plus a low-order
/// polynomial, scaled by base_scale. Strictly positive on any grid.
NoiseModel make_default_noise_model(const std::vector<double>& grid,
                                    double base_scale = 8.0,
                                    double gain_sigma = 0.05,
                                    double white_sigma = 0.3);

/// Evenly spaced wavelength grid over the standard 240-905 nm LIBS span.
std::vector<double> make_grid(std::size_t grid_size, double lo = 240.0,
                              double hi = 905.0);

struct SynthConfig {
    std::size_t n_targets = 64;
    std::size_t shots_per_target = 16; // total per target, over all locations
    std::size_t locations = 4;
    std::size_t grid_size = 512;
    double grid_lo = 240.0;
    double grid_hi = 905.0;
};

/// Draws random target profiles and emits samples = signal + noise with the
/// truth retained. Target profiles depend only on target_seed and noise
/// draws only on noise_seed, so the two generative branches can be
/// regenerated independently.
std::pair<Dataset, SyntheticTruth> gen_dataset_split(const SynthConfig& cfg,
                                                     const NoiseModel& nm,
                                                     std::uint64_t target_seed,
                                                     std::uint64_t noise_seed);

/// Single-seed wrapper: the two branch seeds are derived from `seed`.
std::pair<Dataset, SyntheticTruth> gen_dataset(const SynthConfig& cfg,
                                               const NoiseModel& nm,
                                               std::uint64_t seed);

/// Oxide composition implied by a profile: amplitudes are summed into 8
/// wavelength segments and mapped through a fixed matrix plus intercept.
OxideVector composition_from_peaks(const std::vector<double>& centers,
                                   const std::vector<double>& amplitudes,
                                   double grid_lo, double grid_hi);

/// The intercept of the composition map (the label of an all-zero profile).
OxideVector composition_intercept();

} // namespace spectronet
