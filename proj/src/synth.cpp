#include "spectronet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spectronet/rng.hpp"

namespace spectronet {

namespace {

constexpr std::uint64_t kTargetBranch = 0x7A52u;
constexpr std::uint64_t kNoiseBranch = 0x401Cu;

/// Quantize to multiples of 2^-20. Keeps signal + noise exact in double
/// precision so the truth decomposition is recoverable bit-for-bit.
double quantize(double v) { return std::round(v * 0x1.0p20) * 0x1.0p-20; }

} // namespace

void TargetProfile::validate() const {
    if (peak_centers.size() != peak_amplitudes.size() ||
        peak_centers.size() != peak_widths.size()) {
        throw UsageError("target profile: peak list lengths differ");
    }
    for (double a : peak_amplitudes) {
        if (!(a >= 0.0)) throw UsageError("target profile: amplitude < 0");
    }
    for (double w : peak_widths) {
        if (!(w > 0.0)) throw UsageError("target profile: width <= 0");
    }
    for (double c : composition) {
        if (!(c >= 0.0)) throw UsageError("target profile: composition < 0");
    }
}

void NoiseModel::validate() const {
    if (!(gain_sigma >= 0.0) || !(white_sigma >= 0.0)) {
        throw UsageError("noise model: sigmas must be nonnegative finite");
    }
    for (double b : baseline_profile) {
        if (!std::isfinite(b)) {
            throw UsageError("noise model: non-finite baseline value");
        }
    }
}

std::vector<double> gen_signal(const TargetProfile& p,
                               const std::vector<double>& grid) {
    p.validate();
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t k = 0; k < p.peak_centers.size(); ++k) {
        const double c = p.peak_centers[k];
        const double a = p.peak_amplitudes[k];
        const double inv2w2 = 1.0 / (2.0 * p.peak_widths[k] * p.peak_widths[k]);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = grid[i] - c;
            out[i] += a * std::exp(-d * d * inv2w2);
        }
    }
    return out;
}

std::vector<double> gen_noise(const NoiseModel& nm, std::uint64_t seed) {
    nm.validate();
    Rng rng(seed);
    const double gain = 1.0 + nm.gain_sigma * rng.gaussian();
    std::vector<double> out(nm.baseline_profile.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = nm.baseline_profile[i] * gain +
                 nm.white_sigma * rng.gaussian();
    }
    return out;
}

NoiseModel make_default_noise_model(const std::vector<double>& grid,
                                    double base_scale, double gain_sigma,
                                    double white_sigma) {
    NoiseModel nm;
    nm.gain_sigma = gain_sigma;
    nm.white_sigma = white_sigma;
    nm.baseline_profile.resize(grid.size());
    const double lo = grid.front();
    const double span = std::max(grid.back() - lo, 1e-9);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = (grid[i] - lo) / span;
        nm.baseline_profile[i] =
            base_scale *
            (0.6 * std::exp(-2.2 * x) + 0.4 - 0.25 * x + 0.15 * x * x);
    }
    return nm;
}

std::vector<double> make_grid(std::size_t grid_size, double lo, double hi) {
    if (grid_size == 0) throw UsageError("grid size must be positive");
    if (!(hi > lo)) throw UsageError("grid bounds must satisfy lo < hi");
    std::vector<double> grid(grid_size);
    if (grid_size == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = (hi - lo) / static_cast<double>(grid_size - 1);
    for (std::size_t i = 0; i < grid_size; ++i) {
        grid[i] = lo + step * static_cast<double>(i);
    }
    return grid;
}

OxideVector composition_intercept() {
    OxideVector b{};
    for (std::size_t r = 0; r < kNumOxides; ++r) {
        b[r] = 1.0 + 0.4 * static_cast<double>(r);
    }
    return b;
}

OxideVector composition_from_peaks(const std::vector<double>& centers,
                                   const std::vector<double>& amplitudes,
                                   double grid_lo, double grid_hi) {
    // Amplitudes summed into 8 equal wavelength segments, then mapped by a
    // fixed diagonally dominant matrix: each oxide mostly reads one segment
    // with a small spill into the others.
    OxideVector seg{};
    const double span = std::max(grid_hi - grid_lo, 1e-9);
    for (std::size_t k = 0; k < centers.size(); ++k) {
        auto s = static_cast<long>((centers[k] - grid_lo) / span *
                                   static_cast<double>(kNumOxides));
        s = std::clamp(s, 0L, static_cast<long>(kNumOxides) - 1);
        seg[static_cast<std::size_t>(s)] += amplitudes[k];
    }
    OxideVector out = composition_intercept();
    for (std::size_t r = 0; r < kNumOxides; ++r) {
        for (std::size_t c = 0; c < kNumOxides; ++c) {
            const double m =
                (r == c) ? 1.0
                         : 0.12 / (1.0 + std::abs(static_cast<double>(r) -
                                                  static_cast<double>(c)));
            out[r] += m * seg[c];
        }
    }
    return out;
}

namespace {

TargetProfile draw_profile(Rng& rng, double grid_lo, double grid_hi,
                           double mean_spacing) {
    TargetProfile p;
    const std::size_t n_peaks = 3 + rng.uniform_int(8); // 3..10
    const double margin = 0.02 * (grid_hi - grid_lo);
    p.peak_centers.resize(n_peaks);
    p.peak_amplitudes.resize(n_peaks);
    p.peak_widths.resize(n_peaks);
    for (std::size_t k = 0; k < n_peaks; ++k) {
        p.peak_centers[k] = rng.uniform(grid_lo + margin, grid_hi - margin);
        p.peak_amplitudes[k] = rng.uniform(1.0, 10.0);
        p.peak_widths[k] = mean_spacing * rng.uniform(1.5, 4.0);
    }
    p.composition = composition_from_peaks(p.peak_centers, p.peak_amplitudes,
                                           grid_lo, grid_hi);
    return p;
}

} // namespace

std::pair<Dataset, SyntheticTruth> gen_dataset_split(const SynthConfig& cfg,
                                                     const NoiseModel& nm,
                                                     std::uint64_t target_seed,
                                                     std::uint64_t noise_seed) {
    if (cfg.n_targets == 0 || cfg.shots_per_target == 0 ||
        cfg.locations == 0 || cfg.grid_size == 0) {
        throw UsageError("gen_dataset: all counts must be positive");
    }
    if (cfg.locations > cfg.shots_per_target) {
        throw UsageError("gen_dataset: more locations than shots per target");
    }
    nm.validate();
    if (nm.baseline_profile.size() != cfg.grid_size) {
        throw UsageError("gen_dataset: noise baseline length != grid size");
    }

    Dataset d;
    SyntheticTruth truth;
    d.grid = make_grid(cfg.grid_size, cfg.grid_lo, cfg.grid_hi);
    const double mean_spacing =
        (cfg.grid_size > 1)
            ? (cfg.grid_hi - cfg.grid_lo) / static_cast<double>(cfg.grid_size - 1)
            : 1.0;

    const std::size_t total = cfg.n_targets * cfg.shots_per_target;
    d.samples.reserve(total);
    d.sample_ids.reserve(total);
    truth.signal.reserve(total);
    truth.noise.reserve(total);

    for (std::size_t t = 0; t < cfg.n_targets; ++t) {
        Rng trng(derive_seed(target_seed, {kTargetBranch, t}));
        TargetProfile profile =
            draw_profile(trng, cfg.grid_lo, cfg.grid_hi, mean_spacing);
        std::vector<double> u_x = gen_signal(profile, d.grid);
        for (double& v : u_x) v = quantize(v);

        char tname[32];
        std::snprintf(tname, sizeof tname, "synth%03zu", t);
        d.labels[tname] = profile.composition;

        for (std::size_t shot = 0; shot < cfg.shots_per_target; ++shot) {
            std::vector<double> u_n = gen_noise(
                nm, derive_seed(noise_seed, {kNoiseBranch, t, shot}));
            for (double& v : u_n) v = quantize(v);

            Spectrum s;
            s.wavelengths = d.grid;
            s.intensities.resize(cfg.grid_size);
            for (std::size_t i = 0; i < cfg.grid_size; ++i) {
                s.intensities[i] = u_x[i] + u_n[i];
            }
            s.target_id = tname;
            s.location_id = static_cast<int>(shot * cfg.locations /
                                             cfg.shots_per_target);
            s.shot_index = static_cast<int>(shot);
            char sid[64];
            std::snprintf(sid, sizeof sid, "%s_l%d_s%03zu", tname,
                          s.location_id, shot);
            d.sample_ids.emplace_back(sid);
            d.samples.push_back(std::move(s));
            truth.signal.push_back(u_x);
            truth.noise.push_back(std::move(u_n));
        }
    }
    d.validate();
    return {std::move(d), std::move(truth)};
}

std::pair<Dataset, SyntheticTruth> gen_dataset(const SynthConfig& cfg,
                                               const NoiseModel& nm,
                                               std::uint64_t seed) {
    return gen_dataset_split(cfg, nm, derive_seed(seed, {1}),
                             derive_seed(seed, {2}));
}

} // namespace spectronet
