#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spectronet/rng.hpp"
#include "spectronet/synth.hpp"

using namespace spectronet;

TEST_CASE("gen_signal with zero peaks is all zeros") {
    TargetProfile p;
    auto grid = make_grid(16, 0.0, 15.0);
    auto v = gen_signal(p, grid);
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("gen_signal puts the amplitude at the peak center") {
    TargetProfile p;
    p.peak_centers = {5.0};
    p.peak_amplitudes = {2.0};
    p.peak_widths = {1.0};
    auto grid = make_grid(16, 0.0, 15.0); // grid point exactly at 5.0
    auto v = gen_signal(p, grid);
    CHECK(v[5] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(v[0] < 2.0);
}

TEST_CASE("gen_signal superposes overlapping peaks") {
    auto grid = make_grid(64, 240.0, 360.0);
    TargetProfile a;
    a.peak_centers = {290.0};
    a.peak_amplitudes = {3.0};
    a.peak_widths = {6.0};
    TargetProfile b;
    b.peak_centers = {295.0};
    b.peak_amplitudes = {1.5};
    b.peak_widths = {4.0};
    TargetProfile both;
    both.peak_centers = {290.0, 295.0};
    both.peak_amplitudes = {3.0, 1.5};
    both.peak_widths = {6.0, 4.0};

    auto va = gen_signal(a, grid);
    auto vb = gen_signal(b, grid);
    auto vboth = gen_signal(both, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(vboth[i] == doctest::Approx(va[i] + vb[i]).epsilon(1e-12));
    }
}

TEST_CASE("gen_noise with zero sigmas returns the baseline exactly") {
    auto grid = make_grid(32);
    NoiseModel nm = make_default_noise_model(grid, 8.0, 0.0, 0.0);
    auto v = gen_noise(nm, 5);
    CHECK(v == nm.baseline_profile);
}

TEST_CASE("gen_noise is deterministic per seed") {
    auto grid = make_grid(32);
    NoiseModel nm = make_default_noise_model(grid);
    CHECK(gen_noise(nm, 11) == gen_noise(nm, 11));
    CHECK(gen_noise(nm, 11) != gen_noise(nm, 12));
}

TEST_CASE("gen_noise Monte Carlo mean matches the baseline within 1%") {
    auto grid = make_grid(64);
    NoiseModel nm = make_default_noise_model(grid);
    const std::size_t draws = 10000;
    std::vector<double> mean(grid.size(), 0.0);
    for (std::size_t k = 0; k < draws; ++k) {
        auto v = gen_noise(nm, derive_seed(77, {k}));
        for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
    }
    for (std::size_t i = 0; i < mean.size(); ++i) {
        mean[i] /= static_cast<double>(draws);
        CHECK(std::abs(mean[i] - nm.baseline_profile[i]) <
              0.01 * nm.baseline_profile[i]);
    }
}

TEST_CASE("gen_noise is stationary: disjoint seed streams agree in mean") {
    auto grid = make_grid(48);
    NoiseModel nm = make_default_noise_model(grid);
    const std::size_t draws = 5000;
    std::vector<double> mean_a(grid.size(), 0.0), mean_b(grid.size(), 0.0);
    for (std::size_t k = 0; k < draws; ++k) {
        auto va = gen_noise(nm, derive_seed(1000, {k}));
        auto vb = gen_noise(nm, derive_seed(2000, {k}));
        for (std::size_t i = 0; i < grid.size(); ++i) {
            mean_a[i] += va[i];
            mean_b[i] += vb[i];
        }
    }
    // Monte Carlo error of each mean: sqrt(b^2 g^2 + w^2) / sqrt(draws).
    for (std::size_t i = 0; i < grid.size(); ++i) {
        mean_a[i] /= static_cast<double>(draws);
        mean_b[i] /= static_cast<double>(draws);
        const double b = nm.baseline_profile[i];
        const double sd = std::sqrt(b * b * nm.gain_sigma * nm.gain_sigma +
                                    nm.white_sigma * nm.white_sigma) /
                          std::sqrt(static_cast<double>(draws));
        CHECK(std::abs(mean_a[i] - mean_b[i]) < 6.0 * sd);
    }
}

TEST_CASE("gen_dataset additivity is bit-exact") {
    SynthConfig cfg;
    cfg.n_targets = 1;
    cfg.shots_per_target = 1;
    cfg.locations = 1;
    cfg.grid_size = 128;
    NoiseModel nm = make_default_noise_model(make_grid(cfg.grid_size));
    auto [d, truth] = gen_dataset(cfg, nm, 3);
    REQUIRE(d.size() == 1);
    for (std::size_t i = 0; i < cfg.grid_size; ++i) {
        // Components are quantized so the sum, and its inversion, is exact.
        CHECK(truth.signal[0][i] + truth.noise[0][i] ==
              d.samples[0].intensities[i]);
        CHECK(d.samples[0].intensities[i] - truth.noise[0][i] ==
              truth.signal[0][i]);
    }
}

TEST_CASE("gen_dataset shapes and labels") {
    SynthConfig cfg;
    cfg.n_targets = 64;
    cfg.shots_per_target = 16;
    cfg.locations = 4;
    cfg.grid_size = 512;
    NoiseModel nm = make_default_noise_model(make_grid(cfg.grid_size));
    auto [d, truth] = gen_dataset(cfg, nm, 9);
    CHECK(d.size() == 1024);
    CHECK(truth.signal.size() == 1024);
    CHECK(truth.noise.size() == 1024);
    CHECK(d.labels.size() == 64);
    CHECK(d.target_ids().size() == 64);
    for (const auto& s : d.samples) CHECK(s.size() == 512);
    // Four locations, each holding four shots.
    int max_loc = 0;
    for (const auto& s : d.samples) max_loc = std::max(max_loc, s.location_id);
    CHECK(max_loc == 3);
}

TEST_CASE("composition of an all-zero profile is the intercept") {
    OxideVector c = composition_from_peaks({}, {}, 240.0, 905.0);
    CHECK(c == composition_intercept());
}

TEST_CASE("composition is affine in amplitudes") {
    std::vector<double> centers = {300.0, 500.0, 700.0};
    std::vector<double> amps = {2.0, 4.0, 1.0};
    OxideVector c1 = composition_from_peaks(centers, amps, 240.0, 905.0);
    std::vector<double> amps2 = {4.0, 8.0, 2.0};
    OxideVector c2 = composition_from_peaks(centers, amps2, 240.0, 905.0);
    OxideVector b = composition_intercept();
    for (std::size_t i = 0; i < kNumOxides; ++i) {
        CHECK(c2[i] - b[i] == doctest::Approx(2.0 * (c1[i] - b[i])));
    }
}

TEST_CASE("generative branches are independent") {
    SynthConfig cfg;
    cfg.n_targets = 3;
    cfg.shots_per_target = 2;
    cfg.locations = 1;
    cfg.grid_size = 64;
    NoiseModel nm = make_default_noise_model(make_grid(cfg.grid_size));
    auto [d1, t1] = gen_dataset_split(cfg, nm, 100, 200);
    auto [d2, t2] = gen_dataset_split(cfg, nm, 100, 201);
    auto [d3, t3] = gen_dataset_split(cfg, nm, 101, 200);
    // Same target seed, new noise seed: signal identical, noise changed.
    CHECK(t1.signal == t2.signal);
    CHECK(t1.noise != t2.noise);
    // New target seed, same noise seed: noise identical, signal changed.
    CHECK(t1.noise == t3.noise);
    CHECK(t1.signal != t3.signal);
    // Labels follow the target branch only.
    CHECK(d1.labels == d2.labels);
    CHECK(d1.labels != d3.labels);
}

TEST_CASE("noise mean over many shots converges to a strictly positive "
          "baseline") {
    SynthConfig cfg;
    cfg.n_targets = 1;
    cfg.shots_per_target = 512;
    cfg.locations = 1;
    cfg.grid_size = 32;
    NoiseModel nm = make_default_noise_model(make_grid(cfg.grid_size));
    auto [d, truth] = gen_dataset(cfg, nm, 21);
    std::vector<double> mean(cfg.grid_size, 0.0);
    for (const auto& u_n : truth.noise) {
        for (std::size_t i = 0; i < u_n.size(); ++i) mean[i] += u_n[i];
    }
    for (std::size_t i = 0; i < mean.size(); ++i) {
        mean[i] /= static_cast<double>(cfg.shots_per_target);
        CHECK(nm.baseline_profile[i] > 0.0);
        CHECK(std::abs(mean[i] - nm.baseline_profile[i]) <
              0.05 * nm.baseline_profile[i]);
    }
}

TEST_CASE("gen_dataset rejects zero counts") {
    SynthConfig cfg;
    cfg.n_targets = 0;
    NoiseModel nm = make_default_noise_model(make_grid(cfg.grid_size));
    CHECK_THROWS_AS(gen_dataset(cfg, nm, 0), UsageError);
}
