#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "spectronet/nn/grad_check.hpp"
#include "spectronet/siamese/checkpoint.hpp"
#include "spectronet/siamese/loss.hpp"
#include "spectronet/siamese/model.hpp"
#include "spectronet/siamese/train.hpp"
#include "spectronet/synth.hpp"

using namespace spectronet;
namespace fs = std::filesystem;

namespace {

nn::Tensor<double> row_tensor(std::vector<std::vector<double>> rows) {
    nn::Tensor<double> t(rows.size(), 1, rows.front().size());
    for (std::size_t b = 0; b < rows.size(); ++b) {
        for (std::size_t i = 0; i < rows[b].size(); ++i) {
            t.at(b, 0, i) = rows[b][i];
        }
    }
    return t;
}

Dataset tiny_synth(std::size_t targets, std::size_t shots, std::size_t grid,
                   std::uint64_t seed, double base_scale = 8.0,
                   double gain_sigma = 0.05, double white_sigma = 0.3) {
    SynthConfig cfg;
    cfg.n_targets = targets;
    cfg.shots_per_target = shots;
    cfg.locations = 1;
    cfg.grid_size = grid;
    NoiseModel nm = make_default_noise_model(make_grid(grid), base_scale,
                                             gain_sigma, white_sigma);
    return gen_dataset(cfg, nm, seed).first;
}

} // namespace

TEST_CASE("forward shapes and eval determinism") {
    SiameseArch arch;
    arch.depth = 4;
    arch.features = 8;
    arch.n = 512;
    SiameseModel<float> m(arch);
    m.init(5);
    m.mark_stats_ready(); // fresh model, eval without a train step

    std::vector<double> y(512);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = std::sin(0.01 * static_cast<double>(i)) + 1.5;
    }
    Disentangled a = m.forward(y, nn::Mode::eval);
    Disentangled b = m.forward(y, nn::Mode::eval);
    CHECK(a.z_x.size() == 512);
    CHECK(a.z_n.size() == 512);
    CHECK(a.z_x == b.z_x);
    CHECK(a.z_n == b.z_n);

    std::vector<double> wrong(100, 0.0);
    CHECK_THROWS_AS(m.forward(wrong, nn::Mode::eval), UsageError);
}

TEST_CASE("zero weights and zero input give zero outputs") {
    SiameseArch arch;
    arch.depth = 3;
    arch.features = 4;
    arch.n = 16;
    SiameseModel<float> m(arch); // weights default to zero
    std::vector<double> y(16, 0.0);
    Disentangled d = m.forward(y, nn::Mode::train);
    for (double v : d.z_x) CHECK(v == 0.0);
    for (double v : d.z_n) CHECK(v == 0.0);
}

TEST_CASE("loss hand example: perfect reconstruction, everything zero") {
    auto y = row_tensor({{1.0, 0.0}});
    auto zx = row_tensor({{1.0, 0.0}});
    auto zn = row_tensor({{0.0, 0.0}});
    auto zal = row_tensor({{0.0, 0.0}});
    for (Similarity sim : {Similarity::cosine, Similarity::raw_inner}) {
        LossConfig<double> cfg;
        cfg.similarity = sim;
        cfg.normalize_by = 1;
        LossTerms t = siamese_loss(y, zx, zn, zal, 1, cfg);
        CHECK(std::abs(t.total() - 0.0) < 1e-12);
    }
}

TEST_CASE("loss hand example: aligned unit noise reps give -1 (cosine)") {
    auto y = row_tensor({{1.0, 1.0}});
    auto zx = row_tensor({{1.0, 0.0}});
    auto zn = row_tensor({{0.0, 1.0}});
    auto zal = row_tensor({{0.0, 1.0}});
    LossConfig<double> cfg;
    cfg.similarity = Similarity::cosine;
    cfg.normalize_by = 1;
    LossTerms t = siamese_loss(y, zx, zn, zal, 1, cfg);
    CHECK(std::abs(t.rec - 0.0) < 1e-12);
    CHECK(std::abs(t.orth - 0.0) < 1e-12);
    CHECK(std::abs(t.align - (-1.0)) < 1e-12);
    CHECK(std::abs(t.total() - (-1.0)) < 1e-12);

    // The identical tuple in raw_inner mode: <(0,1),(0,1)> = 1 as well.
    cfg.similarity = Similarity::raw_inner;
    LossTerms t2 = siamese_loss(y, zx, zn, zal, 1, cfg);
    CHECK(std::abs(t2.total() - (-1.0)) < 1e-12);
}

TEST_CASE("loss hand example: unsquared l2 with no alignment partners") {
    auto y = row_tensor({{2.0, 0.0}});
    auto zx = row_tensor({{1.0, 0.0}});
    auto zn = row_tensor({{0.0, 0.0}});
    nn::Tensor<double> zal(0, 1, 2);
    for (Similarity sim : {Similarity::cosine, Similarity::raw_inner}) {
        LossConfig<double> cfg;
        cfg.similarity = sim;
        cfg.normalize_by = 1;
        LossTerms t = siamese_loss(y, zx, zn, zal, 0, cfg);
        CHECK(std::abs(t.total() - 1.0) < 1e-12);
    }
}

TEST_CASE("loss reduces to the plain reconstruction sum when z_n = 0") {
    Rng rng(31);
    const std::size_t B = 5, n = 7;
    nn::Tensor<double> y(B, 1, n), zx(B, 1, n), zn(B, 1, n), zal(B, 1, n);
    for (double& v : y.data) v = rng.uniform(-2, 2);
    for (double& v : zx.data) v = rng.uniform(-2, 2);
    LossConfig<double> cfg;
    cfg.lambda_orth = 0.0;
    cfg.lambda_align = 0.0;
    cfg.normalize_by = 0; // plain sum
    LossTerms t = siamese_loss(y, zx, zn, zal, 1, cfg);
    double expect = 0.0;
    for (std::size_t j = 0; j < B; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y.at(j, 0, i) - zx.at(j, 0, i);
            acc += r * r;
        }
        expect += std::sqrt(acc);
    }
    CHECK(t.total() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("orthogonality term is invariant to either sign") {
    Rng rng(32);
    const std::size_t n = 9;
    nn::Tensor<double> y(1, 1, n), zn(1, 1, n), zal(0, 1, n);
    nn::Tensor<double> zx(1, 1, n), zx_neg(1, 1, n);
    for (std::size_t i = 0; i < n; ++i) {
        y.at(0, 0, i) = rng.uniform(-1, 1);
        zn.at(0, 0, i) = rng.uniform(-1, 1);
        zx.at(0, 0, i) = rng.uniform(-1, 1);
        zx_neg.at(0, 0, i) = -zx.at(0, 0, i);
    }
    for (Similarity sim : {Similarity::cosine, Similarity::raw_inner}) {
        LossConfig<double> cfg;
        cfg.lambda_rec = 0.0;
        cfg.lambda_align = 0.0;
        cfg.similarity = sim;
        LossTerms a = siamese_loss(y, zx, zn, zal, 0, cfg);
        LossTerms b = siamese_loss(y, zx_neg, zn, zal, 0, cfg);
        CHECK(a.orth == doctest::Approx(b.orth).epsilon(1e-12));
    }
}

TEST_CASE("cosine alignment contribution is bounded by batch * n_align") {
    Rng rng(33);
    const std::size_t B = 6, n = 5, n_align = 3;
    nn::Tensor<double> y(B, 1, n), zx(B, 1, n), zn(B, 1, n);
    nn::Tensor<double> zal(B * n_align, 1, n);
    for (double& v : y.data) v = rng.uniform(-3, 3);
    for (double& v : zx.data) v = rng.uniform(-3, 3);
    for (double& v : zn.data) v = rng.uniform(-3, 3);
    for (double& v : zal.data) v = rng.uniform(-3, 3);
    LossConfig<double> cfg;
    cfg.lambda_rec = 0.0;
    cfg.lambda_orth = 0.0;
    cfg.similarity = Similarity::cosine;
    cfg.normalize_by = 0;
    LossTerms t = siamese_loss(y, zx, zn, zal, n_align, cfg);
    CHECK(t.align <= static_cast<double>(B * n_align) + 1e-12);
    CHECK(t.align >= -static_cast<double>(B * n_align) - 1e-12);
}

TEST_CASE("full objective gradient matches finite differences (D=2, N=8)") {
    const std::size_t B = 4, n = 8, n_align = 2;
    SiameseArch arch;
    arch.depth = 2;
    arch.features = 4;
    arch.kernel = 3;
    arch.n = n;

    for (bool residual : {false, true}) {
        for (Similarity sim : {Similarity::cosine, Similarity::raw_inner}) {
            SiameseArch a = arch;
            a.residual = residual;
            SiameseModel<double> m(a);
            m.init(1234);

            Rng rng(derive_seed(77, {residual ? 1u : 0u,
                                     sim == Similarity::cosine ? 1u : 0u}));
            nn::Tensor<double> y(B, 1, n);
            nn::Tensor<double> noise_in(B * (1 + n_align), 1, n);
            for (double& v : y.data) v = rng.uniform(0.5, 4.0);
            for (double& v : noise_in.data) v = rng.uniform(0.5, 4.0);

            LossConfig<double> cfg;
            cfg.similarity = sim;
            cfg.normalize_by = B;

            auto objective = [&]() {
                nn::Tensor<double> zx = m.forward_signal(y, nn::Mode::train);
                nn::Tensor<double> out =
                    m.forward_noise(noise_in, nn::Mode::train);
                nn::Tensor<double> zn(B, 1, n);
                nn::Tensor<double> zal(B * n_align, 1, n);
                std::copy_n(out.data.begin(), B * n, zn.data.begin());
                std::copy_n(out.data.begin() + B * n, B * n_align * n,
                            zal.data.begin());
                return siamese_loss(y, zx, zn, zal, n_align, cfg).total();
            };

            // Analytic gradients.
            nn::Tensor<double> zx = m.forward_signal(y, nn::Mode::train);
            nn::Tensor<double> out = m.forward_noise(noise_in, nn::Mode::train);
            nn::Tensor<double> zn(B, 1, n), zal(B * n_align, 1, n);
            std::copy_n(out.data.begin(), B * n, zn.data.begin());
            std::copy_n(out.data.begin() + B * n, B * n_align * n,
                        zal.data.begin());
            nn::Tensor<double> gzx(B, 1, n), gzn(B, 1, n),
                gzal(B * n_align, 1, n);
            siamese_loss(y, zx, zn, zal, n_align, cfg, &gzx, &gzn, &gzal);
            m.backward_signal(gzx);
            nn::Tensor<double> gnoise(B * (1 + n_align), 1, n);
            std::copy_n(gzn.data.begin(), B * n, gnoise.data.begin());
            std::copy_n(gzal.data.begin(), B * n_align * n,
                        gnoise.data.begin() + B * n);
            m.backward_noise(gnoise);

            std::vector<nn::ParamRef<double>> params;
            m.collect_params(params);
            const double err = nn::grad_check(objective, params);
            INFO("residual ", residual, " similarity ",
                 similarity_name(sim));
            CHECK(err < 1e-4);
        }
    }
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
    Dataset d = tiny_synth(3, 2, 32, 5);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.epochs = 2;
    cfg.micro_batch = 4;
    cfg.seed = 99;
    SiameseArch arch;
    arch.depth = 3;
    arch.features = 4;

    TrainResult r1 = train(d, cfg, arch);
    TrainResult r2 = train(d, cfg, arch);
    CHECK(r1.epoch_loss == r2.epoch_loss);

    std::vector<std::vector<float>*> b1, b2;
    r1.model.collect_blobs(b1);
    r2.model.collect_blobs(b2);
    REQUIRE(b1.size() == b2.size());
    for (std::size_t i = 0; i < b1.size(); ++i) {
        CHECK(*b1[i] == *b2[i]);
    }
}

TEST_CASE("training reduces the loss on a small synthetic set") {
    Dataset d = tiny_synth(8, 4, 64, 17, 8.0, 0.1, 0.4);
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.epochs = 10;
    cfg.micro_batch = 16;
    cfg.seed = 4;
    SiameseArch arch;
    arch.depth = 4;
    arch.features = 8;
    arch.residual = true;
    TrainResult r = train(d, cfg, arch);
    REQUIRE(r.epoch_loss.size() == 10);
    CHECK(r.epoch_loss[9] < r.epoch_loss[0]);
}

TEST_CASE("alignment-only objective decreases") {
    Dataset d = tiny_synth(6, 3, 48, 23);
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 8;
    cfg.micro_batch = 16;
    cfg.lambda_rec = 0.0;
    cfg.lambda_orth = 0.0;
    cfg.seed = 12;
    SiameseArch arch;
    arch.depth = 3;
    arch.features = 4;
    TrainResult r = train(d, cfg, arch);
    CHECK(r.epoch_terms.back().align < r.epoch_terms.front().align);
    // Only the alignment term is active.
    for (const LossTerms& t : r.epoch_terms) {
        CHECK(t.rec == 0.0);
        CHECK(t.orth == 0.0);
    }
}

TEST_CASE("training diverges loudly rather than silently") {
    Dataset d = tiny_synth(3, 2, 16, 2);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 3;
    cfg.lr = 1e9; // guaranteed blow-up
    cfg.similarity = Similarity::raw_inner;
    cfg.seed = 1;
    SiameseArch arch;
    arch.depth = 3;
    arch.features = 4;
    CHECK_THROWS_AS(train(d, cfg, arch), DivergedError);
}

TEST_CASE("checkpoint round trip reproduces eval outputs bitwise") {
    Dataset d = tiny_synth(3, 2, 32, 8);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.epochs = 1;
    cfg.seed = 3;
    SiameseArch arch;
    arch.depth = 3;
    arch.features = 4;
    TrainResult r = train(d, cfg, arch);

    fs::path path = fs::temp_directory_path() / "spectronet_ckpt_test.ckpt";
    CheckpointMeta meta;
    meta.arch = r.model.arch();
    save_checkpoint(r.model, meta, path.string());

    auto [loaded, meta2] = load_checkpoint(path.string());
    CHECK(meta2.arch == r.model.arch());
    CHECK(meta2.init_scheme == "fan_in_uniform");

    std::vector<double> y(32);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.1 * (i % 7) + 1.0;
    Disentangled before = r.model.forward(y, nn::Mode::eval);
    Disentangled after = loaded.forward(y, nn::Mode::eval);
    CHECK(before.z_x == after.z_x);
    CHECK(before.z_n == after.z_n);

    // Saving the loaded model again is byte-identical.
    fs::path path2 = fs::temp_directory_path() / "spectronet_ckpt_test2.ckpt";
    save_checkpoint(loaded, meta2, path2.string());
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("checkpoint corruption and shape mismatches are explicit errors") {
    SiameseArch arch;
    arch.depth = 3;
    arch.features = 4;
    arch.n = 16;
    SiameseModel<float> m(arch);
    m.init(9);
    fs::path path = fs::temp_directory_path() / "spectronet_ckpt_bad.ckpt";
    CheckpointMeta meta;
    meta.arch = arch;
    save_checkpoint(m, meta, path.string());

    // Truncate the parameter data.
    {
        std::ifstream in(path, std::ios::binary);
        std::string all((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary);
        out.write(all.data(),
                  static_cast<std::streamsize>(all.size() - 64));
    }
    CHECK_THROWS_AS(load_checkpoint(path.string()), CheckpointError);

    // Depth expectation mismatch.
    save_checkpoint(m, meta, path.string());
    SiameseArch expect18 = arch;
    expect18.depth = 18;
    CHECK_THROWS_WITH_AS(load_checkpoint(path.string(), expect18),
                         doctest::Contains("depth"), CheckpointError);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent/x.ckpt"), CheckpointError);
}

TEST_CASE("clean copies provenance and validates lengths") {
    SiameseArch arch;
    arch.depth = 3;
    arch.features = 4;
    arch.n = 16;
    SiameseModel<float> m(arch);
    m.init(10);
    m.mark_stats_ready();

    Spectrum s;
    s.wavelengths = make_grid(16);
    s.intensities.assign(16, 2.0);
    s.target_id = "rock7";
    s.location_id = 3;
    s.shot_index = 11;
    Spectrum c = clean(m, s);
    CHECK(c.target_id == "rock7");
    CHECK(c.location_id == 3);
    CHECK(c.shot_index == 11);
    CHECK(c.wavelengths == s.wavelengths);
    CHECK(c.size() == 16);

    Spectrum c2 = clean(m, s);
    CHECK(c.intensities == c2.intensities);

    Spectrum wrong;
    wrong.wavelengths = make_grid(8);
    wrong.intensities.assign(8, 1.0);
    CHECK_THROWS_AS(clean(m, wrong), UsageError);

    // Batch path agrees with the one-by-one path (GEMM blocking differs
    // with batch shape, so agreement is to float rounding, and identical
    // call shapes stay bitwise equal).
    std::vector<Spectrum> many(5, s);
    auto batch = clean_batch(m, many, 2);
    for (const auto& out : batch) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(out.intensities[i] ==
                  doctest::Approx(c.intensities[i]).epsilon(1e-5));
        }
    }
    auto batch2 = clean_batch(m, many, 2);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        CHECK(batch[k].intensities == batch2[k].intensities);
    }
}
