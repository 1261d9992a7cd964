#include "spectronet/siamese/train.hpp"

#include <cmath>
#include <cstring>

#include "spectronet/nn/optim.hpp"
#include "spectronet/rng.hpp"
#include "spectronet/triplets.hpp"

namespace spectronet {

namespace {

constexpr std::uint64_t kInitTag = 0x1357u;
constexpr std::uint64_t kBatchTag = 0x2468u;

/// Copies dataset samples (by index) into rows of a (count, 1, N) tensor.
void gather(const Dataset& d, const std::vector<std::size_t>& indices,
            std::size_t from, std::size_t count, nn::Tensor<float>& out) {
    const std::size_t n = d.grid.size();
    for (std::size_t b = 0; b < count; ++b) {
        const auto& src = d.samples[indices[from + b]].intensities;
        float* row = out.row(b, 0);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] = static_cast<float>(src[i]);
        }
    }
}

} // namespace

void TrainConfig::validate() const {
    if (batch_size == 0) throw UsageError("train: batch_size must be positive");
    if (epochs == 0) throw UsageError("train: epochs must be positive");
    if (!(lr > 0.0)) throw UsageError("train: lr must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw UsageError("train: momentum must be in [0, 1)");
    }
    if (n_align == 0) throw UsageError("train: n_align must be positive");
    if (micro_batch == 0) {
        throw UsageError("train: micro_batch must be positive");
    }
    if (!std::isfinite(lambda_rec) || !std::isfinite(lambda_orth) ||
        !std::isfinite(lambda_align)) {
        throw UsageError("train: loss weights must be finite");
    }
}

TrainResult train(const Dataset& d, const TrainConfig& cfg, SiameseArch arch) {
    cfg.validate();
    if (arch.n != 0 && arch.n != d.grid.size()) {
        throw UsageError("train: arch length " + std::to_string(arch.n) +
                         " != dataset grid length " +
                         std::to_string(d.grid.size()));
    }
    arch.n = d.grid.size();

    SiameseModel<float> model(arch);
    model.init(derive_seed(cfg.seed, {kInitTag}));

    std::vector<nn::ParamRef<float>> params;
    model.collect_params(params);
    nn::Sgd<float> sgd(static_cast<float>(cfg.lr),
                       static_cast<float>(cfg.momentum));

    const std::size_t n = arch.n;
    const std::size_t steps =
        std::max<std::size_t>(1, (d.size() + cfg.batch_size - 1) / cfg.batch_size);
    const std::size_t chunk = std::min(cfg.micro_batch, cfg.batch_size);

    LossConfig<float> lcfg;
    lcfg.lambda_rec = static_cast<float>(cfg.lambda_rec);
    lcfg.lambda_orth = static_cast<float>(cfg.lambda_orth);
    lcfg.lambda_align = static_cast<float>(cfg.lambda_align);
    lcfg.similarity = cfg.similarity;
    lcfg.normalize_by = cfg.normalize_batch ? cfg.batch_size : 0;
    lcfg.squared_rec = cfg.squared_rec;

    TrainResult result(std::move(model));
    result.epoch_loss.reserve(cfg.epochs);
    result.epoch_terms.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.lr_decay_start < cfg.epochs) {
            sgd.set_lr(static_cast<float>(
                nn::cosine_lr(epoch, cfg.epochs, cfg.lr, cfg.lr_decay_start)));
        }
        LossTerms epoch_sum;
        for (std::size_t step = 0; step < steps; ++step) {
            TripletBatch batch = make_triplets(
                d, cfg.batch_size, cfg.n_align,
                derive_seed(cfg.seed, {kBatchTag, epoch, step}));

            nn::Sgd<float>::zero_grad(params);
            LossTerms batch_terms;
            for (std::size_t start = 0; start < cfg.batch_size;
                 start += chunk) {
                const std::size_t m = std::min(chunk, cfg.batch_size - start);

                nn::Tensor<float> y(m, 1, n);
                gather(d, batch.anchors, start, m, y);
                nn::Tensor<float> zx =
                    result.model.forward_signal(y, nn::Mode::train);

                // Noise sources and alignment partners share one noise-
                // channel pass: rows [0, m) are the k's, the rest the k''s
                // grouped per tuple.
                nn::Tensor<float> noise_in(m * (1 + cfg.n_align), 1, n);
                gather(d, batch.noise_sources, start, m, noise_in);
                for (std::size_t b = 0; b < m; ++b) {
                    const auto& partners = batch.alignment_sets[start + b];
                    for (std::size_t a = 0; a < cfg.n_align; ++a) {
                        const auto& src = d.samples[partners[a]].intensities;
                        float* row = noise_in.row(m + b * cfg.n_align + a, 0);
                        for (std::size_t i = 0; i < n; ++i) {
                            row[i] = static_cast<float>(src[i]);
                        }
                    }
                }
                nn::Tensor<float> noise_out =
                    result.model.forward_noise(noise_in, nn::Mode::train);

                nn::Tensor<float> zn(m, 1, n);
                nn::Tensor<float> zal(m * cfg.n_align, 1, n);
                std::memcpy(zn.data.data(), noise_out.data.data(),
                            m * n * sizeof(float));
                std::memcpy(zal.data.data(), noise_out.data.data() + m * n,
                            m * cfg.n_align * n * sizeof(float));

                nn::Tensor<float> gzx(m, 1, n);
                nn::Tensor<float> gzn(m, 1, n);
                nn::Tensor<float> gzal(m * cfg.n_align, 1, n);
                LossTerms t = siamese_loss(y, zx, zn, zal, cfg.n_align, lcfg,
                                           &gzx, &gzn, &gzal);
                batch_terms.rec += t.rec;
                batch_terms.orth += t.orth;
                batch_terms.align += t.align;

                result.model.backward_signal(gzx);
                nn::Tensor<float> gnoise(m * (1 + cfg.n_align), 1, n);
                std::memcpy(gnoise.data.data(), gzn.data.data(),
                            m * n * sizeof(float));
                std::memcpy(gnoise.data.data() + m * n, gzal.data.data(),
                            m * cfg.n_align * n * sizeof(float));
                result.model.backward_noise(gnoise);
            }

            if (!std::isfinite(batch_terms.total())) {
                throw DivergedError(
                    "training diverged: non-finite loss at epoch " +
                    std::to_string(epoch) + ", batch " + std::to_string(step));
            }
            sgd.step(params);
            epoch_sum.rec += batch_terms.rec;
            epoch_sum.orth += batch_terms.orth;
            epoch_sum.align += batch_terms.align;
        }
        const double inv = 1.0 / static_cast<double>(steps);
        LossTerms mean{epoch_sum.rec * inv, epoch_sum.orth * inv,
                       epoch_sum.align * inv};
        result.epoch_terms.push_back(mean);
        result.epoch_loss.push_back(mean.total());
    }
    return result;
}

} // namespace spectronet
