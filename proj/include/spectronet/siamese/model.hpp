#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectronet/nn/layers.hpp"
#include "spectronet/rng.hpp"
#include "spectronet/spectrum.hpp"

namespace spectronet {

/// Architecture of one channel stack (both channels share it).
struct SiameseArch {
    std::size_t depth = 18;   // total conv layers, >= 2
    std::size_t features = 64;
    std::size_t kernel = 3;
    bool residual = false;
    std::size_t n = 0; // input/output length, fixed at construction

    bool operator==(const SiameseArch&) const = default;
};

/// Signal and noise representations of one measurement.
struct Disentangled {
    std::vector<double> z_x;
    std::vector<double> z_n;
};

/// One channel: conv+ReLU, then (depth - 2) conv+BN+ReLU blocks, then a
/// final conv back to one channel. Maps (B, 1, N) -> (B, 1, N).
///
/// The input is reflection-extended by the stack's receptive-field radius
/// and the output cropped back, so the zero padding inside each conv never
/// touches real bins; spectrum edges would otherwise pick up a systematic
/// baseline bias.
template <typename T>
class ChannelNet {
public:
    explicit ChannelNet(const SiameseArch& arch) : arch_(arch) {
        if (arch.depth < 2) {
            throw UsageError("channel depth must be at least 2");
        }
        if (arch.n == 0) {
            throw UsageError("channel input length must be positive");
        }
        pad_ = std::min(arch.depth * (arch.kernel / 2), arch.n - 1);
        convs_.reserve(arch.depth);
        convs_.emplace_back(1, arch.features, arch.kernel);
        for (std::size_t i = 0; i + 2 < arch.depth; ++i) {
            convs_.emplace_back(arch.features, arch.features, arch.kernel);
            bns_.emplace_back(arch.features);
        }
        convs_.emplace_back(arch.features, 1, arch.kernel);
        relus_.resize(arch.depth - 1);
    }

    /// Fan-in-scaled uniform init: weights U(-1/sqrt(fan_in), +1/sqrt(fan_in)),
    /// biases zero, batch-norm affine at identity.
    void init_params(Rng& rng) {
        for (auto& conv : convs_) {
            const double bound =
                1.0 / std::sqrt(static_cast<double>(conv.in_channels() *
                                                    conv.kernel()));
            for (T& w : conv.weight) {
                w = static_cast<T>(rng.uniform(-bound, bound));
            }
            std::fill(conv.bias.begin(), conv.bias.end(), T(0));
        }
    }

    nn::Tensor<T> forward(const nn::Tensor<T>& x, nn::Mode mode) {
        if (x.length != arch_.n) {
            throw UsageError("channel: input length " +
                             std::to_string(x.length) + " != model length " +
                             std::to_string(arch_.n));
        }
        nn::Tensor<T> h = convs_[0].forward(reflect_pad(x), mode);
        h = relus_[0].forward(h, mode);
        for (std::size_t i = 0; i < bns_.size(); ++i) {
            h = convs_[i + 1].forward(h, mode);
            h = bns_[i].forward(h, mode);
            h = relus_[i + 1].forward(h, mode);
        }
        return crop(convs_.back().forward(h, mode));
    }

    nn::Tensor<T> backward(const nn::Tensor<T>& grad_out) {
        nn::Tensor<T> g = convs_.back().backward(uncrop(grad_out));
        for (std::size_t i = bns_.size(); i-- > 0;) {
            g = relus_[i + 1].backward(g);
            g = bns_[i].backward(g);
            g = convs_[i + 1].backward(g);
        }
        g = relus_[0].backward(g);
        return unpad(convs_[0].backward(g));
    }

    void collect_params(std::vector<nn::ParamRef<T>>& out,
                        const std::string& prefix) {
        convs_[0].collect_params(out, prefix + ".conv0");
        for (std::size_t i = 0; i < bns_.size(); ++i) {
            convs_[i + 1].collect_params(out,
                                         prefix + ".conv" + std::to_string(i + 1));
            bns_[i].collect_params(out, prefix + ".bn" + std::to_string(i + 1));
        }
        convs_.back().collect_params(
            out, prefix + ".conv" + std::to_string(convs_.size() - 1));
    }

    /// All parameter and buffer vectors in serialization order.
    void collect_blobs(std::vector<std::vector<T>*>& out) {
        out.push_back(&convs_[0].weight);
        out.push_back(&convs_[0].bias);
        for (std::size_t i = 0; i < bns_.size(); ++i) {
            out.push_back(&convs_[i + 1].weight);
            out.push_back(&convs_[i + 1].bias);
            out.push_back(&bns_[i].gamma);
            out.push_back(&bns_[i].beta);
            out.push_back(&bns_[i].running_mean);
            out.push_back(&bns_[i].running_var);
        }
        out.push_back(&convs_.back().weight);
        out.push_back(&convs_.back().bias);
    }

    void mark_stats_ready() {
        for (auto& bn : bns_) bn.mark_stats_ready();
    }

    const SiameseArch& arch() const { return arch_; }

private:
    /// Reflected source bin for padded position j (pad_ wide aprons).
    std::size_t reflect_src(std::size_t j) const {
        const long i = static_cast<long>(j) - static_cast<long>(pad_);
        const long n = static_cast<long>(arch_.n);
        if (i < 0) return static_cast<std::size_t>(-i);
        if (i >= n) return static_cast<std::size_t>(2 * (n - 1) - i);
        return static_cast<std::size_t>(i);
    }

    nn::Tensor<T> reflect_pad(const nn::Tensor<T>& x) const {
        if (pad_ == 0) return x;
        nn::Tensor<T> out(x.batch, 1, arch_.n + 2 * pad_);
        for (std::size_t b = 0; b < x.batch; ++b) {
            const T* src = x.row(b, 0);
            T* dst = out.row(b, 0);
            for (std::size_t j = 0; j < out.length; ++j) {
                dst[j] = src[reflect_src(j)];
            }
        }
        return out;
    }

    nn::Tensor<T> crop(const nn::Tensor<T>& x) const {
        if (pad_ == 0) return x;
        nn::Tensor<T> out(x.batch, 1, arch_.n);
        for (std::size_t b = 0; b < x.batch; ++b) {
            const T* src = x.row(b, 0) + pad_;
            std::copy_n(src, arch_.n, out.row(b, 0));
        }
        return out;
    }

    nn::Tensor<T> uncrop(const nn::Tensor<T>& g) const {
        if (pad_ == 0) return g;
        nn::Tensor<T> out(g.batch, 1, arch_.n + 2 * pad_);
        for (std::size_t b = 0; b < g.batch; ++b) {
            std::copy_n(g.row(b, 0), arch_.n, out.row(b, 0) + pad_);
        }
        return out;
    }

    nn::Tensor<T> unpad(const nn::Tensor<T>& g) const {
        if (pad_ == 0) return g;
        nn::Tensor<T> out(g.batch, 1, arch_.n);
        for (std::size_t b = 0; b < g.batch; ++b) {
            const T* src = g.row(b, 0);
            T* dst = out.row(b, 0);
            for (std::size_t j = 0; j < g.length; ++j) {
                dst[reflect_src(j)] += src[j];
            }
        }
        return out;
    }

    SiameseArch arch_;
    std::size_t pad_ = 0;
    std::vector<nn::Conv1d<T>> convs_;
    std::vector<nn::BatchNorm1d<T>> bns_;
    std::vector<nn::Relu<T>> relus_;
};

/// Two-channel disentanglement model. The signal channel produces z_x and
/// the noise channel z_n from the same measurement.
///
/// With arch.residual set, the signal channel's stack predicts a correction
/// that is subtracted from the input (z_x = y - f1(y)); the noise channel's
/// output is the noise estimate itself and is always direct (z_n = f2(y)).
template <typename T>
class SiameseModel {
public:
    explicit SiameseModel(const SiameseArch& arch)
        : arch_(arch), signal_(arch), noise_(arch) {}

    void init(std::uint64_t seed) {
        Rng rs(derive_seed(seed, {0x51u}));
        Rng rn(derive_seed(seed, {0x52u}));
        signal_.init_params(rs);
        noise_.init_params(rn);
    }

    std::pair<nn::Tensor<T>, nn::Tensor<T>> forward_batch(const nn::Tensor<T>& y,
                                                  nn::Mode mode) {
        nn::Tensor<T> zx = forward_signal(y, mode);
        nn::Tensor<T> zn = noise_.forward(y, mode);
        return {std::move(zx), std::move(zn)};
    }

    nn::Tensor<T> forward_signal(const nn::Tensor<T>& y, nn::Mode mode) {
        nn::Tensor<T> f = signal_.forward(y, mode);
        if (!arch_.residual) return f;
        nn::Tensor<T> zx = y;
        for (std::size_t i = 0; i < zx.data.size(); ++i) {
            zx.data[i] -= f.data[i];
        }
        return zx;
    }

    nn::Tensor<T> forward_noise(const nn::Tensor<T>& y, nn::Mode mode) {
        return noise_.forward(y, mode);
    }

    /// Backward through the signal channel given d(loss)/d(z_x).
    void backward_signal(const nn::Tensor<T>& grad_zx) {
        if (!arch_.residual) {
            signal_.backward(grad_zx);
            return;
        }
        nn::Tensor<T> g = grad_zx;
        for (T& v : g.data) v = -v;
        signal_.backward(g);
    }

    void backward_noise(const nn::Tensor<T>& grad_zn) { noise_.backward(grad_zn); }

    /// Single-measurement convenience wrapper.
    Disentangled forward(const std::vector<double>& y, nn::Mode mode) {
        if (y.size() != arch_.n) {
            throw UsageError("forward: input length " +
                             std::to_string(y.size()) + " != model length " +
                             std::to_string(arch_.n));
        }
        nn::Tensor<T> t(1, 1, arch_.n);
        for (std::size_t i = 0; i < y.size(); ++i) {
            t.data[i] = static_cast<T>(y[i]);
        }
        auto [zx, zn] = forward_batch(t, mode);
        Disentangled d;
        d.z_x.assign(zx.data.begin(), zx.data.end());
        d.z_n.assign(zn.data.begin(), zn.data.end());
        return d;
    }

    void collect_params(std::vector<nn::ParamRef<T>>& out) {
        signal_.collect_params(out, "signal");
        noise_.collect_params(out, "noise");
    }

    void collect_blobs(std::vector<std::vector<T>*>& out) {
        signal_.collect_blobs(out);
        noise_.collect_blobs(out);
    }

    void mark_stats_ready() {
        signal_.mark_stats_ready();
        noise_.mark_stats_ready();
    }

    const SiameseArch& arch() const { return arch_; }
    ChannelNet<T>& signal_channel() { return signal_; }
    ChannelNet<T>& noise_channel() { return noise_; }

private:
    SiameseArch arch_;
    ChannelNet<T> signal_;
    ChannelNet<T> noise_;
};

/// Feed-forward cleaning: z_x for each spectrum, eval mode, provenance
/// copied. Only the signal channel is evaluated. Inputs are processed in
/// chunks so the conv GEMMs see a reasonable batch.
template <typename T>
std::vector<Spectrum> clean_batch(SiameseModel<T>& m,
                                  const std::vector<Spectrum>& inputs,
                                  std::size_t chunk = 16) {
    std::vector<Spectrum> out;
    out.reserve(inputs.size());
    const std::size_t n = m.arch().n;
    for (std::size_t start = 0; start < inputs.size(); start += chunk) {
        const std::size_t count = std::min(chunk, inputs.size() - start);
        nn::Tensor<T> t(count, 1, n);
        for (std::size_t b = 0; b < count; ++b) {
            const Spectrum& s = inputs[start + b];
            if (s.size() != n) {
                throw UsageError("clean: spectrum length " +
                                 std::to_string(s.size()) +
                                 " != model length " + std::to_string(n));
            }
            T* row = t.row(b, 0);
            for (std::size_t i = 0; i < n; ++i) {
                row[i] = static_cast<T>(s.intensities[i]);
            }
        }
        nn::Tensor<T> zx = m.forward_signal(t, nn::Mode::eval);
        for (std::size_t b = 0; b < count; ++b) {
            const Spectrum& s = inputs[start + b];
            Spectrum c;
            c.wavelengths = s.wavelengths;
            c.target_id = s.target_id;
            c.location_id = s.location_id;
            c.shot_index = s.shot_index;
            c.intensities.resize(n);
            const T* row = zx.row(b, 0);
            for (std::size_t i = 0; i < n; ++i) {
                c.intensities[i] = static_cast<double>(row[i]);
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

template <typename T>
Spectrum clean(SiameseModel<T>& m, const Spectrum& s) {
    return clean_batch(m, std::vector<Spectrum>{s}, 1).front();
}

} // namespace spectronet
