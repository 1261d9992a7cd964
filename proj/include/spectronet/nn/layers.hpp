#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "spectronet/nn/gemm.hpp"
#include "spectronet/nn/tensor.hpp"

namespace spectronet::nn {

/// Handle to one trainable parameter vector and its gradient accumulator.
template <typename T>
struct ParamRef {
    std::vector<T>* value;
    std::vector<T>* grad;
    std::string name;
};

namespace detail {

template <typename T>
using StridedCol =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>, Eigen::Unaligned,
               Eigen::InnerStride<Eigen::Dynamic>>;

template <typename T>
using ConstStridedCol =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>, Eigen::Unaligned,
               Eigen::InnerStride<Eigen::Dynamic>>;

} // namespace detail

/// 1-D convolution with cross-correlation semantics, stride 1, zero
/// same-padding and an odd kernel. Output length equals input length.
///
/// The kernel is evaluated as k shifted (out_ch x in_ch) matrix products
/// over the whole batch; columns whose shifted read would cross a sample
/// boundary are corrected afterwards, which keeps the bulk of the work in
/// large GEMMs without an im2col copy.
template <typename T>
class Conv1d {
public:
    Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel)
        : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel) {
        if (kernel % 2 == 0) {
            throw UsageError("conv1d: kernel size must be odd");
        }
        weight.assign(kernel * out_ch * in_ch, T(0));
        bias.assign(out_ch, T(0));
        grad_weight.assign(weight.size(), T(0));
        grad_bias.assign(bias.size(), T(0));
    }

    std::size_t in_channels() const { return in_ch_; }
    std::size_t out_channels() const { return out_ch_; }
    std::size_t kernel() const { return kernel_; }

    /// Weight element for logical shape (out_ch, in_ch, kernel). Storage is
    /// tap-major: tap t is one contiguous (out_ch x in_ch) matrix.
    T& weight_at(std::size_t out, std::size_t in, std::size_t tap) {
        return weight[(tap * out_ch_ + out) * in_ch_ + in];
    }

    Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/ = Mode::train) {
        require_shape(x, in_ch_, "conv1d");
        input_ = x;
        Tensor<T> out(x.batch, out_ch_, x.length);
        run_taps(x, out);
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        if (input_.numel() == 0) {
            throw UsageError("conv1d: backward before forward");
        }
        require_shape(grad_out, out_ch_, "conv1d backward");
        if (grad_out.batch != input_.batch ||
            grad_out.length != input_.length) {
            throw UsageError("conv1d: grad shape mismatch");
        }
        const auto B = input_.batch;
        const auto L = input_.length;
        const Eigen::Index BL = static_cast<Eigen::Index>(B * L);
        const long half = static_cast<long>(kernel_ / 2);

        for (std::size_t f = 0; f < out_ch_; ++f) {
            const T* g = grad_out.channel(f);
            T acc = T(0);
            for (std::size_t i = 0; i < B * L; ++i) acc += g[i];
            grad_bias[f] += acc;
        }

        Tensor<T> grad_x(B, in_ch_, L);
        auto gmat = map_matrix(grad_out.data.data(),
                               static_cast<Eigen::Index>(out_ch_), BL, BL);
        auto xmat = map_matrix(input_.data.data(),
                               static_cast<Eigen::Index>(in_ch_), BL, BL);
        auto gxmat = map_matrix(grad_x.data.data(),
                                static_cast<Eigen::Index>(in_ch_), BL, BL);

        for (std::size_t t = 0; t < kernel_; ++t) {
            const long d = static_cast<long>(t) - half;
            const Eigen::Index j0 = std::max<long>(0, -d);
            const Eigen::Index j1 = BL - std::max<long>(0, d);
            if (j1 <= j0) continue;
            const Eigen::Index n = j1 - j0;

            auto wt = map_matrix(weight.data() + t * out_ch_ * in_ch_,
                                 static_cast<Eigen::Index>(out_ch_),
                                 static_cast<Eigen::Index>(in_ch_),
                                 static_cast<Eigen::Index>(in_ch_));
            auto gwt = map_matrix(grad_weight.data() + t * out_ch_ * in_ch_,
                                  static_cast<Eigen::Index>(out_ch_),
                                  static_cast<Eigen::Index>(in_ch_),
                                  static_cast<Eigen::Index>(in_ch_));
            auto gblk = gmat.block(0, j0, out_ch_, n);
            auto xblk = xmat.block(0, j0 + d, in_ch_, n);
            gwt.noalias() += gblk * xblk.transpose();
            gxmat.block(0, j0 + d, in_ch_, n).noalias() +=
                wt.transpose() * gblk;

            for_each_cross_boundary(B, L, d, j0, j1, [&](Eigen::Index j) {
                auto gcol = strided_col(grad_out.data.data() + j, out_ch_, BL);
                auto xcol = strided_col(input_.data.data() + j + d, in_ch_, BL);
                auto gxcol =
                    strided_col_mut(grad_x.data.data() + j + d, in_ch_, BL);
                gwt.noalias() -= gcol * xcol.transpose();
                gxcol.noalias() -= wt.transpose() * gcol;
            });
        }
        return grad_x;
    }

    void collect_params(std::vector<ParamRef<T>>& out,
                        const std::string& prefix) {
        out.push_back({&weight, &grad_weight, prefix + ".weight"});
        out.push_back({&bias, &grad_bias, prefix + ".bias"});
    }

    std::vector<T> weight;
    std::vector<T> bias;
    std::vector<T> grad_weight;
    std::vector<T> grad_bias;

private:
    static detail::ConstStridedCol<T> strided_col(const T* p, std::size_t n,
                                                  Eigen::Index stride) {
        return detail::ConstStridedCol<T>(p, static_cast<Eigen::Index>(n),
                                          Eigen::InnerStride<>(stride));
    }
    static detail::StridedCol<T> strided_col_mut(T* p, std::size_t n,
                                                 Eigen::Index stride) {
        return detail::StridedCol<T>(p, static_cast<Eigen::Index>(n),
                                     Eigen::InnerStride<>(stride));
    }

    /// Calls fn for every global column j in [j0, j1) whose shifted read
    /// j + d lands outside j's own sample.
    template <typename Fn>
    static void for_each_cross_boundary(std::size_t B, std::size_t L, long d,
                                        Eigen::Index j0, Eigen::Index j1,
                                        Fn&& fn) {
        if (d == 0) return;
        const long Ll = static_cast<long>(L);
        for (std::size_t b = 0; b < B; ++b) {
            const long base = static_cast<long>(b) * Ll;
            long lo, hi;
            if (d > 0) {
                lo = std::max<long>(0, Ll - d);
                hi = Ll;
            } else {
                lo = 0;
                hi = std::min<long>(-d, Ll);
            }
            for (long i = lo; i < hi; ++i) {
                const long j = base + i;
                if (j >= j0 && j < j1) fn(static_cast<Eigen::Index>(j));
            }
        }
    }

    void run_taps(const Tensor<T>& x, Tensor<T>& out) const {
        const auto B = x.batch;
        const auto L = x.length;
        const Eigen::Index BL = static_cast<Eigen::Index>(B * L);
        const long half = static_cast<long>(kernel_ / 2);

        for (std::size_t f = 0; f < out_ch_; ++f) {
            T* o = out.channel(f);
            const T b = bias[f];
            for (std::size_t i = 0; i < B * L; ++i) o[i] = b;
        }

        auto xmat = map_matrix(x.data.data(), static_cast<Eigen::Index>(in_ch_),
                               BL, BL);
        auto omat = map_matrix(out.data.data(),
                               static_cast<Eigen::Index>(out_ch_), BL, BL);
        for (std::size_t t = 0; t < kernel_; ++t) {
            const long d = static_cast<long>(t) - half;
            const Eigen::Index j0 = std::max<long>(0, -d);
            const Eigen::Index j1 = BL - std::max<long>(0, d);
            if (j1 <= j0) continue;
            const Eigen::Index n = j1 - j0;

            auto wt = map_matrix(weight.data() + t * out_ch_ * in_ch_,
                                 static_cast<Eigen::Index>(out_ch_),
                                 static_cast<Eigen::Index>(in_ch_),
                                 static_cast<Eigen::Index>(in_ch_));
            omat.block(0, j0, out_ch_, n).noalias() +=
                wt * xmat.block(0, j0 + d, in_ch_, n);

            for_each_cross_boundary(B, L, d, j0, j1, [&](Eigen::Index j) {
                auto ocol = strided_col_mut(out.data.data() + j, out_ch_, BL);
                auto xcol = strided_col(x.data.data() + j + d, in_ch_, BL);
                ocol.noalias() -= wt * xcol;
            });
        }
    }

    std::size_t in_ch_;
    std::size_t out_ch_;
    std::size_t kernel_;
    Tensor<T> input_;
};

/// Per-channel batch normalization over (batch, length). Train mode uses
/// batch statistics and maintains running estimates; eval mode uses the
/// running estimates. eps = 1e-5, running-stat momentum = 0.1.
template <typename T>
class BatchNorm1d {
public:
    explicit BatchNorm1d(std::size_t channels)
        : channels_(channels),
          gamma(channels, T(1)),
          beta(channels, T(0)),
          running_mean(channels, T(0)),
          running_var(channels, T(1)),
          grad_gamma(channels, T(0)),
          grad_beta(channels, T(0)) {}

    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

    Tensor<T> forward(const Tensor<T>& x, Mode mode) {
        require_shape(x, channels_, "batchnorm1d");
        const std::size_t n = x.batch * x.length;
        Tensor<T> out(x.batch, channels_, x.length);

        if (mode == Mode::eval) {
            if (!stats_ready_) {
                throw UsageError("batchnorm1d: eval mode before running "
                                 "statistics were initialized");
            }
            for (std::size_t c = 0; c < channels_; ++c) {
                const T rstd =
                    T(1) / std::sqrt(running_var[c] + static_cast<T>(kEps));
                const T a = gamma[c] * rstd;
                const T b = beta[c] - a * running_mean[c];
                const T* in = x.channel(c);
                T* o = out.channel(c);
                for (std::size_t i = 0; i < n; ++i) o[i] = a * in[i] + b;
            }
            return out;
        }

        x_norm_ = Tensor<T>(x.batch, channels_, x.length);
        rstd_.assign(channels_, T(0));
        const T invn = T(1) / static_cast<T>(n);
        for (std::size_t c = 0; c < channels_; ++c) {
            const T* in = x.channel(c);
            T mean = T(0);
            for (std::size_t i = 0; i < n; ++i) mean += in[i];
            mean *= invn;
            T var = T(0);
            for (std::size_t i = 0; i < n; ++i) {
                const T d = in[i] - mean;
                var += d * d;
            }
            var *= invn;
            const T rstd = T(1) / std::sqrt(var + static_cast<T>(kEps));
            rstd_[c] = rstd;
            T* xn = x_norm_.channel(c);
            T* o = out.channel(c);
            for (std::size_t i = 0; i < n; ++i) {
                xn[i] = (in[i] - mean) * rstd;
                o[i] = gamma[c] * xn[i] + beta[c];
            }
            const T unbiased =
                n > 1 ? var * static_cast<T>(n) / static_cast<T>(n - 1) : var;
            running_mean[c] = static_cast<T>(1.0 - kMomentum) * running_mean[c] +
                              static_cast<T>(kMomentum) * mean;
            running_var[c] = static_cast<T>(1.0 - kMomentum) * running_var[c] +
                             static_cast<T>(kMomentum) * unbiased;
        }
        stats_ready_ = true;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        if (x_norm_.numel() == 0) {
            throw UsageError("batchnorm1d: backward before train forward");
        }
        require_shape(grad_out, channels_, "batchnorm1d backward");
        const std::size_t n = grad_out.batch * grad_out.length;
        const T invn = T(1) / static_cast<T>(n);
        Tensor<T> grad_x(grad_out.batch, channels_, grad_out.length);
        for (std::size_t c = 0; c < channels_; ++c) {
            const T* g = grad_out.channel(c);
            const T* xn = x_norm_.channel(c);
            T sg = T(0), sgx = T(0);
            for (std::size_t i = 0; i < n; ++i) {
                sg += g[i];
                sgx += g[i] * xn[i];
            }
            grad_gamma[c] += sgx;
            grad_beta[c] += sg;
            const T a = gamma[c] * rstd_[c];
            const T mg = sg * invn;
            const T mgx = sgx * invn;
            T* gx = grad_x.channel(c);
            for (std::size_t i = 0; i < n; ++i) {
                gx[i] = a * (g[i] - mg - xn[i] * mgx);
            }
        }
        return grad_x;
    }

    void collect_params(std::vector<ParamRef<T>>& out,
                        const std::string& prefix) {
        out.push_back({&gamma, &grad_gamma, prefix + ".gamma"});
        out.push_back({&beta, &grad_beta, prefix + ".beta"});
    }

    void mark_stats_ready() { stats_ready_ = true; }
    bool stats_ready() const { return stats_ready_; }
    std::size_t channels() const { return channels_; }

    std::vector<T> gamma;
    std::vector<T> beta;
    std::vector<T> running_mean;
    std::vector<T> running_var;
    std::vector<T> grad_gamma;
    std::vector<T> grad_beta;

private:
    std::size_t channels_;
    bool stats_ready_ = false;
    Tensor<T> x_norm_;
    std::vector<T> rstd_;
};

/// Elementwise max(0, x).
template <typename T>
class Relu {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/ = Mode::train) {
        input_ = x;
        Tensor<T> out = x;
        for (T& v : out.data) v = v > T(0) ? v : T(0);
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        if (input_.numel() == 0) {
            throw UsageError("relu: backward before forward");
        }
        if (!grad_out.same_shape(input_)) {
            throw UsageError("relu: grad shape mismatch");
        }
        Tensor<T> grad_x = grad_out;
        for (std::size_t i = 0; i < grad_x.data.size(); ++i) {
            if (!(input_.data[i] > T(0))) grad_x.data[i] = T(0);
        }
        return grad_x;
    }

private:
    Tensor<T> input_;
};

/// Affine map on (batch, features, 1) tensors: out = W x + b per sample.
template <typename T>
class Linear {
public:
    Linear(std::size_t in_features, std::size_t out_features)
        : in_(in_features),
          out_(out_features),
          weight(in_features * out_features, T(0)),
          bias(out_features, T(0)),
          grad_weight(in_features * out_features, T(0)),
          grad_bias(out_features, T(0)) {}

    T& weight_at(std::size_t out, std::size_t in) {
        return weight[out * in_ + in];
    }

    Tensor<T> forward(const Tensor<T>& x, Mode /*mode*/ = Mode::train) {
        require_shape(x, in_, "linear");
        if (x.length != 1) {
            throw UsageError("linear: expected length-1 tensors");
        }
        input_ = x;
        const Eigen::Index B = static_cast<Eigen::Index>(x.batch);
        Tensor<T> out(x.batch, out_, 1);
        auto xm = map_matrix(x.data.data(), static_cast<Eigen::Index>(in_), B,
                             B);
        auto om = map_matrix(out.data.data(), static_cast<Eigen::Index>(out_),
                             B, B);
        auto wm = map_matrix(weight.data(), static_cast<Eigen::Index>(out_),
                             static_cast<Eigen::Index>(in_),
                             static_cast<Eigen::Index>(in_));
        om.noalias() = wm * xm;
        for (std::size_t f = 0; f < out_; ++f) {
            T* o = out.channel(f);
            for (std::size_t b = 0; b < x.batch; ++b) o[b] += bias[f];
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& grad_out) {
        if (input_.numel() == 0) {
            throw UsageError("linear: backward before forward");
        }
        require_shape(grad_out, out_, "linear backward");
        const Eigen::Index B = static_cast<Eigen::Index>(input_.batch);
        Tensor<T> grad_x(input_.batch, in_, 1);
        auto gm = map_matrix(grad_out.data.data(),
                             static_cast<Eigen::Index>(out_), B, B);
        auto xm = map_matrix(input_.data.data(),
                             static_cast<Eigen::Index>(in_), B, B);
        auto gxm = map_matrix(grad_x.data.data(),
                              static_cast<Eigen::Index>(in_), B, B);
        auto wm = map_matrix(weight.data(), static_cast<Eigen::Index>(out_),
                             static_cast<Eigen::Index>(in_),
                             static_cast<Eigen::Index>(in_));
        auto gwm = map_matrix(grad_weight.data(),
                              static_cast<Eigen::Index>(out_),
                              static_cast<Eigen::Index>(in_),
                              static_cast<Eigen::Index>(in_));
        gwm.noalias() += gm * xm.transpose();
        for (std::size_t f = 0; f < out_; ++f) {
            const T* g = grad_out.channel(f);
            T acc = T(0);
            for (std::size_t b = 0; b < input_.batch; ++b) acc += g[b];
            grad_bias[f] += acc;
        }
        gxm.noalias() = wm.transpose() * gm;
        return grad_x;
    }

    void collect_params(std::vector<ParamRef<T>>& out,
                        const std::string& prefix) {
        out.push_back({&weight, &grad_weight, prefix + ".weight"});
        out.push_back({&bias, &grad_bias, prefix + ".bias"});
    }

    std::size_t in_features() const { return in_; }
    std::size_t out_features() const { return out_; }

    std::vector<T> weight;
    std::vector<T> bias;
    std::vector<T> grad_weight;
    std::vector<T> grad_bias;

private:
    std::size_t in_;
    std::size_t out_;
    Tensor<T> input_;
};

} // namespace spectronet::nn
