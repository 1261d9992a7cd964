#pragma once

#include <cstddef>
#include <vector>

#include "spectronet/errors.hpp"

namespace spectronet::nn {

enum class Mode { train, eval };

/// Dense rank-3 tensor with logical shape (batch, channels, length).
///
/// Physical layout is channel-major: element (b, c, i) lives at
/// data[(c * batch + b) * length + i]. Each channel is therefore one
/// contiguous (batch * length) block, which is what the GEMM-based conv and
/// the per-channel batch-norm reductions want.
template <typename T>
struct Tensor {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t length = 0;
    std::vector<T> data;
    std::vector<T> grad; // optional; same layout as data when non-empty

    Tensor() = default;
    Tensor(std::size_t b, std::size_t c, std::size_t l)
        : batch(b), channels(c), length(l), data(b * c * l, T(0)) {}

    std::size_t numel() const { return batch * channels * length; }

    T& at(std::size_t b, std::size_t c, std::size_t i) {
        return data[(c * batch + b) * length + i];
    }
    T at(std::size_t b, std::size_t c, std::size_t i) const {
        return data[(c * batch + b) * length + i];
    }

    /// Pointer to the contiguous (batch * length) block of one channel.
    T* channel(std::size_t c) { return data.data() + c * batch * length; }
    const T* channel(std::size_t c) const {
        return data.data() + c * batch * length;
    }

    /// Pointer to sample b within channel c (length contiguous values).
    T* row(std::size_t b, std::size_t c) {
        return data.data() + (c * batch + b) * length;
    }
    const T* row(std::size_t b, std::size_t c) const {
        return data.data() + (c * batch + b) * length;
    }

    void ensure_grad() {
        if (grad.size() != data.size()) grad.assign(data.size(), T(0));
    }

    bool same_shape(const Tensor& o) const {
        return batch == o.batch && channels == o.channels && length == o.length;
    }
};

template <typename T>
void require_shape(const Tensor<T>& t, std::size_t channels,
                   const char* where) {
    if (t.channels != channels) {
        throw UsageError(std::string(where) + ": expected " +
                         std::to_string(channels) + " channels, got " +
                         std::to_string(t.channels));
    }
    if (t.data.size() != t.numel()) {
        throw UsageError(std::string(where) + ": tensor data/shape mismatch");
    }
}

} // namespace spectronet::nn
