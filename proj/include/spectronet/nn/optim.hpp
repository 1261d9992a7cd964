#pragma once

#include <cmath>
#include <vector>

#include "spectronet/nn/layers.hpp"

namespace spectronet::nn {

/// SGD with classical momentum: v <- momentum * v + g; p <- p - lr * v.
template <typename T>
class Sgd {
public:
    Sgd(T lr, T momentum) : lr_(lr), momentum_(momentum) {
        if (!(lr > T(0))) throw UsageError("sgd: lr must be positive");
        if (!(momentum >= T(0)) || !(momentum < T(1))) {
            throw UsageError("sgd: momentum must be in [0, 1)");
        }
    }

    void set_lr(T lr) { lr_ = lr; }
    T lr() const { return lr_; }

    void step(std::vector<ParamRef<T>>& params) {
        if (velocity_.empty()) {
            velocity_.resize(params.size());
            for (std::size_t p = 0; p < params.size(); ++p) {
                velocity_[p].assign(params[p].value->size(), T(0));
            }
        }
        if (velocity_.size() != params.size()) {
            throw UsageError("sgd: parameter set changed between steps");
        }
        for (std::size_t p = 0; p < params.size(); ++p) {
            auto& v = velocity_[p];
            auto& val = *params[p].value;
            auto& g = *params[p].grad;
            if (v.size() != val.size() || g.size() != val.size()) {
                throw UsageError("sgd: shape mismatch for " + params[p].name);
            }
            for (std::size_t i = 0; i < val.size(); ++i) {
                v[i] = momentum_ * v[i] + g[i];
                val[i] -= lr_ * v[i];
            }
        }
    }

    static void zero_grad(std::vector<ParamRef<T>>& params) {
        for (auto& p : params) {
            std::fill(p.grad->begin(), p.grad->end(), T(0));
        }
    }

private:
    T lr_;
    T momentum_;
    std::vector<std::vector<T>> velocity_;
};

/// Hold-then-decay cosine schedule: lr0 for t < t_start, then
/// lr0 * 0.5 * (1 + cos(pi * (t - t_start) / (T - t_start))) down to 0 at
/// t = T.
inline double cosine_lr(std::size_t t, std::size_t total, double lr0,
                        std::size_t t_start) {
    if (total <= t_start) {
        throw UsageError("cosine_lr: total epochs must exceed decay start");
    }
    if (t > total) {
        throw UsageError("cosine_lr: epoch beyond schedule end");
    }
    if (t < t_start) return lr0;
    const double frac = static_cast<double>(t - t_start) /
                        static_cast<double>(total - t_start);
    return lr0 * 0.5 * (1.0 + std::cos(3.14159265358979323846 * frac));
}

} // namespace spectronet::nn
