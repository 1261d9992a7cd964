#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "spectronet/nn/layers.hpp"

namespace spectronet::nn {

/// Central-finite-difference verification of analytic gradients.
///
/// `objective` must recompute the scalar value from the current contents of
/// the parameter vectors; `params` pairs each parameter with its analytic
/// gradient (already computed by a backward pass). Coordinates where both
/// the analytic and numeric gradients are below `atol` are treated as
/// matching; everything else contributes
/// |fd - g| / max(|fd|, |g|) to the returned maximum.
inline double grad_check(const std::function<double()>& objective,
                         std::vector<ParamRef<double>>& params,
                         double eps = 1e-5, double atol = 1e-9) {
    double max_rel = 0.0;
    for (auto& p : params) {
        auto& value = *p.value;
        auto& grad = *p.grad;
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double saved = value[i];
            value[i] = saved + eps;
            const double plus = objective();
            value[i] = saved - eps;
            const double minus = objective();
            value[i] = saved;
            const double fd = (plus - minus) / (2.0 * eps);
            const double diff = std::abs(fd - grad[i]);
            if (diff < atol) continue;
            const double denom = std::max(std::abs(fd), std::abs(grad[i]));
            max_rel = std::max(max_rel, diff / denom);
        }
    }
    return max_rel;
}

} // namespace spectronet::nn
