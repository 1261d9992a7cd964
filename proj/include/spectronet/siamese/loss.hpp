#pragma once

#include <cmath>
#include <string>

#include "spectronet/nn/tensor.hpp"

namespace spectronet {

/// Similarity used by the orthogonality and alignment terms. raw_inner is
/// the literal inner product; it is unbounded below through the alignment
/// term, so cosine is the default.
enum class Similarity { raw_inner, cosine };

inline const char* similarity_name(Similarity s) {
    return s == Similarity::cosine ? "cosine" : "raw_inner";
}

inline Similarity similarity_from_name(const std::string& name) {
    if (name == "cosine") return Similarity::cosine;
    if (name == "raw_inner") return Similarity::raw_inner;
    throw UsageError("unknown similarity '" + name +
                     "' (expected cosine or raw_inner)");
}

template <typename T>
struct LossConfig {
    T lambda_rec = T(1);
    T lambda_orth = T(1);
    T lambda_align = T(1);
    Similarity similarity = Similarity::cosine;
    /// Divide the batch sum by this count (0 = keep the plain sum).
    std::size_t normalize_by = 0;
    /// Use ||r||^2 instead of the plain l2 norm in the reconstruction term.
    bool squared_rec = false;
};

/// Weighted, normalized contributions of the three loss terms. The
/// alignment entry is the signed contribution (it enters the total with a
/// minus sign).
struct LossTerms {
    double rec = 0.0;
    double orth = 0.0;
    double align = 0.0;
    double total() const { return rec + orth + align; }
};

namespace detail {

template <typename T>
struct SimValue {
    T s = T(0);      // similarity value
    T inv_ab = T(0); // 1 / (|a||b|), cosine only
    T na2 = T(0), nb2 = T(0);
    bool degenerate = false;
};

template <typename T>
SimValue<T> similarity_eval(const T* a, const T* b, std::size_t n,
                            Similarity sim) {
    SimValue<T> out;
    T dot = T(0);
    for (std::size_t i = 0; i < n; ++i) dot += a[i] * b[i];
    if (sim == Similarity::raw_inner) {
        out.s = dot;
        return out;
    }
    T na2 = T(0), nb2 = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        na2 += a[i] * a[i];
        nb2 += b[i] * b[i];
    }
    const T denom = std::sqrt(na2) * std::sqrt(nb2);
    if (!(denom > T(1e-12))) {
        // Zero-length representation: define s = 0 with zero gradient.
        out.degenerate = true;
        return out;
    }
    out.s = dot / denom;
    out.inv_ab = T(1) / denom;
    out.na2 = na2;
    out.nb2 = nb2;
    return out;
}

/// d(s)/da and d(s)/db scaled by `coef`, accumulated into ga/gb.
template <typename T>
void similarity_backward(const T* a, const T* b, std::size_t n,
                         Similarity sim, const SimValue<T>& v, T coef, T* ga,
                         T* gb) {
    if (sim == Similarity::raw_inner) {
        for (std::size_t i = 0; i < n; ++i) {
            ga[i] += coef * b[i];
            gb[i] += coef * a[i];
        }
        return;
    }
    if (v.degenerate) return;
    const T sa = v.s / v.na2;
    const T sb = v.s / v.nb2;
    for (std::size_t i = 0; i < n; ++i) {
        ga[i] += coef * (b[i] * v.inv_ab - sa * a[i]);
        gb[i] += coef * (a[i] * v.inv_ab - sb * b[i]);
    }
}

} // namespace detail

/// The training objective over a batch of tuples:
///
///   sum_j  l_rec * ||y_j - (zx_j + zn_j)||_2
///        + l_orth * s(zx_j, zn_j)^2
///        - l_align * sum_m s(zn_j, zal_{j,m})
///
/// zal holds the alignment partners grouped per tuple (row j*n_align + m).
/// When grad tensors are supplied they are accumulated into (they must be
/// zero-filled or hold prior accumulations of the same shapes).
template <typename T>
LossTerms siamese_loss(const nn::Tensor<T>& y, const nn::Tensor<T>& zx,
                       const nn::Tensor<T>& zn, const nn::Tensor<T>& zal,
                       std::size_t n_align, const LossConfig<T>& cfg,
                       nn::Tensor<T>* grad_zx = nullptr,
                       nn::Tensor<T>* grad_zn = nullptr,
                       nn::Tensor<T>* grad_zal = nullptr) {
    const std::size_t B = y.batch;
    const std::size_t n = y.length;
    if (!zx.same_shape(y) || !zn.same_shape(y)) {
        throw UsageError("loss: z tensors must match anchor shape");
    }
    if (zal.batch != B * n_align) {
        throw UsageError("loss: alignment tensor batch must be batch*n_align");
    }
    const bool with_grad = grad_zx != nullptr;
    if (with_grad && (!grad_zn || (!grad_zal && n_align > 0))) {
        throw UsageError("loss: all grad tensors required together");
    }

    const T scale = cfg.normalize_by > 0
                        ? T(1) / static_cast<T>(cfg.normalize_by)
                        : T(1);
    LossTerms terms;
    for (std::size_t j = 0; j < B; ++j) {
        const T* yj = y.row(j, 0);
        const T* u = zx.row(j, 0);
        const T* v = zn.row(j, 0);

        // Reconstruction.
        T nr2 = T(0);
        for (std::size_t i = 0; i < n; ++i) {
            const T r = yj[i] - u[i] - v[i];
            nr2 += r * r;
        }
        const T nr = std::sqrt(nr2);
        terms.rec += static_cast<double>(cfg.lambda_rec * scale *
                                         (cfg.squared_rec ? nr2 : nr));
        if (with_grad) {
            // d||r||/d(zx) = -r/||r|| (zero at r = 0); squared: -2r.
            T coef = T(0);
            if (cfg.squared_rec) {
                coef = T(2) * cfg.lambda_rec * scale;
            } else if (nr > T(1e-12)) {
                coef = cfg.lambda_rec * scale / nr;
            }
            if (coef != T(0)) {
                T* gu = grad_zx->row(j, 0);
                T* gv = grad_zn->row(j, 0);
                for (std::size_t i = 0; i < n; ++i) {
                    const T r = yj[i] - u[i] - v[i];
                    gu[i] -= coef * r;
                    gv[i] -= coef * r;
                }
            }
        }

        // Relaxed orthogonality.
        auto sv = detail::similarity_eval(u, v, n, cfg.similarity);
        terms.orth +=
            static_cast<double>(cfg.lambda_orth * scale * sv.s * sv.s);
        if (with_grad) {
            detail::similarity_backward(u, v, n, cfg.similarity, sv,
                                        T(2) * cfg.lambda_orth * scale * sv.s,
                                        grad_zx->row(j, 0), grad_zn->row(j, 0));
        }

        // Alignment across noise representations.
        for (std::size_t m = 0; m < n_align; ++m) {
            const T* w = zal.row(j * n_align + m, 0);
            auto av = detail::similarity_eval(v, w, n, cfg.similarity);
            terms.align -= static_cast<double>(cfg.lambda_align * scale * av.s);
            if (with_grad) {
                detail::similarity_backward(
                    v, w, n, cfg.similarity, av, -cfg.lambda_align * scale,
                    grad_zn->row(j, 0), grad_zal->row(j * n_align + m, 0));
            }
        }
    }
    return terms;
}

} // namespace spectronet
