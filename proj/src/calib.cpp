#include "spectronet/calib/calib.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>

#include "spectronet/nn/layers.hpp"
#include "spectronet/nn/optim.hpp"
#include "spectronet/rng.hpp"

namespace spectronet {

double LinearHead::predict(const std::vector<double>& rep) const {
    if (rep.size() != weights.size()) {
        throw UsageError("head: representation length " +
                         std::to_string(rep.size()) + " != weights length " +
                         std::to_string(weights.size()));
    }
    return std::inner_product(rep.begin(), rep.end(), weights.begin(), bias);
}

LinearHead train_head(const std::vector<std::vector<double>>& reps,
                      const std::vector<double>& labels, Oxide oxide,
                      const HeadConfig& cfg, std::vector<double>* lr_trace) {
    if (reps.size() != labels.size()) {
        throw UsageError("train_head: reps/labels length mismatch");
    }
    if (reps.size() < 2) {
        throw UsageError("train_head: need at least 2 examples");
    }
    const std::size_t dim = reps.front().size();
    for (const auto& r : reps) {
        if (r.size() != dim) {
            throw UsageError("train_head: representations differ in length");
        }
    }
    const bool degenerate =
        std::all_of(reps.begin() + 1, reps.end(),
                    [&](const auto& r) { return r == reps.front(); });
    if (degenerate) {
        std::cerr << "warning: train_head: all representations identical; "
                     "the fit is ill-conditioned\n";
    }

    // Features are standardized with training-set statistics and scaled by
    // 1/sqrt(dim) before SGD, which keeps the squared-error curvature below
    // the lr = 1.0 stability bound regardless of the representation's raw
    // scale. The learned affine map is expressed back in raw feature space
    // before returning.
    std::vector<double> mu(dim, 0.0), scale(dim, 0.0);
    for (const auto& r : reps) {
        for (std::size_t c = 0; c < dim; ++c) mu[c] += r[c];
    }
    const double inv_n = 1.0 / static_cast<double>(reps.size());
    for (double& m : mu) m *= inv_n;
    for (const auto& r : reps) {
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = r[c] - mu[c];
            scale[c] += d * d;
        }
    }
    const double root_dim = std::sqrt(static_cast<double>(dim));
    for (double& s : scale) {
        s = std::sqrt(s * inv_n);
        if (!(s > 1e-12)) s = 1.0; // constant feature: centered to zero
        s *= root_dim;
    }

    nn::Linear<double> layer(dim, 1);
    std::vector<nn::ParamRef<double>> params;
    layer.collect_params(params, "head");
    nn::Sgd<double> sgd(cfg.lr0, cfg.momentum);

    Rng rng(derive_seed(cfg.seed, {0xCA11Bu}));
    std::vector<std::size_t> order(reps.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = nn::cosine_lr(epoch, cfg.epochs, cfg.lr0,
                                        cfg.decay_start);
        if (lr_trace) lr_trace->push_back(lr);
        sgd.set_lr(lr);
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size) {
            const std::size_t m =
                std::min(cfg.batch_size, order.size() - start);
            nn::Tensor<double> x(m, dim, 1);
            std::vector<double> y(m);
            for (std::size_t b = 0; b < m; ++b) {
                const auto& rep = reps[order[start + b]];
                for (std::size_t c = 0; c < dim; ++c) {
                    x.at(b, c, 0) = (rep[c] - mu[c]) / scale[c];
                }
                y[b] = labels[order[start + b]];
            }
            nn::Tensor<double> pred = layer.forward(x);
            nn::Tensor<double> grad(m, 1, 1);
            const double inv = 2.0 / static_cast<double>(m);
            for (std::size_t b = 0; b < m; ++b) {
                grad.at(b, 0, 0) = inv * (pred.at(b, 0, 0) - y[b]);
            }
            nn::Sgd<double>::zero_grad(params);
            layer.backward(grad);
            sgd.step(params);
        }
    }

    LinearHead head;
    head.weights.resize(dim);
    head.bias = layer.bias[0];
    for (std::size_t c = 0; c < dim; ++c) {
        head.weights[c] = layer.weight[c] / scale[c];
        head.bias -= layer.weight[c] * mu[c] / scale[c];
    }
    head.oxide = oxide;
    return head;
}

double rmse(const std::vector<double>& pred,
            const std::vector<double>& truth) {
    if (pred.empty() || pred.size() != truth.size()) {
        throw UsageError("rmse: empty input or length mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

double maxe(const std::vector<double>& pred,
            const std::vector<double>& truth) {
    if (pred.empty() || pred.size() != truth.size()) {
        throw UsageError("maxe: empty input or length mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        m = std::max(m, std::abs(pred[i] - truth[i]));
    }
    return m;
}

CalibrationRecord loo_evaluate(const Dataset& d, const RepFn& rep_fn,
                               Oxide oxide, const LooConfig& cfg) {
    for (const auto& target : d.target_ids()) {
        if (d.labels.find(target) == d.labels.end()) {
            throw DataError("loo_evaluate: coverage gap, target '" + target +
                            "' has no oxide labels");
        }
    }
    std::vector<std::string> standards = d.target_ids();
    if (standards.size() < 3) {
        throw UsageError("loo_evaluate: need labels for at least 3 "
                         "standards, have " +
                         std::to_string(standards.size()));
    }

    // Shot-averaged representations per (target, location).
    std::map<std::pair<std::string, int>, std::vector<const Spectrum*>>
        groups;
    for (const Spectrum& s : d.samples) {
        groups[{s.target_id, s.location_id}].push_back(&s);
    }
    struct Avg {
        std::string target;
        std::vector<double> rep;
    };
    std::vector<Avg> averages;
    averages.reserve(groups.size());
    for (const auto& [key, shots] : groups) {
        std::vector<double> mean = rep_fn(*shots.front());
        for (std::size_t k = 1; k < shots.size(); ++k) {
            std::vector<double> rep = rep_fn(*shots[k]);
            if (rep.size() != mean.size()) {
                throw UsageError("loo_evaluate: rep_fn output length varies");
            }
            for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += rep[i];
        }
        const double inv = 1.0 / static_cast<double>(shots.size());
        for (double& v : mean) v *= inv;
        averages.push_back({key.first, std::move(mean)});
    }

    // Fold assignment: full LOO by default; grouped k-fold only past 100
    // standards and only when requested.
    const std::size_t oxide_idx = static_cast<std::size_t>(oxide);
    std::vector<std::size_t> fold_of(standards.size());
    std::size_t n_folds;
    if (cfg.kfold > 1 && standards.size() > 100) {
        n_folds = std::min(cfg.kfold, standards.size());
        for (std::size_t i = 0; i < standards.size(); ++i) {
            fold_of[i] = i % n_folds;
        }
    } else {
        n_folds = standards.size();
        std::iota(fold_of.begin(), fold_of.end(), 0);
    }
    std::map<std::string, std::size_t> standard_index;
    for (std::size_t i = 0; i < standards.size(); ++i) {
        standard_index[standards[i]] = i;
    }

    CalibrationRecord rec;
    rec.oxide = oxide;
    rec.target_ids = standards;
    rec.truth.resize(standards.size());
    rec.prediction.resize(standards.size());
    rec.heads.resize(standards.size());
    for (std::size_t i = 0; i < standards.size(); ++i) {
        rec.truth[i] = d.labels.at(standards[i])[oxide_idx];
    }

    for (std::size_t fold = 0; fold < n_folds; ++fold) {
        std::vector<std::vector<double>> train_reps;
        std::vector<double> train_labels;
        for (const Avg& a : averages) {
            if (fold_of[standard_index[a.target]] == fold) continue;
            train_reps.push_back(a.rep);
            train_labels.push_back(d.labels.at(a.target)[oxide_idx]);
        }
        HeadConfig hc = cfg.head;
        hc.seed = derive_seed(cfg.seed, {0xF01Du, fold});
        LinearHead head = train_head(train_reps, train_labels, oxide, hc);

        for (std::size_t i = 0; i < standards.size(); ++i) {
            if (fold_of[i] != fold) continue;
            double sum = 0.0;
            std::size_t count = 0;
            for (const Avg& a : averages) {
                if (a.target != standards[i]) continue;
                sum += head.predict(a.rep);
                ++count;
            }
            double pred = sum / static_cast<double>(count);
            if (cfg.clamp_nonnegative && pred < 0.0) pred = 0.0;
            rec.prediction[i] = pred;
            rec.heads[i] = head;
        }
    }

    rec.rmse = rmse(rec.prediction, rec.truth);
    rec.maxe = maxe(rec.prediction, rec.truth);
    return rec;
}

} // namespace spectronet
