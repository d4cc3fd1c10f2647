#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdd/kernels.hpp"
#include "rdd/learn.hpp"
#include "rdd/parallel.hpp"

namespace rdd {

namespace {

// Block size for the likelihood reduction. Partial sums are combined in block order,
// so the result does not depend on the worker count.
constexpr std::size_t kBlock = 16384;

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate: must be positive");
    if (!(grad_tolerance > 0.0)) throw ConfigError("grad_tolerance: must be positive");
    if (!(l2_lambda >= 0.0)) throw ConfigError("l2_lambda: must be >= 0");
    if (max_iters < 0) throw ConfigError("max_iters: must be >= 0");
    if (max_depth < 0) throw ConfigError("max_depth: must be >= 0");
    if (min_leaf < 1) throw ConfigError("min_leaf: must be >= 1");
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double predict_logistic(const LogisticModel& model, const FeatureVector& x) {
    if (model.betas.size() != model.feature_subset.size())
        throw Error("logistic model: coefficient count does not match the feature subset");
    double z = model.alpha;
    for (std::size_t j = 0; j < model.betas.size(); ++j) {
        const Feature f = model.feature_subset[j];
        const double v = x[f];
        if (!std::isfinite(v))
            throw Error("predict_logistic: feature '" + std::string(feature_name(f)) + "' is missing");
        z += model.betas[j] * model.standardizer.apply(f, v);
    }
    return sigmoid(z);
}

LogisticObjective::LogisticObjective(std::span<const LabeledSample> standardized,
                                     const FeatureSubset& subset, double l2_lambda, unsigned threads)
    : subset_(subset), lambda_(l2_lambda), threads_(threads) {
    columns_.assign(subset_.size(), std::vector<double>(standardized.size()));
    labels_.resize(standardized.size());
    for (std::size_t i = 0; i < standardized.size(); ++i) {
        for (std::size_t j = 0; j < subset_.size(); ++j) columns_[j][i] = standardized[i].features[subset_[j]];
        labels_[i] = standardized[i].label;
    }
}

double LogisticObjective::loss(std::span<const double> params) const { return evaluate(params, {}); }

double LogisticObjective::loss_and_gradient(std::span<const double> params,
                                            std::span<double> gradient) const {
    if (gradient.size() != dimension()) throw Error("gradient buffer has the wrong size");
    return evaluate(params, gradient);
}

double LogisticObjective::evaluate(std::span<const double> params, std::span<double> gradient) const {
    if (params.size() != dimension()) throw Error("parameter vector has the wrong size");
    const std::size_t n = labels_.size();
    const std::size_t d = dimension();
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    const bool want_grad = !gradient.empty();
    // Per block: [loss, d gradient entries].
    std::vector<double> partial(blocks * (d + 1), 0.0);

    parallel_for(blocks, threads_, [&](std::size_t bb, std::size_t be) {
        std::vector<double> z(kBlock);
        std::vector<double> r(want_grad ? kBlock : 0);
        for (std::size_t b = bb; b < be; ++b) {
            const std::size_t lo = b * kBlock;
            const std::size_t len = std::min(kBlock, n - lo);
            std::span<double> zs(z.data(), len);
            std::fill(zs.begin(), zs.end(), params[0]);
            for (std::size_t j = 0; j + 1 < d; ++j)
                kernels::axpy(params[j + 1], std::span(columns_[j].data() + lo, len), zs);
            const std::span<const double> ys(labels_.data() + lo, len);
            double* out = partial.data() + b * (d + 1);
            if (want_grad) {
                std::span<double> rs(r.data(), len);
                out[0] = kernels::logistic_nll(zs, ys, rs);
                out[1] = std::accumulate(rs.begin(), rs.end(), 0.0);
                for (std::size_t j = 0; j + 1 < d; ++j)
                    out[j + 2] = kernels::dot(rs, std::span(columns_[j].data() + lo, len));
            } else {
                out[0] = kernels::logistic_nll(zs, ys, {});
            }
        }
    });

    const double inv_n = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    if (want_grad) std::fill(gradient.begin(), gradient.end(), 0.0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const double* p = partial.data() + b * (d + 1);
        loss += p[0];
        if (want_grad)
            for (std::size_t k = 0; k < d; ++k) gradient[k] += p[k + 1];
    }
    loss *= inv_n;
    double penalty = 0.0;
    for (std::size_t j = 1; j < d; ++j) penalty += params[j] * params[j];
    loss += 0.5 * lambda_ * penalty;
    if (want_grad) {
        for (std::size_t k = 0; k < d; ++k) gradient[k] *= inv_n;
        for (std::size_t j = 1; j < d; ++j) gradient[j] += lambda_ * params[j];
    }
    return loss;
}

LogisticModel train_logistic(std::span<const LabeledSample> train, const FeatureSubset& subset,
                             const TrainConfig& config) {
    config.validate();
    if (subset.empty()) throw ConfigError("train_logistic: empty feature subset");
    const auto positives = std::count_if(train.begin(), train.end(), [](const auto& s) { return s.label == 1; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(train.size()))
        throw Error("train_logistic: training set must contain both classes");

    LogisticModel model;
    model.feature_subset = subset;
    model.standardizer = fit_standardizer(train, subset);
    const auto standardized = apply_standardizer(model.standardizer, train);
    const LogisticObjective objective(standardized, subset, config.l2_lambda, config.threads);

    const std::size_t d = objective.dimension();
    std::vector<double> theta(d, 0.0), grad(d), trial(d), trial_grad(d), prev_theta(d), prev_grad(d);
    double loss = objective.loss_and_gradient(theta, grad);
    double step = config.learning_rate;
    TrainingInfo& info = model.info;
    info.loss_history.push_back(loss);

    for (int it = 0; it < config.max_iters; ++it) {
        if (inf_norm(grad) < config.grad_tolerance) {
            info.converged = true;
            break;
        }
        // Barzilai-Borwein proposal for the first trial step, then halve until the loss drops.
        if (it > 0) {
            double ss = 0.0, sy = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double s = theta[k] - prev_theta[k];
                const double y = grad[k] - prev_grad[k];
                ss += s * s;
                sy += s * y;
            }
            step = sy > 0.0 ? ss / sy : config.learning_rate;
        }
        double trial_loss = 0.0;
        bool decreased = false;
        for (int halvings = 0; halvings < 200; ++halvings) {
            for (std::size_t k = 0; k < d; ++k) trial[k] = theta[k] - step * grad[k];
            trial_loss = objective.loss_and_gradient(trial, trial_grad);
            if (trial_loss < loss) {
                decreased = true;
                break;
            }
            step *= 0.5;
        }
        if (!decreased) break;  // no representable descent step left
        prev_theta = theta;
        prev_grad = grad;
        theta = trial;
        grad = trial_grad;
        loss = trial_loss;
        info.loss_history.push_back(loss);
        info.iterations = it + 1;
    }
    if (!info.converged && inf_norm(grad) < config.grad_tolerance) info.converged = true;

    model.alpha = theta[0];
    model.betas.assign(theta.begin() + 1, theta.end());
    info.final_loss = loss;
    info.final_grad_norm = inf_norm(grad);
    info.samples = static_cast<std::int64_t>(train.size());
    return model;
}

}  // namespace rdd
