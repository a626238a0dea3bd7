#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "kdrift/errors.hpp"
#include "kdrift/matrix.hpp"
#include "kdrift/rng.hpp"

namespace kdrift {

// Lower bound on every diagonal variance entry. Applied at construction
// and after every parameter update so densities stay finite on repeated
// or degenerate data.
inline constexpr double kVarianceFloor = 1e-8;

// Tolerance for the mixture weight-sum invariant.
inline constexpr double kWeightSumTol = 1e-9;

// One diagonal-covariance Gaussian component.
struct GaussianComponent {
    double weight = 1.0;
    std::vector<double> mean;
    std::vector<double> var;  // diagonal of the covariance matrix

    std::size_t dim() const { return mean.size(); }

    double log_pdf(std::span<const double> x) const {
        double q = 0.0;
        for (std::size_t j = 0; j < mean.size(); ++j) {
            const double d = x[j] - mean[j];
            q += std::log(2.0 * std::numbers::pi * var[j]) + d * d / var[j];
        }
        return -0.5 * q;
    }

    bool operator==(const GaussianComponent&) const = default;
};

// Floors variances and checks mean/var agree in dimension.
inline GaussianComponent make_component(double weight, std::vector<double> mean,
                                        std::vector<double> var) {
    if (mean.size() != var.size()) {
        throw RejectedInput("component mean dimension " + std::to_string(mean.size()) +
                            " != variance dimension " + std::to_string(var.size()));
    }
    for (double& v : var) v = std::max(v, kVarianceFloor);
    return GaussianComponent{weight, std::move(mean), std::move(var)};
}

// Weighted set of Gaussian components. Treated as immutable once built:
// every operation returns a new model.
struct MixtureModel {
    std::vector<GaussianComponent> components;

    std::size_t size() const { return components.size(); }
    std::size_t dim() const { return components.empty() ? 0 : components.front().dim(); }

    bool operator==(const MixtureModel&) const = default;
};

// Reports every invariant violation; an empty list means the model is valid.
inline std::vector<std::string> validate(const MixtureModel& model) {
    std::vector<std::string> violations;
    if (model.components.empty()) {
        violations.push_back("model has no components");
        return violations;
    }
    const std::size_t d = model.components.front().dim();
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < model.components.size(); ++k) {
        const auto& c = model.components[k];
        const std::string tag = "component " + std::to_string(k) + ": ";
        if (c.dim() != d) violations.push_back(tag + "dimension != " + std::to_string(d));
        if (c.mean.size() != c.var.size())
            violations.push_back(tag + "mean/variance dimension mismatch");
        if (!(c.weight >= 0.0 && c.weight <= 1.0))
            violations.push_back(tag + "weight outside [0, 1]");
        if (!std::isfinite(c.weight)) violations.push_back(tag + "non-finite weight");
        for (double m : c.mean) {
            if (!std::isfinite(m)) {
                violations.push_back(tag + "non-finite mean");
                break;
            }
        }
        for (double v : c.var) {
            if (!(v >= kVarianceFloor)) {
                violations.push_back(tag + "variance below floor");
                break;
            }
        }
        weight_sum += c.weight;
    }
    if (std::abs(weight_sum - 1.0) > kWeightSumTol)
        violations.push_back("weights sum to " + std::to_string(weight_sum));
    return violations;
}

// ln sum_k w_k N(x; mu_k, diag var_k), evaluated with log-sum-exp so far
// tails do not underflow.
inline double log_density(const MixtureModel& model, std::span<const double> x) {
    if (x.size() != model.dim()) {
        throw RejectedInput("point dimension " + std::to_string(x.size()) +
                            " != model dimension " + std::to_string(model.dim()));
    }
    double max_term = -std::numeric_limits<double>::infinity();
    thread_local std::vector<double> terms;
    terms.clear();
    for (const auto& c : model.components) {
        if (c.weight <= 0.0) continue;
        const double t = std::log(c.weight) + c.log_pdf(x);
        terms.push_back(t);
        max_term = std::max(max_term, t);
    }
    if (terms.empty() || !std::isfinite(max_term)) {
        return -std::numeric_limits<double>::infinity();
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

// Mean frame log-density over the rows of a frame matrix.
inline double mean_log_density(const MixtureModel& model, const FrameMatrix& frames) {
    if (frames.rows() == 0) throw InsufficientData("no frames to score");
    double acc = 0.0;
    for (std::size_t i = 0; i < frames.rows(); ++i) acc += log_density(model, frames.row(i));
    return acc / static_cast<double>(frames.rows());
}

struct MixtureMoments {
    std::vector<double> mean;           // E[x_j]
    std::vector<double> second_moment;  // E[x_j^2], per dimension
};

inline MixtureMoments mixture_moments(const MixtureModel& model) {
    const std::size_t d = model.dim();
    MixtureMoments m{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    for (const auto& c : model.components) {
        for (std::size_t j = 0; j < d; ++j) {
            m.mean[j] += c.weight * c.mean[j];
            m.second_moment[j] += c.weight * (c.var[j] + c.mean[j] * c.mean[j]);
        }
    }
    return m;
}

// n i.i.d. draws: component chosen by weight, then a diagonal Gaussian
// draw. Deterministic for a fixed seed.
inline FrameMatrix sample(const MixtureModel& model, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw RejectedInput("sample count must be >= 1");
    const std::size_t d = model.dim();
    FrameMatrix out(n, d);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double cum = 0.0;
        std::size_t pick = model.components.size() - 1;
        for (std::size_t k = 0; k < model.components.size(); ++k) {
            cum += model.components[k].weight;
            if (u < cum) {
                pick = k;
                break;
            }
        }
        const auto& c = model.components[pick];
        for (std::size_t j = 0; j < d; ++j) {
            out.at(i, j) = c.mean[j] + std::sqrt(c.var[j]) * rng.normal();
        }
    }
    return out;
}

// Rescale weights to sum to one.
inline MixtureModel normalized(MixtureModel model) {
    double sum = 0.0;
    for (const auto& c : model.components) sum += c.weight;
    if (sum > 0.0) {
        for (auto& c : model.components) c.weight /= sum;
    } else if (!model.components.empty()) {
        const double w = 1.0 / static_cast<double>(model.components.size());
        for (auto& c : model.components) c.weight = w;
    }
    return model;
}

}  // namespace kdrift
