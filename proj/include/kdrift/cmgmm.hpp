#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "kdrift/em.hpp"
#include "kdrift/mixture.hpp"

namespace kdrift {

struct AdaptConfig {
    double rho = 0.5;         // candidate mixing fraction
    double tau_merge = 0.1;   // merge components closer than this
    double tau_prune = 1e-4;  // prune scores below this fraction of the max
    bool pruning_enabled = true;
    EmConfig em;
};

inline void check_config(const AdaptConfig& cfg) {
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw RejectedInput("rho must be in (0, 1)");
    if (!(cfg.tau_merge > 0.0)) throw RejectedInput("tau_merge must be positive");
    if (!(cfg.tau_prune >= 0.0 && cfg.tau_prune < 1.0)) {
        throw RejectedInput("tau_prune must be in [0, 1)");
    }
}

// Union of the two models with current weights scaled by (1 - rho) and
// candidate weights by rho.
inline MixtureModel combine(const MixtureModel& current, const MixtureModel& candidate,
                            double rho) {
    if (current.dim() != candidate.dim()) {
        throw RejectedInput("cannot combine mixtures of dimension " +
                            std::to_string(current.dim()) + " and " +
                            std::to_string(candidate.dim()));
    }
    MixtureModel out;
    out.components.reserve(current.size() + candidate.size());
    for (auto c : current.components) {
        c.weight *= 1.0 - rho;
        out.components.push_back(std::move(c));
    }
    for (auto c : candidate.components) {
        c.weight *= rho;
        out.components.push_back(std::move(c));
    }
    return normalized(std::move(out));
}

// Moment-matching merge: the result carries the pair's combined weight
// and preserves its mixture mean and per-dimension second moment.
inline GaussianComponent merge_pair(const GaussianComponent& a, const GaussianComponent& b) {
    if (a.dim() != b.dim()) throw RejectedInput("cannot merge components of unequal dimension");
    const double w = a.weight + b.weight;
    if (w <= 0.0) throw DegenerateMerge("merged weight is zero");
    const std::size_t d = a.dim();
    std::vector<double> mean(d), var(d);
    for (std::size_t j = 0; j < d; ++j) {
        mean[j] = (a.weight * a.mean[j] + b.weight * b.mean[j]) / w;
        const double m2 = (a.weight * (a.var[j] + a.mean[j] * a.mean[j]) +
                           b.weight * (b.var[j] + b.mean[j] * b.mean[j])) /
                          w;
        var[j] = m2 - mean[j] * mean[j];
    }
    return make_component(w, std::move(mean), std::move(var));
}

// Symmetric Kullback-Leibler divergence between two diagonal Gaussians,
// in closed form. The variance floor keeps it finite.
inline double dissimilarity(const GaussianComponent& a, const GaussianComponent& b) {
    if (a.dim() != b.dim()) throw RejectedInput("dissimilarity needs equal dimensions");
    double kl_ab = 0.0, kl_ba = 0.0;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        const double dm = a.mean[j] - b.mean[j];
        kl_ab += a.var[j] / b.var[j] + dm * dm / b.var[j] - 1.0 + std::log(b.var[j] / a.var[j]);
        kl_ba += b.var[j] / a.var[j] + dm * dm / a.var[j] - 1.0 + std::log(a.var[j] / b.var[j]);
    }
    return 0.5 * (kl_ab + kl_ba);
}

// Greedily merge the globally closest component pair while its
// dissimilarity is below tau_merge, recomputing distances after each
// merge. Ties break toward the lowest (i, j) index pair.
inline MixtureModel merge_similar(const MixtureModel& model, double tau_merge) {
    MixtureModel out = model;
    bool merged = true;
    while (merged && out.size() > 1) {
        merged = false;
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i + 1 < out.size(); ++i) {
            for (std::size_t j = i + 1; j < out.size(); ++j) {
                const double dist = dissimilarity(out.components[i], out.components[j]);
                if (dist < best) {
                    best = dist;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best < tau_merge) {
            out.components[bi] = merge_pair(out.components[bi], out.components[bj]);
            out.components.erase(out.components.begin() + static_cast<std::ptrdiff_t>(bj));
            merged = true;
        }
    }
    return out;
}

// Per-component prune score: squared weight over squared mean variance.
// Low scores mark components that are either nearly weightless or spread
// so wide they only overlap others.
inline double prune_score(const GaussianComponent& c) {
    double mean_var = 0.0;
    for (double v : c.var) mean_var += v;
    mean_var /= static_cast<double>(c.dim());
    return (c.weight * c.weight) / (mean_var * mean_var);
}

// Remove every component scoring below tau_prune times the best score,
// keeping at least the top-scoring component, then renormalize weights.
inline MixtureModel prune(const MixtureModel& model, double tau_prune) {
    std::vector<double> scores(model.size());
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t k = 0; k < model.size(); ++k) {
        scores[k] = prune_score(model.components[k]);
        if (scores[k] > best) {
            best = scores[k];
            best_idx = k;
        }
    }
    MixtureModel out;
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (k == best_idx || scores[k] >= tau_prune * best) {
            out.components.push_back(model.components[k]);
        }
    }
    return normalized(std::move(out));
}

// Drift adaptation: fit a candidate mixture to the warning-zone frames,
// blend it into the current model, then collapse redundant components
// and optionally prune low-value ones.
inline MixtureModel adapt(const MixtureModel& current, const FrameMatrix& warning_frames,
                          const AdaptConfig& cfg) {
    check_config(cfg);
    const MixtureModel candidate = select_k_bic(warning_frames, cfg.em);
    MixtureModel out = merge_similar(combine(current, candidate, cfg.rho), cfg.tau_merge);
    if (cfg.pruning_enabled) out = prune(out, cfg.tau_prune);
    return out;
}

}  // namespace kdrift
