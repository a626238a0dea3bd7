#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "kdrift/matrix.hpp"
#include "kdrift/mixture.hpp"
#include "kdrift/rng.hpp"

namespace kdrift {

struct EmConfig {
    int max_iter = 200;
    double tol = 1e-6;  // relative log-likelihood change
    int k_max = 8;
    int restarts = 3;
    std::uint64_t seed = 0;
};

namespace detail {

// Frames sorted lexicographically by row. Fitting on the sorted copy makes
// the result a function of the frame multiset, so permuting the input
// cannot change the fitted model or the selected k.
inline FrameMatrix sorted_frames(const FrameMatrix& frames) {
    std::vector<std::size_t> order(frames.rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ra = frames.row(a), rb = frames.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    FrameMatrix out(frames.rows(), frames.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto r = frames.row(order[i]);
        std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    return out;
}

inline std::vector<double> column_variance(const FrameMatrix& frames) {
    const std::size_t n = frames.rows(), d = frames.cols();
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += frames.at(i, j);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = frames.at(i, j) - mean[j];
            var[j] += diff * diff;
        }
    for (double& v : var) v = std::max(v / static_cast<double>(n), kVarianceFloor);
    return var;
}

// Farthest-point seeding: first center drawn by the rng, every later
// center is the frame farthest from all chosen centers, ties broken by
// lowest frame index.
inline std::vector<std::size_t> seed_centers(const FrameMatrix& frames, int k, Rng& rng) {
    const std::size_t n = frames.rows(), d = frames.cols();
    std::vector<std::size_t> centers;
    centers.push_back(rng.index(n));
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    while (centers.size() < static_cast<std::size_t>(k)) {
        const auto c = frames.row(centers.back());
        for (std::size_t i = 0; i < n; ++i) {
            double q = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = frames.at(i, j) - c[j];
                q += diff * diff;
            }
            dist2[i] = std::min(dist2[i], q);
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (dist2[i] > dist2[best]) best = i;
        centers.push_back(best);
    }
    return centers;
}

struct EmRun {
    MixtureModel model;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    std::vector<double> ll_trace;
};

inline EmRun run_em(const FrameMatrix& frames, int k, const EmConfig& cfg, Rng& rng) {
    const std::size_t n = frames.rows(), d = frames.cols();
    const std::vector<double> global_var = column_variance(frames);
    // data-driven variance floor: keeps small-sample fits from collapsing
    // onto near-duplicate frames and producing degenerate spikes
    std::vector<double> var_floor(d);
    for (std::size_t j = 0; j < d; ++j) {
        var_floor[j] = std::max(kVarianceFloor, 0.01 * global_var[j]);
    }

    MixtureModel model;
    for (std::size_t c : seed_centers(frames, k, rng)) {
        const auto r = frames.row(c);
        model.components.push_back(make_component(
            1.0 / k, std::vector<double>(r.begin(), r.end()), global_var));
    }

    EmRun run;
    std::vector<double> resp(n * static_cast<std::size_t>(k));
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        // E-step in log space.
        double ll = 0.0;
        std::vector<double> terms(k);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = frames.row(i);
            double max_t = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const auto& comp = model.components[c];
                terms[c] = (comp.weight > 0.0 ? std::log(comp.weight) : -1e300) +
                           comp.log_pdf(x);
                max_t = std::max(max_t, terms[c]);
            }
            double sum = 0.0;
            for (int c = 0; c < k; ++c) sum += std::exp(terms[c] - max_t);
            const double lse = max_t + std::log(sum);
            ll += lse;
            for (int c = 0; c < k; ++c) resp[i * k + c] = std::exp(terms[c] - lse);
        }
        run.ll_trace.push_back(ll);

        // M-step.
        bool reseeded = false;
        for (int c = 0; c < k; ++c) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp[i * k + c];
            auto& comp = model.components[c];
            if (nk < 1e-10 * static_cast<double>(n)) {
                // Starved component: re-seed it at the worst-explained frame.
                std::size_t worst = 0;
                double worst_ld = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < n; ++i) {
                    const double ld = log_density(model, frames.row(i));
                    if (ld < worst_ld) {
                        worst_ld = ld;
                        worst = i;
                    }
                }
                const auto r = frames.row(worst);
                comp.mean.assign(r.begin(), r.end());
                comp.var = global_var;
                comp.weight = 1.0 / static_cast<double>(n);
                reseeded = true;
                continue;
            }
            comp.weight = nk / static_cast<double>(n);
            for (std::size_t j = 0; j < d; ++j) {
                double m1 = 0.0, m2 = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = resp[i * k + c];
                    const double x = frames.at(i, j);
                    m1 += r * x;
                    m2 += r * x * x;
                }
                m1 /= nk;
                m2 /= nk;
                comp.mean[j] = m1;
                comp.var[j] = std::max(m2 - m1 * m1, var_floor[j]);
            }
        }
        if (reseeded) {
            double sum = 0.0;
            for (const auto& c : model.components) sum += c.weight;
            for (auto& c : model.components) c.weight /= sum;
        }

        if (iter > 0) {
            const double rel = std::abs(ll - prev_ll) / (std::abs(ll) + 1e-12);
            if (rel < cfg.tol) {
                prev_ll = ll;
                break;
            }
        }
        prev_ll = ll;
    }

    run.model = std::move(model);
    run.log_likelihood = prev_ll;
    return run;
}

}  // namespace detail

// Fit a k-component diagonal-covariance mixture by EM. Runs cfg.restarts
// independently seeded fits and keeps the one with the highest final
// log-likelihood. Optional ll_traces receives the per-iteration
// log-likelihood of every restart.
inline MixtureModel fit_em(const FrameMatrix& frames, int k, const EmConfig& cfg,
                           std::vector<std::vector<double>>* ll_traces = nullptr) {
    if (k < 1) throw RejectedInput("component count must be >= 1");
    if (frames.rows() < static_cast<std::size_t>(k)) {
        throw InsufficientData("need at least " + std::to_string(k) + " frames, got " +
                               std::to_string(frames.rows()));
    }
    const FrameMatrix sorted = detail::sorted_frames(frames);
    detail::EmRun best;
    const int restarts = std::max(1, cfg.restarts);
    for (int r = 0; r < restarts; ++r) {
        Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        detail::EmRun run = detail::run_em(sorted, k, cfg, rng);
        if (ll_traces) ll_traces->push_back(run.ll_trace);
        if (run.log_likelihood > best.log_likelihood) best = std::move(run);
    }
    return best.model;
}

// Bayesian information criterion for a fitted model on the given frames;
// lower is better. Free parameters of a k-component diagonal model in d
// dimensions: k means and variances (2d each) plus k-1 weights.
inline double bic(const MixtureModel& model, const FrameMatrix& frames) {
    if (frames.rows() < 1) throw InsufficientData("bic needs at least one frame");
    const double k = static_cast<double>(model.size());
    const double d = static_cast<double>(model.dim());
    const double p = k * 2.0 * d + (k - 1.0);
    double ll = 0.0;
    for (std::size_t i = 0; i < frames.rows(); ++i) ll += log_density(model, frames.row(i));
    return p * std::log(static_cast<double>(frames.rows())) - 2.0 * ll;
}

// Fit k = 1..min(k_max, n) and return the minimum-BIC model, ties broken
// toward smaller k.
inline MixtureModel select_k_bic(const FrameMatrix& frames, const EmConfig& cfg) {
    if (frames.rows() < 2) throw InsufficientData("model selection needs >= 2 frames");
    const int k_hi = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(std::max(1, cfg.k_max)), frames.rows()));
    MixtureModel best;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= k_hi; ++k) {
        MixtureModel m = fit_em(frames, k, cfg);
        const double b = bic(m, frames);
        if (b < best_bic) {
            best_bic = b;
            best = std::move(m);
        }
    }
    return best;
}

}  // namespace kdrift
