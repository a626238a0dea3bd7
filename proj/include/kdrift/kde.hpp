#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "kdrift/errors.hpp"

namespace kdrift {

inline constexpr double kBandwidthFloor = 1e-6;

// Grid resolution used by the window divergence.
inline constexpr std::size_t kDivergenceGridSize = 256;

// Bandwidth inflation applied inside tv_divergence. Comparing two short
// windows at the plain Silverman bandwidth leaves the divergence with a
// stationary sampling-noise floor around 0.14 for 45-point windows, which
// would swamp drift margins in the 0.001..0.1 range. Widening both kernels
// by this shared factor pulls the no-drift noise floor below 0.03 while
// disjoint windows still score ~1.
inline constexpr double kDivergenceSmoothing = 8.0;

// One-dimensional density estimate tabulated on a uniform grid.
struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> values;
    double step = 0.0;

    double mass() const {
        double m = 0.0;
        for (double v : values) m += v;
        return m * step;
    }
};

namespace detail {

inline double sample_stddev(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

// Linear-interpolation quantile on a sorted copy.
inline double quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace detail

// Silverman's rule of thumb: h = 0.9 min(sd, IQR/1.34) n^(-1/5), floored.
inline double bandwidth(std::span<const double> samples) {
    if (samples.size() < 2) throw InsufficientData("bandwidth needs >= 2 samples");
    const double sd = detail::sample_stddev(samples);
    const std::vector<double> xs(samples.begin(), samples.end());
    const double iqr = detail::quantile(xs, 0.75) - detail::quantile(xs, 0.25);
    double scale = std::min(sd, iqr / 1.34);
    if (scale <= 0.0) scale = std::max(sd, 0.0);
    const double h = 0.9 * scale * std::pow(static_cast<double>(samples.size()), -0.2);
    return std::max(h, kBandwidthFloor);
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
    std::vector<double> g(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = lo + step * static_cast<double>(i);
    return g;
}

// Gaussian-kernel density estimate on the given uniform ascending grid.
inline DensityCurve kde_eval(std::span<const double> samples, double h,
                             std::vector<double> grid) {
    if (samples.empty()) throw InsufficientData("kde_eval needs at least one sample");
    if (!(h > 0.0)) throw RejectedInput("bandwidth must be positive");
    if (grid.size() < 2) throw RejectedInput("grid needs at least two points");
    const double step = grid[1] - grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double s = grid[i] - grid[i - 1];
        if (!(s > 0.0) || std::abs(s - step) > 1e-9 * std::max(1.0, std::abs(step))) {
            throw RejectedInput("grid must be uniform and ascending");
        }
    }

    DensityCurve curve;
    curve.step = step;
    curve.values.assign(grid.size(), 0.0);
    const double norm =
        1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (double x : samples) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double u = (grid[i] - x) / h;
            if (u < -8.0 || u > 8.0) continue;  // < 1e-14 of kernel peak
            curve.values[i] += std::exp(-0.5 * u * u);
        }
    }
    for (double& v : curve.values) v *= norm;
    curve.grid = std::move(grid);
    return curve;
}

// Bounded divergence between two sample windows: half the L1 distance
// between their kernel density estimates on a shared grid spanning the
// pooled sample range. Symmetric, zero on identical windows, clamped to
// [0, 1]. Both windows use one shared (inflated) bandwidth; per-window
// bandwidths would add scale-mismatch noise between same-distribution
// windows. The shared value takes the narrower window's bandwidth: a
// window whose spread explodes is usually the drifted one, and letting it
// widen the kernels would smooth away exactly the difference being
// measured.
inline double tv_divergence(std::span<const double> window_a, std::span<const double> window_b,
                            double smoothing = kDivergenceSmoothing) {
    if (window_a.size() < 2 || window_b.size() < 2) {
        throw InsufficientData("tv_divergence needs >= 2 samples per window");
    }
    const double h = smoothing * std::min(bandwidth(window_a), bandwidth(window_b));
    const auto [min_a, max_a] = std::minmax_element(window_a.begin(), window_a.end());
    const auto [min_b, max_b] = std::minmax_element(window_b.begin(), window_b.end());
    const double lo = std::min(*min_a, *min_b) - 3.0 * h;
    const double hi = std::max(*max_a, *max_b) + 3.0 * h;

    const std::vector<double> grid = uniform_grid(lo, hi, kDivergenceGridSize);
    const DensityCurve fa = kde_eval(window_a, h, grid);
    const DensityCurve fb = kde_eval(window_b, h, grid);

    double l1 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) l1 += std::abs(fa.values[i] - fb.values[i]);
    return std::clamp(0.5 * l1 * fa.step, 0.0, 1.0);
}

}  // namespace kdrift
