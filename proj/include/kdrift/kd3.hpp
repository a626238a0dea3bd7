#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <vector>

#include "kdrift/errors.hpp"
#include "kdrift/kde.hpp"
#include "kdrift/matrix.hpp"

namespace kdrift {

struct Kd3Config {
    double alpha = 0.1;    // drift margin on the window divergence
    double beta = 0.001;   // warning margin
    int window = 45;       // window length in monitored points
    std::size_t buffer_cap = 500;        // max buffered payload frames
    std::size_t min_adapt_frames = 30;   // below this a drift is a false alarm
};

inline void check_config(const Kd3Config& cfg) {
    if (!(cfg.beta > 0.0 && cfg.beta < cfg.alpha && cfg.alpha <= 1.0)) {
        throw RejectedInput("detector margins must satisfy 0 < beta < alpha <= 1");
    }
    if (cfg.window < 2) throw RejectedInput("window length must be >= 2");
}

enum class SignalKind { Stable, Warning, Drift };

struct Signal {
    SignalKind kind = SignalKind::Stable;
    double divergence = 0.0;
};

// Windowed drift detector over one monitored scalar. The first `window`
// values after a reset form a fixed reference; later values slide through
// the current window. Once both windows are full, each update compares
// their densities: divergence above alpha signals Drift, between beta and
// alpha signals Warning (buffering the payload frames for adaptation),
// and at or below beta signals Stable and discards the warning buffer.
//
// Payloads arriving while the current window is still filling are buffered
// tentatively: they are the data the first divergence verdict will judge.
// A Stable verdict discards them; a Drift verdict hands them to the
// adaptation step, so an abrupt change that clears alpha on the very first
// comparison still carries its evidence.
class Kd3Detector {
public:
    Kd3Detector() { check_config(cfg_); }
    explicit Kd3Detector(Kd3Config cfg) : cfg_(cfg) { check_config(cfg_); }

    Signal update(double value, const FrameMatrix& payload) {
        if (!std::isfinite(value)) throw RejectedInput("monitored value must be finite");
        ++steps_;
        if (reference_.size() < static_cast<std::size_t>(cfg_.window)) {
            reference_.push_back(value);
            return {SignalKind::Stable, 0.0};
        }
        current_.push_back(value);
        if (current_.size() > static_cast<std::size_t>(cfg_.window)) current_.pop_front();
        if (steps_ < 2 * static_cast<std::size_t>(cfg_.window)) {
            buffer_frames(payload);
            return {SignalKind::Stable, 0.0};
        }

        const std::vector<double> cur(current_.begin(), current_.end());
        const double d = tv_divergence(reference_, cur);
        last_divergence_ = d;
        if (d > cfg_.alpha) return {SignalKind::Drift, d};
        if (d > cfg_.beta) {
            buffer_frames(payload);
            return {SignalKind::Warning, d};
        }
        warning_rows_.clear();
        return {SignalKind::Stable, d};
    }

    // Concatenated buffered frames, oldest first; empties the buffer.
    FrameMatrix take_warning_data() {
        FrameMatrix out;
        for (const auto& row : warning_rows_) out.append_row(row);
        warning_rows_.clear();
        return out;
    }

    void reset() {
        reference_.clear();
        current_.clear();
        warning_rows_.clear();
        steps_ = 0;
        last_divergence_ = 0.0;
    }

    const Kd3Config& config() const { return cfg_; }
    const std::vector<double>& reference() const { return reference_; }
    std::vector<double> current() const { return {current_.begin(), current_.end()}; }
    std::size_t steps_since_reset() const { return steps_; }
    double last_divergence() const { return last_divergence_; }
    std::size_t warning_frame_count() const { return warning_rows_.size(); }
    const std::deque<std::vector<double>>& warning_rows() const { return warning_rows_; }

    // Rebuild a detector from checkpointed state.
    static Kd3Detector restore(const Kd3Config& cfg, std::vector<double> reference,
                               const std::vector<double>& current,
                               std::deque<std::vector<double>> warning_rows,
                               std::size_t steps, double last_divergence) {
        Kd3Detector det(cfg);
        det.reference_ = std::move(reference);
        det.current_.assign(current.begin(), current.end());
        det.warning_rows_ = std::move(warning_rows);
        det.steps_ = steps;
        det.last_divergence_ = last_divergence;
        return det;
    }

private:
    void buffer_frames(const FrameMatrix& payload) {
        for (std::size_t i = 0; i < payload.rows(); ++i) {
            const auto r = payload.row(i);
            warning_rows_.emplace_back(r.begin(), r.end());
            if (warning_rows_.size() > cfg_.buffer_cap) warning_rows_.pop_front();
        }
    }

    Kd3Config cfg_;
    std::vector<double> reference_;
    std::deque<double> current_;
    std::deque<std::vector<double>> warning_rows_;
    std::size_t steps_ = 0;
    double last_divergence_ = 0.0;
};

}  // namespace kdrift
