#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tct {

/// Trials x channels x time tensor of real samples; the universal data
/// carrier. Storage is trial-major, then channel, then time, so the lag
/// window of one trial/channel is a contiguous slice.
///
/// For peri-event ensembles, time_axis_offset marks the alignment point
/// within the window; it is 0 for raw recordings.
class TimeSeriesEnsemble {
public:
    TimeSeriesEnsemble(std::size_t n_trials, std::size_t n_channels,
                       std::size_t n_times, double sampling_rate = 1.0,
                       std::size_t time_axis_offset = 0);

    std::size_t n_trials() const noexcept { return n_trials_; }
    std::size_t n_channels() const noexcept { return n_channels_; }
    std::size_t n_times() const noexcept { return n_times_; }
    double sampling_rate() const noexcept { return sampling_rate_; }
    std::size_t time_axis_offset() const noexcept { return time_axis_offset_; }

    void set_time_axis_offset(std::size_t offset);

    double& at(std::size_t trial, std::size_t channel, std::size_t time) {
        return data_[index(trial, channel, time)];
    }
    double at(std::size_t trial, std::size_t channel, std::size_t time) const {
        return data_[index(trial, channel, time)];
    }

    /// Contiguous time slice of one trial/channel.
    std::span<const double> series(std::size_t trial, std::size_t channel) const {
        return {data_.data() + index(trial, channel, 0), n_times_};
    }
    std::span<double> series(std::size_t trial, std::size_t channel) {
        return {data_.data() + index(trial, channel, 0), n_times_};
    }

    /// Flat trial-major buffer (for serialization).
    std::span<const double> raw() const noexcept { return data_; }
    std::span<double> raw() noexcept { return data_; }

private:
    std::size_t index(std::size_t trial, std::size_t channel, std::size_t time) const noexcept {
        return (trial * n_channels_ + channel) * n_times_ + time;
    }

    std::size_t n_trials_;
    std::size_t n_channels_;
    std::size_t n_times_;
    double sampling_rate_;
    std::size_t time_axis_offset_;
    std::vector<double> data_;
};

/// First problem found when validating an ensemble.
struct ValidationIssue {
    std::string message;
    // Location of the offending sample, when the issue is sample-level.
    bool has_location = false;
    std::size_t trial = 0;
    std::size_t channel = 0;
    std::size_t time = 0;
};

/// Checks the ensemble invariants: R >= 1, C >= 1, T >= 2, all samples
/// finite, and 0 <= time_axis_offset < T. Returns the first violation,
/// or nullopt when the ensemble is valid.
std::optional<ValidationIssue> validate_ensemble(const TimeSeriesEnsemble& ensemble) noexcept;

/// Throwing form of validate_ensemble.
void ensure_valid(const TimeSeriesEnsemble& ensemble);

/// Lag vector [X_{t-1}, X_{t-2}, ..., X_{t-p}] of one channel, newest
/// lag first. This ordering is the binding convention for every
/// coefficient vector in the library.
struct LagVector {
    Eigen::VectorXd values;
    std::size_t origin_time = 0;
    std::size_t channel = 0;
};

/// Per-trial lag vectors of `channel` at time t with order p.
/// Requires t >= p (throws ValidationError naming the earliest valid t).
std::vector<LagVector> build_lag_embedding(const TimeSeriesEnsemble& ensemble,
                                           std::size_t channel, std::size_t t,
                                           std::size_t order);

/// Fills one trial's lag vector into `out` (size p) without allocation.
void fill_lag_values(const TimeSeriesEnsemble& ensemble, std::size_t trial,
                     std::size_t channel, std::size_t t,
                     Eigen::Ref<Eigen::VectorXd> out);

/// Model-fitting configuration shared by the estimation stage.
struct ModelConfig {
    std::size_t order = 1;        // p
    bool include_intercept = true;
    double ridge_epsilon = 0.0;   // added to normal-equation diagonals
};

}  // namespace tct
