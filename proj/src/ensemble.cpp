#include "tct/ensemble.hpp"

#include <cmath>

#include "tct/errors.hpp"

namespace tct {

TimeSeriesEnsemble::TimeSeriesEnsemble(std::size_t n_trials, std::size_t n_channels,
                                       std::size_t n_times, double sampling_rate,
                                       std::size_t time_axis_offset)
    : n_trials_(n_trials),
      n_channels_(n_channels),
      n_times_(n_times),
      sampling_rate_(sampling_rate),
      time_axis_offset_(time_axis_offset),
      data_(n_trials * n_channels * n_times, 0.0) {
    if (n_trials == 0 || n_channels == 0 || n_times == 0) {
        throw ValidationError("TimeSeriesEnsemble: all dimensions must be positive (got " +
                              std::to_string(n_trials) + " x " + std::to_string(n_channels) +
                              " x " + std::to_string(n_times) + ")");
    }
    if (!(sampling_rate > 0.0)) {
        throw ValidationError("TimeSeriesEnsemble: sampling_rate must be > 0");
    }
    if (time_axis_offset >= n_times) {
        throw ValidationError("TimeSeriesEnsemble: time_axis_offset " +
                              std::to_string(time_axis_offset) + " outside window of length " +
                              std::to_string(n_times));
    }
}

void TimeSeriesEnsemble::set_time_axis_offset(std::size_t offset) {
    if (offset >= n_times_) {
        throw ValidationError("time_axis_offset " + std::to_string(offset) +
                              " outside window of length " + std::to_string(n_times_));
    }
    time_axis_offset_ = offset;
}

std::optional<ValidationIssue> validate_ensemble(const TimeSeriesEnsemble& ensemble) noexcept {
    if (ensemble.n_times() < 2) {
        return ValidationIssue{"ensemble needs at least 2 time samples, got " +
                               std::to_string(ensemble.n_times())};
    }
    if (ensemble.time_axis_offset() >= ensemble.n_times()) {
        return ValidationIssue{"time_axis_offset outside the window"};
    }
    for (std::size_t r = 0; r < ensemble.n_trials(); ++r) {
        for (std::size_t c = 0; c < ensemble.n_channels(); ++c) {
            const auto s = ensemble.series(r, c);
            for (std::size_t t = 0; t < s.size(); ++t) {
                if (!std::isfinite(s[t])) {
                    return ValidationIssue{
                        "non-finite sample at (trial " + std::to_string(r) + ", channel " +
                            std::to_string(c) + ", time " + std::to_string(t) + ")",
                        true, r, c, t};
                }
            }
        }
    }
    return std::nullopt;
}

void ensure_valid(const TimeSeriesEnsemble& ensemble) {
    if (auto issue = validate_ensemble(ensemble)) {
        throw ValidationError("invalid ensemble: " + issue->message);
    }
}

void fill_lag_values(const TimeSeriesEnsemble& ensemble, std::size_t trial,
                     std::size_t channel, std::size_t t,
                     Eigen::Ref<Eigen::VectorXd> out) {
    const auto s = ensemble.series(trial, channel);
    const auto p = static_cast<std::size_t>(out.size());
    for (std::size_t i = 0; i < p; ++i) {
        out[static_cast<Eigen::Index>(i)] = s[t - 1 - i];
    }
}

std::vector<LagVector> build_lag_embedding(const TimeSeriesEnsemble& ensemble,
                                           std::size_t channel, std::size_t t,
                                           std::size_t order) {
    if (order < 1) {
        throw ValidationError("lag embedding requires order >= 1");
    }
    if (channel >= ensemble.n_channels()) {
        throw ValidationError("channel " + std::to_string(channel) + " out of range");
    }
    if (t >= ensemble.n_times()) {
        throw ValidationError("time " + std::to_string(t) + " beyond series length " +
                              std::to_string(ensemble.n_times()));
    }
    if (t < order) {
        throw ValidationError("insufficient history for lag embedding at t = " +
                              std::to_string(t) + "; earliest valid t is " +
                              std::to_string(order));
    }
    std::vector<LagVector> result;
    result.reserve(ensemble.n_trials());
    for (std::size_t r = 0; r < ensemble.n_trials(); ++r) {
        LagVector lv;
        lv.values.resize(static_cast<Eigen::Index>(order));
        fill_lag_values(ensemble, r, channel, t, lv.values);
        lv.origin_time = t;
        lv.channel = channel;
        result.push_back(std::move(lv));
    }
    return result;
}

}  // namespace tct
