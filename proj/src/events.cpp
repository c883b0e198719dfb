#include "tct/events.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tct/errors.hpp"
#include "tct/philox.hpp"

namespace tct {

namespace {

void check_detection_channel(const TimeSeriesEnsemble& recording, const DetectionParams& params) {
    if (params.detection_channel >= recording.n_channels()) {
        throw ValidationError("detection channel " + std::to_string(params.detection_channel) +
                              " out of range (ensemble has " +
                              std::to_string(recording.n_channels()) + " channels)");
    }
    if (!(params.threshold_ratio > 0.0)) {
        throw ValidationError("threshold_ratio must be > 0");
    }
}

double population_std(std::span<const double> signal) {
    double mean = 0.0;
    for (double v : signal) mean += v;
    mean /= static_cast<double>(signal.size());
    double ss = 0.0;
    for (double v : signal) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(signal.size()));
}

/// Argmax over [c - W, c + W]; earliest index wins ties.
std::size_t local_peak(std::span<const double> signal, std::size_t center, std::size_t W) {
    std::size_t best = center - W;
    for (std::size_t t = center - W; t <= center + W; ++t) {
        if (signal[t] > signal[best]) best = t;
    }
    return best;
}

}  // namespace

std::vector<std::size_t> detect_events(const TimeSeriesEnsemble& recording,
                                       const DetectionParams& params) {
    check_detection_channel(recording, params);
    const auto signal = recording.series(0, params.detection_channel);
    const double sd = population_std(signal);
    if (sd == 0.0) {
        throw NumericError("detect_events: detection signal is constant (std = 0)");
    }
    const double threshold = params.threshold_ratio * sd;
    const std::size_t min_sep = std::max<std::size_t>(params.min_separation, 1);

    std::vector<std::size_t> crossings;
    bool have_last = false;
    std::size_t last = 0;
    for (std::size_t t = 1; t < signal.size(); ++t) {
        if (signal[t] >= threshold && signal[t - 1] < threshold) {
            if (!have_last || t - last >= min_sep) {
                crossings.push_back(t);
                last = t;
                have_last = true;
            }
        }
    }
    return crossings;
}

AlignResult align_events(const TimeSeriesEnsemble& recording,
                         std::span<const std::size_t> candidates,
                         const DetectionParams& params) {
    check_detection_channel(recording, params);
    if (candidates.empty()) {
        throw ValidationError("align_events: empty candidate list");
    }
    const auto signal = recording.series(0, params.detection_channel);
    const std::size_t W = params.peak_search_halfwidth;
    const std::size_t T = signal.size();

    // pooled_peak: merge runs of candidates with gaps < min_separation to
    // their rounded mean before peak alignment.
    std::vector<std::size_t> pooled;
    if (params.alignment_mode == AlignmentMode::pooled_peak) {
        const std::size_t min_sep = std::max<std::size_t>(params.min_separation, 1);
        std::size_t cluster_start = 0;
        for (std::size_t i = 1; i <= candidates.size(); ++i) {
            if (i == candidates.size() || candidates[i] - candidates[i - 1] >= min_sep) {
                double sum = 0.0;
                for (std::size_t j = cluster_start; j < i; ++j) {
                    sum += static_cast<double>(candidates[j]);
                }
                const double mean = sum / static_cast<double>(i - cluster_start);
                pooled.push_back(static_cast<std::size_t>(std::llround(mean)));
                cluster_start = i;
            }
        }
    } else {
        pooled.assign(candidates.begin(), candidates.end());
    }

    AlignResult result;
    std::vector<std::size_t> aligned;
    for (std::size_t c : pooled) {
        if (c < W || c + W >= T) {
            ++result.boundary_dropped;
            continue;
        }
        aligned.push_back(local_peak(signal, c, W));
    }
    std::sort(aligned.begin(), aligned.end());
    aligned.erase(std::unique(aligned.begin(), aligned.end()), aligned.end());

    if (aligned.empty()) {
        throw EmptyResultError("align_events: no candidates survived alignment (" +
                               std::to_string(result.boundary_dropped) +
                               " dropped at the boundary)");
    }

    if (params.max_events && aligned.size() > *params.max_events) {
        // Partial Fisher-Yates over a seeded substream; the first k slots
        // form a uniform subsample without replacement.
        const std::size_t k = *params.max_events;
        rng::Substream stream(params.subsample_seed, rng::Stream::subsample, 0);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + stream.next_below(aligned.size() - i);
            std::swap(aligned[i], aligned[j]);
        }
        aligned.resize(k);
        std::sort(aligned.begin(), aligned.end());
    }

    result.times = std::move(aligned);
    return result;
}

SnapshotResult extract_snapshots(const TimeSeriesEnsemble& recording,
                                 std::span<const std::size_t> event_times,
                                 const EpochParams& params) {
    if (params.window_length < 1) {
        throw ValidationError("extract_snapshots: window_length must be >= 1");
    }
    if (params.alignment_offset >= params.window_length) {
        throw ValidationError("extract_snapshots: alignment_offset must lie inside the window");
    }
    if (params.model_order < 1) {
        throw ValidationError("extract_snapshots: model_order must be >= 1");
    }
    const std::size_t p = params.model_order;
    const std::size_t L = params.window_length;
    const std::size_t T = recording.n_times();
    const std::size_t C = recording.n_channels();

    std::vector<std::size_t> usable;
    std::size_t dropped = 0;
    for (std::size_t e : event_times) {
        // Window covers [e - offset - p, e - offset + L).
        const bool enough_history = e >= params.alignment_offset + p;
        const bool enough_future = e - params.alignment_offset + L <= T;
        if (enough_history && enough_future) {
            usable.push_back(e);
        } else {
            ++dropped;
        }
    }
    if (usable.empty()) {
        throw EmptyResultError("extract_snapshots: no event has room for " +
                               std::to_string(p) + " lags plus a " + std::to_string(L) +
                               "-sample window (" + std::to_string(dropped) + " dropped)");
    }

    TimeSeriesEnsemble epochs(usable.size(), C, p + L, recording.sampling_rate(),
                              p + params.alignment_offset);
    for (std::size_t i = 0; i < usable.size(); ++i) {
        const std::size_t start = usable[i] - params.alignment_offset - p;
        for (std::size_t c = 0; c < C; ++c) {
            const auto src = recording.series(0, c);
            auto dst = epochs.series(i, c);
            for (std::size_t k = 0; k < p + L; ++k) {
                dst[k] = src[start + k];
            }
        }
    }
    return {std::move(epochs), dropped};
}

RejectionResult reject_artifacts(const TimeSeriesEnsemble& epochs, double artifact_threshold) {
    if (!(artifact_threshold > 0.0)) {
        throw ValidationError("reject_artifacts: threshold must be > 0");
    }
    const std::size_t R = epochs.n_trials();
    std::vector<bool> kept(R, true);
    std::size_t n_kept = 0;
    for (std::size_t r = 0; r < R; ++r) {
        bool ok = true;
        for (std::size_t c = 0; c < epochs.n_channels() && ok; ++c) {
            for (double v : epochs.series(r, c)) {
                if (std::abs(v) >= artifact_threshold) {
                    ok = false;
                    break;
                }
            }
        }
        kept[r] = ok;
        if (ok) ++n_kept;
    }
    if (n_kept == 0) {
        throw EmptyResultError("reject_artifacts: all " + std::to_string(R) +
                               " epochs exceeded the threshold");
    }

    TimeSeriesEnsemble filtered(n_kept, epochs.n_channels(), epochs.n_times(),
                                epochs.sampling_rate(), epochs.time_axis_offset());
    std::size_t out = 0;
    for (std::size_t r = 0; r < R; ++r) {
        if (!kept[r]) continue;
        for (std::size_t c = 0; c < epochs.n_channels(); ++c) {
            const auto src = epochs.series(r, c);
            auto dst = filtered.series(out, c);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        ++out;
    }
    return {std::move(filtered), kept, R - n_kept};
}

}  // namespace tct
