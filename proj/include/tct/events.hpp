#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tct/ensemble.hpp"

namespace tct {

enum class AlignmentMode {
    local_peak,   // move each candidate to the argmax in [c - W, c + W]
    pooled_peak,  // merge candidates closer than min_separation, then peak-align
};

/// Event detection and alignment parameters. The threshold is relative to
/// the detection signal's standard deviation, so detection is invariant to
/// signal scale. Filtering or envelope extraction, when needed, is applied
/// upstream; the detection channel is taken as-is.
struct DetectionParams {
    std::size_t detection_channel = 0;
    double threshold_ratio = 2.0;          // multiples of the signal std
    std::size_t min_separation = 1;        // refractory gap in samples
    AlignmentMode alignment_mode = AlignmentMode::local_peak;
    std::size_t peak_search_halfwidth = 0; // W
    std::optional<std::size_t> max_events; // uniform random subsample cap
    std::uint64_t subsample_seed = 0;      // seeds the max_events subsample
};

/// Peri-event snapshot extraction parameters.
struct EpochParams {
    std::size_t window_length = 1;     // L, samples after the window start
    std::size_t alignment_offset = 0;  // samples from window start to alignment point
    std::size_t model_order = 1;       // p lags prepended to each epoch
    std::optional<double> artifact_threshold;  // absolute amplitude
};

/// Upward crossings of threshold_ratio * std(detection signal), with
/// crossings closer than min_separation to the last retained one dropped.
/// Detection runs on trial 0 (continuous recordings are R = 1 ensembles).
/// Throws NumericError when the detection signal has zero variance.
std::vector<std::size_t> detect_events(const TimeSeriesEnsemble& recording,
                                       const DetectionParams& params);

struct AlignResult {
    std::vector<std::size_t> times;   // ascending, deduplicated
    std::size_t boundary_dropped = 0; // candidates too close to the edges
};

/// Aligns candidates to local peaks of the detection signal (ties break to
/// the earliest index). pooled_peak mode first merges candidate clusters
/// closer than min_separation to their rounded mean. When max_events is
/// set, a seeded uniform subsample without replacement is returned.
AlignResult align_events(const TimeSeriesEnsemble& recording,
                         std::span<const std::size_t> candidates,
                         const DetectionParams& params);

struct SnapshotResult {
    TimeSeriesEnsemble epochs;
    std::size_t boundary_dropped = 0;  // events without room for lags/window
};

/// Extracts one epoch per event covering absolute times
/// [e - alignment_offset - p, e - alignment_offset + L); epochs carry
/// time_axis_offset = p + alignment_offset. Events whose window leaves the
/// recording are dropped and counted, never padded.
SnapshotResult extract_snapshots(const TimeSeriesEnsemble& recording,
                                 std::span<const std::size_t> event_times,
                                 const EpochParams& params);

struct RejectionResult {
    TimeSeriesEnsemble epochs;
    std::vector<bool> kept;        // per input epoch
    std::size_t n_rejected = 0;
};

/// Removes epochs whose amplitude reaches the threshold anywhere
/// (|sample| >= threshold on any channel); survivors are untouched and
/// keep their order.
RejectionResult reject_artifacts(const TimeSeriesEnsemble& epochs, double artifact_threshold);

}  // namespace tct
