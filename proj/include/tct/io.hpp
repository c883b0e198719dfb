#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tct/causality.hpp"
#include "tct/ensemble.hpp"

namespace tct {

enum class InputFormat { csv, tct };

/// CSV input: header row of channel names, one row per time sample,
/// columns are channels. Loaded as an R = 1 continuous recording.
struct CsvRecording {
    TimeSeriesEnsemble ensemble;
    std::vector<std::string> channel_names;
};

CsvRecording read_csv_timeseries(const std::filesystem::path& path, double sampling_rate = 1.0);

/// tct binary: magic "TCT1", three little-endian u64 dims (R, C, T), then
/// R*C*T little-endian float64 samples in trial-major, channel, time
/// order. Round-trips bit-exactly.
TimeSeriesEnsemble read_tct(const std::filesystem::path& path, double sampling_rate = 1.0);
void write_tct(const std::filesystem::path& path, const TimeSeriesEnsemble& ensemble);

TimeSeriesEnsemble read_timeseries(const std::filesystem::path& path, InputFormat format,
                                   double sampling_rate = 1.0);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Trace CSV with header time_index,time_seconds,value,boot_mean,boot_std.
/// time_seconds places 0 at the ensemble's alignment point. Bootstrap
/// columns are left empty when the trace carries no bands.
void write_trace_csv(const std::filesystem::path& path, const CausalityTrace& trace,
                     double sampling_rate, std::size_t time_axis_offset);

}  // namespace tct
