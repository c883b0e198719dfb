#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tct/causality.hpp"
#include "tct/ensemble.hpp"
#include "tct/events.hpp"
#include "tct/io.hpp"

namespace tct {

/// How the input tensor enters the pipeline. Continuous recordings
/// (R = 1) run detection and epoch extraction; ensemble inputs (R > 1)
/// are treated as already-aligned trials and skip both.
enum class InputMode { automatic, continuous, ensemble };

/// Which channel events are detected and aligned on. Aligning on the
/// putative cause keeps peri-event causal estimates unbiased; aligning on
/// the effect is supported so the two runs can be compared.
struct AlignOn {
    enum class Role { cause, effect };
    Role role = Role::cause;
    std::size_t cause_channel = 0;
    std::size_t effect_channel = 1;

    std::size_t detection_channel() const noexcept {
        return role == Role::cause ? cause_channel : effect_channel;
    }
};

struct PipelineConfig {
    std::filesystem::path input_path;
    InputFormat input_format = InputFormat::csv;
    double sampling_rate = 1.0;
    InputMode input_mode = InputMode::automatic;

    std::optional<DetectionParams> detection;  // required for continuous inputs
    std::optional<AlignOn> align_on;           // required alongside detection
    std::optional<EpochParams> epoch;          // window: continuous inputs only

    ModelConfig model;
    std::vector<Measure> measures;
    std::optional<std::pair<std::size_t, std::size_t>> rdcs_reference_window;
    RdcsForm rdcs_form = RdcsForm::gaussian_kl;

    std::optional<BootstrapOptions> bootstrap;

    std::filesystem::path output_dir;
    std::uint64_t seed = 0;

    nlohmann::json echo;  // parsed config, written back into the manifest
};

/// Parses and validates a pipeline config. Unknown keys are rejected with
/// their JSON path; missing required fields and semantic violations name
/// the offending field.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const nlohmann::json& j);

/// Stage counts, configuration echo and warnings of one pipeline run.
/// Counts are monotone: detected >= aligned >= extracted >= surviving.
/// wall_seconds is diagnostic only and is not written into the manifest
/// file so that identical runs produce identical output bytes.
struct RunManifest {
    std::string library_version;
    nlohmann::json config_echo;
    std::size_t events_detected = 0;
    std::size_t events_aligned = 0;
    std::size_t boundary_dropped = 0;
    std::size_t epochs_extracted = 0;
    std::size_t artifacts_rejected = 0;
    std::size_t epochs_surviving = 0;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;

    nlohmann::json to_json() const;
};

struct PipelineResult {
    RunManifest manifest;
    std::vector<std::filesystem::path> trace_files;
    std::filesystem::path manifest_file;
};

/// Runs load -> detect -> align -> extract -> reject -> fit -> measures
/// (-> bootstrap) and writes one CSV per (measure, direction) plus
/// manifest.json into output_dir. Errors are annotated with the failing
/// stage and any partially written outputs are removed. Output bytes are
/// fully determined by (config, input bytes, seed).
PipelineResult run_pipeline(const PipelineConfig& config);

/// CLI entry point (subcommands simulate, detect, analyze, pipeline,
/// validate-config). Returns the process exit code: 0 success, 1 on
/// usage/validation errors, 2 on runtime failures. Diagnostics go to
/// stderr; data only to files.
int run_cli(int argc, const char* const* argv);

}  // namespace tct
