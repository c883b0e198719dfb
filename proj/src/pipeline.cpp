#include "tct/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include "tct/errors.hpp"
#include "tct/version.hpp"

namespace tct {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key)) {
            throw ValidationError(where + ": unknown key '" + key + "'");
        }
    }
}

const json& require_key(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        throw ValidationError(where + ": missing required field '" + key + "'");
    }
    return obj.at(key);
}

double get_number(const json& v, const std::string& where) {
    if (!v.is_number()) {
        throw ValidationError(where + ": expected a number");
    }
    return v.get<double>();
}

std::size_t get_index(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) {
        return v.get<std::size_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::size_t>(v.get<std::int64_t>());
    }
    throw ValidationError(where + ": expected a non-negative integer");
}

std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string()) {
        throw ValidationError(where + ": expected a string");
    }
    return v.get<std::string>();
}

InputFormat parse_format(const std::string& tag, const std::string& where) {
    if (tag == "csv") return InputFormat::csv;
    if (tag == "tct" || tag == "tct-binary") return InputFormat::tct;
    throw ValidationError(where + ": unknown format '" + tag + "' (expected csv or tct)");
}

DetectionParams parse_detection(const json& j) {
    reject_unknown_keys(j,
                        {"threshold_ratio", "min_separation", "alignment_mode",
                         "peak_search_halfwidth", "max_events"},
                        "config.detection");
    DetectionParams params;
    params.threshold_ratio =
        get_number(require_key(j, "threshold_ratio", "config.detection"),
                   "config.detection.threshold_ratio");
    if (!(params.threshold_ratio > 0.0)) {
        throw ValidationError("config.detection.threshold_ratio: must be > 0");
    }
    if (j.contains("min_separation")) {
        params.min_separation = get_index(j.at("min_separation"),
                                          "config.detection.min_separation");
        if (params.min_separation < 1) {
            throw ValidationError("config.detection.min_separation: must be >= 1");
        }
    }
    if (j.contains("alignment_mode")) {
        const std::string mode = get_string(j.at("alignment_mode"),
                                            "config.detection.alignment_mode");
        if (mode == "local_peak") {
            params.alignment_mode = AlignmentMode::local_peak;
        } else if (mode == "pooled_peak") {
            params.alignment_mode = AlignmentMode::pooled_peak;
        } else {
            throw ValidationError("config.detection.alignment_mode: unknown mode '" + mode + "'");
        }
    }
    if (j.contains("peak_search_halfwidth")) {
        params.peak_search_halfwidth =
            get_index(j.at("peak_search_halfwidth"), "config.detection.peak_search_halfwidth");
    }
    if (j.contains("max_events")) {
        params.max_events = get_index(j.at("max_events"), "config.detection.max_events");
        if (*params.max_events < 1) {
            throw ValidationError("config.detection.max_events: must be >= 1");
        }
    }
    return params;
}

AlignOn parse_align_on(const json& j) {
    reject_unknown_keys(j, {"on", "cause_channel", "effect_channel"}, "config.align_on");
    AlignOn align;
    const std::string role = get_string(require_key(j, "on", "config.align_on"),
                                        "config.align_on.on");
    if (role == "cause") {
        align.role = AlignOn::Role::cause;
    } else if (role == "effect") {
        align.role = AlignOn::Role::effect;
    } else {
        throw ValidationError("config.align_on.on: expected 'cause' or 'effect'");
    }
    align.cause_channel = get_index(require_key(j, "cause_channel", "config.align_on"),
                                    "config.align_on.cause_channel");
    align.effect_channel = get_index(require_key(j, "effect_channel", "config.align_on"),
                                     "config.align_on.effect_channel");
    if (align.cause_channel == align.effect_channel) {
        throw ValidationError("config.align_on: cause_channel and effect_channel must differ");
    }
    return align;
}

EpochParams parse_epoch(const json& j, std::size_t model_order) {
    reject_unknown_keys(j, {"window_length", "alignment_offset", "artifact_threshold"},
                        "config.epoch");
    EpochParams params;
    params.model_order = model_order;
    params.window_length = 0;  // sentinel: not configured (ensemble-mode runs)
    if (j.contains("window_length")) {
        params.window_length = get_index(j.at("window_length"), "config.epoch.window_length");
        if (params.window_length < 1) {
            throw ValidationError("config.epoch.window_length: must be >= 1");
        }
    }
    if (j.contains("alignment_offset")) {
        params.alignment_offset =
            get_index(j.at("alignment_offset"), "config.epoch.alignment_offset");
    }
    if (j.contains("artifact_threshold")) {
        const double thr = get_number(j.at("artifact_threshold"),
                                      "config.epoch.artifact_threshold");
        if (!(thr > 0.0)) {
            throw ValidationError("config.epoch.artifact_threshold: must be > 0");
        }
        params.artifact_threshold = thr;
    }
    return params;
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("config file '" + path.string() + "' cannot be opened");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path.string() + "': " + e.what());
    }
    return parse_config(j);
}

PipelineConfig parse_config(const json& j) {
    if (!j.is_object()) {
        throw ValidationError("config: expected a JSON object");
    }
    reject_unknown_keys(j,
                        {"schema_version", "input", "detection", "align_on", "epoch", "model",
                         "measures", "rdcs_reference_window", "rdcs_form", "bootstrap",
                         "output_dir", "seed"},
                        "config");
    if (j.contains("schema_version") &&
        get_index(j.at("schema_version"), "config.schema_version") != 1) {
        throw ValidationError("config.schema_version: this build reads schema version 1");
    }

    PipelineConfig config;
    config.echo = j;

    const json& input = require_key(j, "input", "config");
    reject_unknown_keys(input, {"path", "format", "sampling_rate", "mode"}, "config.input");
    config.input_path = get_string(require_key(input, "path", "config.input"),
                                   "config.input.path");
    if (input.contains("format")) {
        config.input_format =
            parse_format(get_string(input.at("format"), "config.input.format"),
                         "config.input.format");
    } else {
        const std::string ext = config.input_path.extension().string();
        if (ext == ".csv") {
            config.input_format = InputFormat::csv;
        } else if (ext == ".tct") {
            config.input_format = InputFormat::tct;
        } else {
            throw ValidationError("config.input.format: cannot infer format from '" + ext +
                                  "'; set it explicitly");
        }
    }
    if (input.contains("sampling_rate")) {
        config.sampling_rate = get_number(input.at("sampling_rate"),
                                          "config.input.sampling_rate");
        if (!(config.sampling_rate > 0.0)) {
            throw ValidationError("config.input.sampling_rate: must be > 0");
        }
    }
    if (input.contains("mode")) {
        const std::string mode = get_string(input.at("mode"), "config.input.mode");
        if (mode == "auto") {
            config.input_mode = InputMode::automatic;
        } else if (mode == "continuous") {
            config.input_mode = InputMode::continuous;
        } else if (mode == "ensemble") {
            config.input_mode = InputMode::ensemble;
        } else {
            throw ValidationError("config.input.mode: expected auto, continuous or ensemble");
        }
    }

    const json& model = require_key(j, "model", "config");
    reject_unknown_keys(model, {"order", "include_intercept", "ridge_epsilon"}, "config.model");
    config.model.order = get_index(require_key(model, "order", "config.model"),
                                   "config.model.order");
    if (config.model.order < 1) {
        throw ValidationError("config.model.order: must be >= 1");
    }
    if (model.contains("include_intercept")) {
        if (!model.at("include_intercept").is_boolean()) {
            throw ValidationError("config.model.include_intercept: expected a boolean");
        }
        config.model.include_intercept = model.at("include_intercept").get<bool>();
    }
    if (model.contains("ridge_epsilon")) {
        config.model.ridge_epsilon = get_number(model.at("ridge_epsilon"),
                                                "config.model.ridge_epsilon");
        if (config.model.ridge_epsilon < 0.0) {
            throw ValidationError("config.model.ridge_epsilon: must be >= 0");
        }
    }

    const json& measures = require_key(j, "measures", "config");
    if (!measures.is_array() || measures.empty()) {
        throw ValidationError("config.measures: expected a non-empty array");
    }
    for (const auto& m : measures) {
        const std::string label = get_string(m, "config.measures");
        const auto measure = measure_from_label(label);
        if (!measure) {
            throw ValidationError("config.measures: unknown measure '" + label + "'");
        }
        if (std::find(config.measures.begin(), config.measures.end(), *measure) !=
            config.measures.end()) {
            throw ValidationError("config.measures: duplicate measure '" + label + "'");
        }
        config.measures.push_back(*measure);
    }

    if (j.contains("rdcs_reference_window")) {
        const json& win = j.at("rdcs_reference_window");
        if (!win.is_array() || win.size() != 2) {
            throw ValidationError("config.rdcs_reference_window: expected [start, end)");
        }
        const std::size_t start = get_index(win[0], "config.rdcs_reference_window[0]");
        const std::size_t end = get_index(win[1], "config.rdcs_reference_window[1]");
        if (start >= end) {
            throw ValidationError("config.rdcs_reference_window: start must be < end");
        }
        config.rdcs_reference_window = {start, end};
    }
    const bool wants_rdcs = std::find(config.measures.begin(), config.measures.end(),
                                      Measure::rdcs) != config.measures.end();
    if (wants_rdcs && !config.rdcs_reference_window) {
        throw ValidationError(
            "config.rdcs_reference_window: required when measures include rdcs");
    }

    if (j.contains("rdcs_form")) {
        const std::string form = get_string(j.at("rdcs_form"), "config.rdcs_form");
        if (form == "gaussian_kl") {
            config.rdcs_form = RdcsForm::gaussian_kl;
        } else if (form == "literal_ratio") {
            config.rdcs_form = RdcsForm::literal_ratio;
        } else {
            throw ValidationError("config.rdcs_form: expected gaussian_kl or literal_ratio");
        }
    }

    if (j.contains("seed")) {
        config.seed = get_index(j.at("seed"), "config.seed");
    }

    if (j.contains("detection")) {
        config.detection = parse_detection(j.at("detection"));
        config.detection->subsample_seed = config.seed;
    }
    if (j.contains("align_on")) {
        config.align_on = parse_align_on(j.at("align_on"));
    }
    if (j.contains("epoch")) {
        config.epoch = parse_epoch(j.at("epoch"), config.model.order);
    }

    if (j.contains("bootstrap")) {
        const json& boot = j.at("bootstrap");
        reject_unknown_keys(boot, {"n_boot", "seed"}, "config.bootstrap");
        BootstrapOptions options;
        options.n_boot = get_index(require_key(boot, "n_boot", "config.bootstrap"),
                                   "config.bootstrap.n_boot");
        if (options.n_boot < 2) {
            throw ValidationError("config.bootstrap.n_boot: must be >= 2");
        }
        options.seed = boot.contains("seed")
                           ? boot.at("seed").get<std::uint64_t>()
                           : config.seed;
        config.bootstrap = options;
    }

    config.output_dir = get_string(require_key(j, "output_dir", "config"), "config.output_dir");
    return config;
}

json RunManifest::to_json() const {
    json j;
    j["version"] = library_version;
    j["config"] = config_echo;
    j["counts"] = {{"events_detected", events_detected},
                   {"events_aligned", events_aligned},
                   {"boundary_dropped", boundary_dropped},
                   {"epochs_extracted", epochs_extracted},
                   {"artifacts_rejected", artifacts_rejected},
                   {"epochs_surviving", epochs_surviving},
                   {"trials_fitted", epochs_surviving}};
    j["warnings"] = warnings;
    return j;
}

namespace {

/// Re-throws the current exception with the pipeline stage prepended,
/// preserving the error category.
[[noreturn]] void annotate_stage(const std::string& stage) {
    try {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError("stage " + stage + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("stage " + stage + ": " + e.what());
    } catch (const EmptyResultError& e) {
        throw EmptyResultError("stage " + stage + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError("stage " + stage + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error("stage " + stage + ": " + e.what());
    }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    const auto t_start = std::chrono::steady_clock::now();
    PipelineResult result;
    RunManifest& manifest = result.manifest;
    manifest.library_version = std::string(version);
    manifest.config_echo = config.echo;

    // Stage: load
    std::optional<TimeSeriesEnsemble> input;
    try {
        input = read_timeseries(config.input_path, config.input_format, config.sampling_rate);
        ensure_valid(*input);
        if (input->n_channels() != 2) {
            throw ValidationError("the analysis is bivariate; input has " +
                                  std::to_string(input->n_channels()) + " channel(s)");
        }
    } catch (...) {
        annotate_stage("load");
    }

    const bool continuous = config.input_mode == InputMode::continuous ||
                            (config.input_mode == InputMode::automatic &&
                             input->n_trials() == 1);
    const std::size_t p = config.model.order;

    std::optional<TimeSeriesEnsemble> epochs;
    if (continuous) {
        if (!config.detection) {
            throw ValidationError("stage detect: continuous input needs 'detection' in the config");
        }
        if (!config.epoch || config.epoch->window_length < 1) {
            throw ValidationError(
                "stage extract: continuous input needs 'epoch.window_length' in the config");
        }
        // Default channel roles: cause is channel 0, effect channel 1.
        const AlignOn align = config.align_on.value_or(AlignOn{});
        if (align.cause_channel >= input->n_channels() ||
            align.effect_channel >= input->n_channels()) {
            throw ValidationError("stage detect: align_on channels out of range for " +
                                  std::to_string(input->n_channels()) + "-channel input");
        }
        DetectionParams detection = *config.detection;
        detection.detection_channel = align.detection_channel();

        std::vector<std::size_t> candidates;
        try {
            candidates = detect_events(*input, detection);
        } catch (...) {
            annotate_stage("detect");
        }
        manifest.events_detected = candidates.size();
        if (candidates.empty()) {
            throw EmptyResultError("stage detect: no threshold crossings found");
        }

        AlignResult aligned;
        try {
            aligned = align_events(*input, candidates, detection);
        } catch (...) {
            annotate_stage("align");
        }
        manifest.events_aligned = aligned.times.size();
        manifest.boundary_dropped = aligned.boundary_dropped;
        if (aligned.boundary_dropped > 0) {
            manifest.warnings.push_back(std::to_string(aligned.boundary_dropped) +
                                        " candidate(s) dropped at the recording boundary");
        }

        try {
            SnapshotResult snap = extract_snapshots(*input, aligned.times, *config.epoch);
            manifest.boundary_dropped += snap.boundary_dropped;
            if (snap.boundary_dropped > 0) {
                manifest.warnings.push_back(std::to_string(snap.boundary_dropped) +
                                            " event(s) lacked room for the epoch window");
            }
            epochs = std::move(snap.epochs);
        } catch (...) {
            annotate_stage("extract");
        }
        manifest.epochs_extracted = epochs->n_trials();
    } else {
        // Ensemble input: trials are already aligned epochs. The alignment
        // point is order + alignment_offset, matching extracted snapshots.
        epochs = *input;
        const std::size_t offset = config.epoch ? config.epoch->alignment_offset : 0;
        if (p + offset >= epochs->n_times()) {
            throw ValidationError("stage load: alignment point " + std::to_string(p + offset) +
                                  " outside trials of length " +
                                  std::to_string(epochs->n_times()));
        }
        epochs->set_time_axis_offset(p + offset);
        manifest.events_detected = epochs->n_trials();
        manifest.events_aligned = epochs->n_trials();
        manifest.epochs_extracted = epochs->n_trials();
    }
    input.reset();

    if (config.epoch && config.epoch->artifact_threshold) {
        try {
            RejectionResult rej = reject_artifacts(*epochs, *config.epoch->artifact_threshold);
            manifest.artifacts_rejected = rej.n_rejected;
            epochs = std::move(rej.epochs);
        } catch (...) {
            annotate_stage("reject");
        }
    }
    manifest.epochs_surviving = epochs->n_trials();

    std::vector<CausalityTrace> traces;
    try {
        if (config.bootstrap) {
            traces = bootstrap_causality(*epochs, config.model, config.measures,
                                         *config.bootstrap, config.rdcs_reference_window,
                                         config.rdcs_form);
        } else {
            traces = compute_causality(*epochs, config.model, config.measures,
                                       config.rdcs_reference_window, config.rdcs_form);
        }
    } catch (...) {
        annotate_stage("measures");
    }

    // Stage: write (partial outputs are removed on failure)
    std::vector<std::filesystem::path> written;
    try {
        std::filesystem::create_directories(config.output_dir);
        for (const CausalityTrace& trace : traces) {
            const std::string name = std::string(measure_label(trace.measure)) + "_" +
                                     direction_label(trace.direction) + ".csv";
            const auto path = config.output_dir / name;
            write_trace_csv(path, trace, epochs->sampling_rate(), epochs->time_axis_offset());
            written.push_back(path);
            result.trace_files.push_back(path);
        }
        const auto manifest_path = config.output_dir / "manifest.json";
        {
            std::ofstream out(manifest_path, std::ios::trunc);
            if (!out) {
                throw IoError("cannot write '" + manifest_path.string() + "'");
            }
            out << manifest.to_json().dump(2) << '\n';
        }
        written.push_back(manifest_path);
        result.manifest_file = manifest_path;
    } catch (...) {
        std::error_code ec;
        for (const auto& path : written) {
            std::filesystem::remove(path, ec);
        }
        annotate_stage("write");
    }

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

}  // namespace tct
