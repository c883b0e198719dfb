#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tct/errors.hpp"
#include "tct/pipeline.hpp"
#include "tct/spec_json.hpp"
#include "tct/version.hpp"

namespace tct {

namespace {

nlohmann::json load_json_file(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(std::string(what) + " file '" + path.string() +
                              "' cannot be opened");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string(what) + " '" + path.string() + "': " + e.what());
    }
    return j;
}

InputFormat format_from_flag(const std::string& tag) {
    if (tag == "csv") return InputFormat::csv;
    if (tag == "tct") return InputFormat::tct;
    throw ValidationError("unknown input format '" + tag + "' (expected csv or tct)");
}

struct SimulateArgs {
    std::string spec_path;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    std::string out_path;
};

int cmd_simulate(const SimulateArgs& args) {
    const SvarSpec spec = svar_spec_from_json(load_json_file(args.spec_path, "spec"));
    const double radius = max_spectral_radius(spec);
    if (!spec.constant_coefficients() && radius >= 1.0) {
        std::cerr << "warning: frozen-coefficient spectral radius reaches "
                  << radius << "; the time-varying system may be unstable\n";
    }
    const TimeSeriesEnsemble ensemble = simulate_svar(spec, args.trials, args.seed);
    write_tct(args.out_path, ensemble);
    std::cerr << "wrote " << ensemble.n_trials() << " x " << ensemble.n_channels() << " x "
              << ensemble.n_times() << " ensemble to " << args.out_path << "\n";
    return 0;
}

struct DetectArgs {
    std::string input_path;
    std::string format = "csv";
    double sampling_rate = 1.0;
    DetectionParams params;
    std::string out_path;
};

int cmd_detect(const DetectArgs& args) {
    const TimeSeriesEnsemble recording =
        read_timeseries(args.input_path, format_from_flag(args.format), args.sampling_rate);
    ensure_valid(recording);
    const auto candidates = detect_events(recording, args.params);
    if (candidates.empty()) {
        throw EmptyResultError("no threshold crossings found");
    }
    const AlignResult aligned = align_events(recording, candidates, args.params);
    if (aligned.boundary_dropped > 0) {
        std::cerr << "warning: " << aligned.boundary_dropped
                  << " candidate(s) dropped at the recording boundary\n";
    }
    std::ofstream out(args.out_path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + args.out_path + "'");
    }
    out << "time_index\n";
    for (std::size_t t : aligned.times) {
        out << t << '\n';
    }
    std::cerr << "detected " << candidates.size() << " crossing(s), kept "
              << aligned.times.size() << " aligned event(s)\n";
    return 0;
}

struct AnalyzeArgs {
    std::string input_path;
    double sampling_rate = 1.0;
    std::size_t order = 1;
    std::string measures = "te,dcs";
    std::string rdcs_ref;  // "start:end" in epoch samples
    std::size_t alignment_offset = 0;
    std::size_t n_boot = 0;
    std::uint64_t seed = 0;
    double ridge = 0.0;
    bool no_intercept = false;
    std::string out_dir;
};

int cmd_analyze(const AnalyzeArgs& args) {
    nlohmann::json j;
    j["input"] = {{"path", args.input_path},
                  {"format", "tct"},
                  {"sampling_rate", args.sampling_rate},
                  {"mode", "ensemble"}};
    j["model"] = {{"order", args.order},
                  {"include_intercept", !args.no_intercept},
                  {"ridge_epsilon", args.ridge}};
    nlohmann::json measures = nlohmann::json::array();
    std::string token;
    std::istringstream stream(args.measures);
    while (std::getline(stream, token, ',')) {
        if (!token.empty()) measures.push_back(token);
    }
    j["measures"] = measures;
    if (!args.rdcs_ref.empty()) {
        const auto colon = args.rdcs_ref.find(':');
        if (colon == std::string::npos) {
            throw ValidationError("--rdcs-ref expects start:end in epoch samples");
        }
        j["rdcs_reference_window"] = {std::stoull(args.rdcs_ref.substr(0, colon)),
                                      std::stoull(args.rdcs_ref.substr(colon + 1))};
    }
    if (args.alignment_offset > 0) {
        j["epoch"] = {{"alignment_offset", args.alignment_offset}};
    }
    if (args.n_boot > 0) {
        j["bootstrap"] = {{"n_boot", args.n_boot}, {"seed", args.seed}};
    }
    j["seed"] = args.seed;
    j["output_dir"] = args.out_dir;

    const PipelineResult result = run_pipeline(parse_config(j));
    std::cerr << "analyzed " << result.manifest.epochs_surviving << " trial(s); wrote "
              << result.trace_files.size() << " trace file(s) to " << args.out_dir << "\n";
    return 0;
}

int cmd_pipeline(const std::string& config_path) {
    const PipelineConfig config = load_config(config_path);
    const PipelineResult result = run_pipeline(config);
    std::cerr << "pipeline finished in " << result.manifest.wall_seconds << " s: "
              << result.manifest.events_detected << " detected, "
              << result.manifest.events_aligned << " aligned, "
              << result.manifest.epochs_surviving << " epoch(s) analyzed\n";
    for (const std::string& warning : result.manifest.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    return 0;
}

int cmd_validate_config(const std::string& config_path) {
    load_config(config_path);
    std::cerr << "config OK: " << config_path << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Time-resolved causal inference around transient events"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Generate a synthetic SVAR ensemble and write it as tct binary");
    simulate->add_option("--spec", sim.spec_path, "Simulation spec JSON")->required();
    simulate->add_option("--trials", sim.trials, "Number of trials")->required();
    simulate->add_option("--seed", sim.seed, "Master seed");
    simulate->add_option("--out", sim.out_path, "Output .tct path")->required();

    DetectArgs det;
    CLI::App* detect = app.add_subcommand(
        "detect", "Detect and align threshold-crossing events in a recording");
    detect->add_option("--input", det.input_path, "Input recording")->required();
    detect->add_option("--format", det.format, "Input format: csv or tct");
    detect->add_option("--sampling-rate", det.sampling_rate, "Samples per second");
    detect->add_option("--channel", det.params.detection_channel, "Detection channel index");
    detect->add_option("--threshold-ratio", det.params.threshold_ratio,
                       "Threshold in multiples of the signal std");
    detect->add_option("--min-separation", det.params.min_separation,
                       "Refractory gap in samples");
    detect
        ->add_option_function<std::string>(
            "--alignment",
            [&det](const std::string& mode) {
                if (mode == "local_peak") {
                    det.params.alignment_mode = AlignmentMode::local_peak;
                } else if (mode == "pooled_peak") {
                    det.params.alignment_mode = AlignmentMode::pooled_peak;
                } else {
                    throw CLI::ValidationError("--alignment",
                                               "expected local_peak or pooled_peak");
                }
            },
            "Alignment mode: local_peak or pooled_peak")
        ->default_str("local_peak");
    detect->add_option("--halfwidth", det.params.peak_search_halfwidth,
                       "Peak search halfwidth W");
    detect
        ->add_option_function<std::size_t>(
            "--max-events", [&det](std::size_t n) { det.params.max_events = n; },
            "Cap with seeded uniform subsampling");
    detect->add_option("--subsample-seed", det.params.subsample_seed, "Subsample seed");
    detect->add_option("--out", det.out_path, "Output CSV of event indices")->required();

    AnalyzeArgs ana;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "Compute causal measures on an already-epoched tct ensemble");
    analyze->add_option("--input", ana.input_path, "Epoched ensemble (.tct)")->required();
    analyze->add_option("--sampling-rate", ana.sampling_rate, "Samples per second");
    analyze->add_option("--order", ana.order, "Model order p")->required();
    analyze->add_option("--measures", ana.measures, "Comma-separated: gc,te,dcs,rdcs");
    analyze->add_option("--rdcs-ref", ana.rdcs_ref, "Reference window start:end (epoch samples)");
    analyze->add_option("--alignment-offset", ana.alignment_offset,
                        "Alignment point offset past the lag preamble");
    analyze->add_option("--bootstrap", ana.n_boot, "Bootstrap replicate count");
    analyze->add_option("--seed", ana.seed, "Master seed");
    analyze->add_option("--ridge", ana.ridge, "Ridge added to normal-equation diagonals");
    analyze->add_flag("--no-intercept", ana.no_intercept, "Fit without intercepts");
    analyze->add_option("--out-dir", ana.out_dir, "Output directory")->required();

    std::string pipeline_config;
    CLI::App* pipeline = app.add_subcommand("pipeline", "Run the config-driven pipeline");
    pipeline->add_option("--config", pipeline_config, "Pipeline config JSON")->required();

    std::string validate_config_path;
    CLI::App* validate = app.add_subcommand("validate-config",
                                            "Check a pipeline config without running it");
    validate->add_option("--config", validate_config_path, "Pipeline config JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << version << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (detect->parsed()) return cmd_detect(det);
        if (analyze->parsed()) return cmd_analyze(ana);
        if (pipeline->parsed()) return cmd_pipeline(pipeline_config);
        if (validate->parsed()) return cmd_validate_config(validate_config_path);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace tct
