#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tct/ensemble.hpp"
#include "tct/estimate.hpp"

namespace tct {

enum class Measure { gc, te, dcs, rdcs };

const char* measure_label(Measure m);
std::optional<Measure> measure_from_label(std::string_view label);

/// Per-time-point status of a trace value.
enum class PointFlag : std::uint8_t {
    ok = 0,
    infinite = 1,   // deterministic coupling: zero full-model residual variance
    undefined = 2,  // zero target variance; value is NaN
};

/// Time series of one causal measure in one direction, in nats.
/// boot_mean / boot_std are filled by bootstrap_causality.
struct CausalityTrace {
    Measure measure = Measure::gc;
    Direction direction = Direction::ch2_to_ch1;
    std::vector<std::size_t> times;  // epoch time indices
    std::vector<double> values;
    std::vector<PointFlag> flags;
    std::vector<double> boot_mean;
    std::vector<double> boot_std;
    std::size_t n_boot = 0;
};

/// GC_t = 1/2 log(RSS_reduced / RSS_full) for the direction's target
/// channel. The raw RSS ratio is used so that nestedness of the two fits
/// guarantees GC >= 0; with equal divisors this equals the residual
/// variance ratio. Zero full-model RSS is reported through the `infinite`
/// flag rather than thrown.
CausalityTrace granger_causality(const SvarModel& model, Direction direction);

/// TE_t = 1/2 log((sigma2 + b' Cov[source lags | target lags] b) / sigma2).
CausalityTrace transfer_entropy(const SvarModel& model, const LaggedMoments& moments,
                                Direction direction);

/// DCS_t = 1/2 log((b' Cov[source lags] b + sigma2) / sigma2).
CausalityTrace dynamic_causal_strength(const SvarModel& model, const LaggedMoments& moments,
                                       Direction direction);

enum class RdcsForm {
    /// Expected Gaussian KL divergence under the baseline intervention:
    ///   1/2 log(s~/s) + (s + b'Mb) / (2 s~) - 1/2,
    /// with s~ = sigma2 + b'C_ref b and M the second moment of the source
    /// lags about the reference mean. Zero when b = 0 and equal to DCS
    /// when the reference matches the current marginal.
    gaussian_kl,
    /// Printed-ratio variant that omits sigma2 from the final term's
    /// numerator; evaluates to -1/2 at b = 0. Kept for comparison only.
    literal_ratio,
};

CausalityTrace relative_dcs(const SvarModel& model, const LaggedMoments& moments,
                            const ReferenceStats& ref, Direction direction,
                            RdcsForm form = RdcsForm::gaussian_kl);

/// Monte-Carlo estimate of the interventional KL divergence that DCS and
/// rDCS evaluate in closed form. Samples stacked lag vectors from the
/// estimated joint Gaussian at one analysis time; for each sample the KL
/// between the observational conditional and the post-intervention
/// conditional (source input replaced by an independent draw from the
/// chosen marginal, analytically marginalized) is averaged. Test-support
/// oracle; deterministic given seed.
struct McIntervention {
    enum class Kind { current_marginal, reference_marginal };
    Kind kind = Kind::current_marginal;
    const ReferenceStats* ref = nullptr;  // required for reference_marginal
};

struct McKlResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

McKlResult monte_carlo_kl(const SvarModel& model, const LaggedMoments& moments,
                          std::size_t time, Direction direction,
                          const McIntervention& intervention, std::size_t n_samples,
                          std::uint64_t seed);

/// Fits the ensemble and evaluates the requested measures in both
/// directions (point estimates only). The rDCS reference window is given
/// in epoch time indices and is required iff rdcs is requested.
std::vector<CausalityTrace> compute_causality(
    const TimeSeriesEnsemble& epochs, const ModelConfig& config,
    std::span<const Measure> measures,
    std::optional<std::pair<std::size_t, std::size_t>> rdcs_reference_window = std::nullopt,
    RdcsForm rdcs_form = RdcsForm::gaussian_kl);

struct BootstrapOptions {
    std::size_t n_boot = 100;
    std::uint64_t seed = 0;
};

/// compute_causality plus trial-resampling uncertainty bands: trials are
/// resampled with replacement n_boot times and the full
/// fit -> moments -> measures chain is re-run per replicate. Point
/// estimates come from the original ensemble. A replicate whose fit is
/// singular is retried on a fresh substream up to 10 times, then counted
/// as failed; more than 20% failures is an error. Results are
/// deterministic given the seed and independent of evaluation order.
std::vector<CausalityTrace> bootstrap_causality(
    const TimeSeriesEnsemble& epochs, const ModelConfig& config,
    std::span<const Measure> measures, const BootstrapOptions& options,
    std::optional<std::pair<std::size_t, std::size_t>> rdcs_reference_window = std::nullopt,
    RdcsForm rdcs_form = RdcsForm::gaussian_kl);

}  // namespace tct
