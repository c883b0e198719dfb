#include "tct/causality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "tct/errors.hpp"
#include "tct/philox.hpp"

namespace tct {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

CausalityTrace make_trace(Measure m, Direction dir, const std::vector<std::size_t>& times) {
    CausalityTrace trace;
    trace.measure = m;
    trace.direction = dir;
    trace.times = times;
    trace.values.assign(times.size(), 0.0);
    trace.flags.assign(times.size(), PointFlag::ok);
    return trace;
}

void check_model_moments(const SvarModel& model, const LaggedMoments& moments) {
    if (model.order != moments.order || model.times != moments.times) {
        throw ValidationError("model and moments disagree on order or analysis times");
    }
}

/// Quadratic form b' M b, floored at zero. M is PSD up to roundoff, so
/// negative results can only be numerical noise.
double psd_quadratic(const Eigen::VectorXd& b, const Eigen::MatrixXd& m) {
    return std::max(0.0, b.dot(m * b));
}

double rdcs_value(double sigma2, double quad_ref, double quad_moment, RdcsForm form,
                  PointFlag& flag) {
    const double inflated = sigma2 + quad_ref;
    if (sigma2 <= 0.0 || inflated <= 0.0) {
        flag = PointFlag::undefined;
        return kNaN;
    }
    const double log_term = 0.5 * std::log(inflated / sigma2);
    if (form == RdcsForm::literal_ratio) {
        return log_term - 0.5 + quad_moment / (2.0 * inflated);
    }
    return log_term + (sigma2 + quad_moment) / (2.0 * inflated) - 0.5;
}

}  // namespace

const char* measure_label(Measure m) {
    switch (m) {
        case Measure::gc: return "gc";
        case Measure::te: return "te";
        case Measure::dcs: return "dcs";
        case Measure::rdcs: return "rdcs";
    }
    return "?";
}

std::optional<Measure> measure_from_label(std::string_view label) {
    if (label == "gc" || label == "GC") return Measure::gc;
    if (label == "te" || label == "TE") return Measure::te;
    if (label == "dcs" || label == "DCS") return Measure::dcs;
    if (label == "rdcs" || label == "rDCS" || label == "RDCS") return Measure::rdcs;
    return std::nullopt;
}

CausalityTrace granger_causality(const SvarModel& model, Direction direction) {
    CausalityTrace trace = make_trace(Measure::gc, direction, model.times);
    const auto& rss_full =
        direction == Direction::ch2_to_ch1 ? model.rss1_full : model.rss2_full;
    const auto& rss_reduced =
        direction == Direction::ch2_to_ch1 ? model.rss1_reduced : model.rss2_reduced;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        if (rss_full[i] <= 0.0) {
            if (rss_reduced[i] <= 0.0) {
                trace.values[i] = kNaN;
                trace.flags[i] = PointFlag::undefined;
            } else {
                trace.values[i] = kInf;
                trace.flags[i] = PointFlag::infinite;
            }
            continue;
        }
        trace.values[i] = 0.5 * std::log(rss_reduced[i] / rss_full[i]);
    }
    return trace;
}

CausalityTrace transfer_entropy(const SvarModel& model, const LaggedMoments& moments,
                                Direction direction) {
    check_model_moments(model, moments);
    CausalityTrace trace = make_trace(Measure::te, direction, model.times);
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double sigma2 = model.target_variance(direction, i);
        if (sigma2 <= 0.0) {
            trace.values[i] = kNaN;
            trace.flags[i] = PointFlag::undefined;
            continue;
        }
        const double quad =
            psd_quadratic(model.coupling(direction, i), moments.conditional_cov(direction, i));
        trace.values[i] = 0.5 * std::log1p(quad / sigma2);
    }
    return trace;
}

CausalityTrace dynamic_causal_strength(const SvarModel& model, const LaggedMoments& moments,
                                       Direction direction) {
    check_model_moments(model, moments);
    CausalityTrace trace = make_trace(Measure::dcs, direction, model.times);
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double sigma2 = model.target_variance(direction, i);
        if (sigma2 <= 0.0) {
            trace.values[i] = kNaN;
            trace.flags[i] = PointFlag::undefined;
            continue;
        }
        const double quad =
            psd_quadratic(model.coupling(direction, i), moments.marginal_cov(direction, i));
        trace.values[i] = 0.5 * std::log1p(quad / sigma2);
    }
    return trace;
}

CausalityTrace relative_dcs(const SvarModel& model, const LaggedMoments& moments,
                            const ReferenceStats& ref, Direction direction, RdcsForm form) {
    check_model_moments(model, moments);
    if (ref.direction != direction) {
        throw ValidationError("relative_dcs: reference stats were pooled for the other direction");
    }
    if (ref.mean.size() != static_cast<Eigen::Index>(model.order)) {
        throw ValidationError("relative_dcs: reference stats dimension does not match the order");
    }
    CausalityTrace trace = make_trace(Measure::rdcs, direction, model.times);
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double sigma2 = model.target_variance(direction, i);
        const Eigen::VectorXd& b = model.coupling(direction, i);
        // Second moment of the source lags about the reference mean:
        // current covariance plus the squared mean shift.
        const Eigen::VectorXd shift = moments.source_mean(direction, i) - ref.mean;
        const double quad_moment =
            psd_quadratic(b, moments.marginal_cov(direction, i)) + std::pow(b.dot(shift), 2);
        const double quad_ref = psd_quadratic(b, ref.cov);
        trace.values[i] = rdcs_value(sigma2, quad_ref, quad_moment, form, trace.flags[i]);
    }
    return trace;
}

McKlResult monte_carlo_kl(const SvarModel& model, const LaggedMoments& moments,
                          std::size_t time, Direction direction,
                          const McIntervention& intervention, std::size_t n_samples,
                          std::uint64_t seed) {
    check_model_moments(model, moments);
    if (n_samples < 100) {
        throw ValidationError("monte_carlo_kl: need at least 100 samples");
    }
    const auto it = std::find(model.times.begin(), model.times.end(), time);
    if (it == model.times.end()) {
        throw ValidationError("monte_carlo_kl: time " + std::to_string(time) +
                              " is not an analysis time");
    }
    const std::size_t i = static_cast<std::size_t>(it - model.times.begin());

    const double sigma2 = model.target_variance(direction, i);
    if (sigma2 <= 0.0) {
        throw NumericError("monte_carlo_kl: zero innovation variance at t = " +
                           std::to_string(time));
    }
    const Eigen::VectorXd& b = model.coupling(direction, i);
    const auto p = static_cast<Eigen::Index>(model.order);

    Eigen::VectorXd ref_mean;
    Eigen::MatrixXd ref_cov;
    if (intervention.kind == McIntervention::Kind::reference_marginal) {
        if (intervention.ref == nullptr) {
            throw ValidationError("monte_carlo_kl: reference_marginal needs ReferenceStats");
        }
        if (intervention.ref->direction != direction) {
            throw ValidationError("monte_carlo_kl: reference stats direction mismatch");
        }
        ref_mean = intervention.ref->mean;
        ref_cov = intervention.ref->cov;
    } else {
        ref_mean = moments.source_mean(direction, i);
        ref_cov = moments.marginal_cov(direction, i);
    }

    const double inflated = sigma2 + psd_quadratic(b, ref_cov);
    const double log_term = 0.5 * std::log(inflated / sigma2);

    // PSD square root of the joint lag covariance for sampling.
    const Eigen::MatrixXd& joint_cov = moments.cov[i];
    const Eigen::VectorXd& joint_mean = moments.mean[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(joint_cov);
    const Eigen::VectorXd scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd factor = es.eigenvectors() * scale.asDiagonal();

    const Eigen::Index dim = joint_cov.rows();
    Eigen::VectorXd gauss(dim), z(dim);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            gauss[j] = rng::normal(seed, rng::Stream::mc_oracle, static_cast<std::uint32_t>(s),
                                   static_cast<std::uint32_t>(j), 0);
        }
        z = joint_mean + factor * gauss;
        const Eigen::VectorXd source =
            direction == Direction::ch2_to_ch1 ? z.tail(p) : z.head(p);
        // KL between N(m1, sigma2) and N(m2, inflated) where the
        // observational and interventional means differ by b'(source - ref).
        const double delta = b.dot(source - ref_mean);
        const double kl = log_term + (sigma2 + delta * delta) / (2.0 * inflated) - 0.5;
        sum += kl;
        sum_sq += kl * kl;
    }
    const double n = static_cast<double>(n_samples);
    McKlResult result;
    result.n_samples = n_samples;
    result.estimate = sum / n;
    const double var = std::max(0.0, (sum_sq - n * result.estimate * result.estimate) / (n - 1.0));
    result.std_error = std::sqrt(var / n);
    return result;
}

std::vector<CausalityTrace> compute_causality(
    const TimeSeriesEnsemble& epochs, const ModelConfig& config,
    std::span<const Measure> measures,
    std::optional<std::pair<std::size_t, std::size_t>> rdcs_reference_window,
    RdcsForm rdcs_form) {
    const bool wants_rdcs =
        std::find(measures.begin(), measures.end(), Measure::rdcs) != measures.end();
    if (wants_rdcs && !rdcs_reference_window) {
        throw ValidationError("rdcs requested without a reference window");
    }

    const SvarModel model = fit_svar_ensemble(epochs, config);
    const LaggedMoments moments = compute_lagged_moments(epochs, config.order);

    std::vector<CausalityTrace> traces;
    for (const Measure m : measures) {
        for (const Direction dir : {Direction::ch2_to_ch1, Direction::ch1_to_ch2}) {
            switch (m) {
                case Measure::gc:
                    traces.push_back(granger_causality(model, dir));
                    break;
                case Measure::te:
                    traces.push_back(transfer_entropy(model, moments, dir));
                    break;
                case Measure::dcs:
                    traces.push_back(dynamic_causal_strength(model, moments, dir));
                    break;
                case Measure::rdcs: {
                    const auto ref = compute_reference_stats(
                        epochs, rdcs_reference_window->first, rdcs_reference_window->second,
                        config.order, dir);
                    traces.push_back(relative_dcs(model, moments, ref, dir, rdcs_form));
                    break;
                }
            }
        }
    }
    return traces;
}

std::vector<CausalityTrace> bootstrap_causality(
    const TimeSeriesEnsemble& epochs, const ModelConfig& config,
    std::span<const Measure> measures, const BootstrapOptions& options,
    std::optional<std::pair<std::size_t, std::size_t>> rdcs_reference_window,
    RdcsForm rdcs_form) {
    if (options.n_boot < 2) {
        throw ValidationError("bootstrap_causality: n_boot must be >= 2");
    }

    std::vector<CausalityTrace> traces =
        compute_causality(epochs, config, measures, rdcs_reference_window, rdcs_form);
    const std::size_t n_traces = traces.size();
    const std::size_t n_times = traces.empty() ? 0 : traces.front().times.size();
    const std::size_t R = epochs.n_trials();

    std::vector<std::vector<double>> sum(n_traces, std::vector<double>(n_times, 0.0));
    std::vector<std::vector<double>> sum_sq(n_traces, std::vector<double>(n_times, 0.0));

    TimeSeriesEnsemble resampled(R, epochs.n_channels(), epochs.n_times(),
                                 epochs.sampling_rate(), epochs.time_axis_offset());
    std::size_t n_ok = 0, n_failed = 0;
    for (std::size_t k = 0; k < options.n_boot; ++k) {
        bool done = false;
        for (std::uint32_t attempt = 0; attempt <= 10 && !done; ++attempt) {
            rng::Substream stream(options.seed, rng::Stream::boot_resample,
                                  static_cast<std::uint32_t>(k), attempt);
            for (std::size_t r = 0; r < R; ++r) {
                const std::size_t src = stream.next_below(R);
                for (std::size_t ch = 0; ch < epochs.n_channels(); ++ch) {
                    const auto in = epochs.series(src, ch);
                    auto out = resampled.series(r, ch);
                    std::copy(in.begin(), in.end(), out.begin());
                }
            }
            try {
                const auto replicate = compute_causality(resampled, config, measures,
                                                         rdcs_reference_window, rdcs_form);
                for (std::size_t j = 0; j < n_traces; ++j) {
                    for (std::size_t i = 0; i < n_times; ++i) {
                        const double v = replicate[j].values[i];
                        sum[j][i] += v;
                        sum_sq[j][i] += v * v;
                    }
                }
                ++n_ok;
                done = true;
            } catch (const NumericError&) {
                // retry with a fresh substream (attempt is part of the counter)
            }
        }
        if (!done) ++n_failed;
    }

    if (static_cast<double>(n_failed) > 0.2 * static_cast<double>(options.n_boot)) {
        throw NumericError("bootstrap_causality: " + std::to_string(n_failed) + " of " +
                           std::to_string(options.n_boot) + " replicates failed to fit");
    }
    if (n_ok < 2) {
        throw NumericError("bootstrap_causality: fewer than 2 successful replicates");
    }

    const double n = static_cast<double>(n_ok);
    for (std::size_t j = 0; j < n_traces; ++j) {
        traces[j].n_boot = n_ok;
        traces[j].boot_mean.resize(n_times);
        traces[j].boot_std.resize(n_times);
        for (std::size_t i = 0; i < n_times; ++i) {
            const double mean = sum[j][i] / n;
            traces[j].boot_mean[i] = mean;
            const double var = std::max(0.0, (sum_sq[j][i] - n * mean * mean) / (n - 1.0));
            traces[j].boot_std[i] = std::sqrt(var);
        }
    }
    return traces;
}

}  // namespace tct
