#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "tct/ensemble.hpp"

namespace tct {

/// Generative bivariate SVAR with per-time-point coefficients and
/// innovation schedules. Channel 0 carries the "ch1" equation
/// (own past via a, other's past via b), channel 1 the "ch2" equation
/// (other's past via c, own past via d). All coefficient vectors are
/// newest-lag-first.
struct SvarSpec {
    std::size_t order = 1;  // p

    // Schedules, one entry per output time step; each vector has length p.
    std::vector<Eigen::VectorXd> a;  // ch1 <- own past
    std::vector<Eigen::VectorXd> b;  // ch1 <- ch2 past
    std::vector<Eigen::VectorXd> c;  // ch2 <- ch1 past
    std::vector<Eigen::VectorXd> d;  // ch2 <- own past

    std::vector<double> noise_mean1, noise_mean2;  // kappa per time
    std::vector<double> noise_var1, noise_var2;    // sigma^2 per time, > 0

    std::size_t burn_in = 0;

    std::size_t length() const noexcept { return a.size(); }

    /// Throws ValidationError on inconsistent schedules or non-positive
    /// variances.
    void validate() const;

    /// True when every schedule entry equals the t = 0 entry.
    bool constant_coefficients() const noexcept;
};

/// Builds a constant-coefficient spec, broadcasting one entry across T.
/// burn_in defaults to 10 * order.
SvarSpec make_constant_spec(std::size_t order, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                            const Eigen::VectorXd& d, double mean1, double mean2,
                            double var1, double var2, std::size_t length);

/// Spectral radius of the bivariate VAR companion matrix built from the
/// coefficients frozen at time t.
double spectral_radius_at(const SvarSpec& spec, std::size_t t);

/// Largest frozen-coefficient spectral radius across the schedule.
double max_spectral_radius(const SvarSpec& spec);

/// Draws n_trials independent trajectories of the spec. Innovations use
/// counter-based substreams keyed by (trial, channel, step), so output is
/// bit-identical for a given (spec, n_trials, seed) regardless of
/// evaluation order. The first `order` samples are drawn i.i.d. from the
/// t = 0 innovation law; burn_in leading steps (which reuse the t = 0
/// schedule entry) are discarded. For constant-coefficient specs an
/// unstable coefficient set is an error; for time-varying schedules
/// stability is the caller's concern (see max_spectral_radius).
TimeSeriesEnsemble simulate_svar(const SvarSpec& spec, std::size_t n_trials,
                                 std::uint64_t seed);

/// Stationary unidirectional scenario: channel 1 drives channel 0 with the
/// given coupling on the first lag (b = [coupling, 0, ...]), no reverse
/// coupling (c = 0), both channels mildly autoregressive with unit
/// innovation variance. Throws if the implied VAR is unstable.
SvarSpec unidirectional_scenario(double coupling, std::size_t order, std::size_t length);

/// Synchrony-pitfall scenario: channel 1 (driver) is a slowly decaying
/// oscillator coupled into channel 0 throughout; the driver's innovation
/// variance equals base_var outside [dip_start, dip_end) and dip_var
/// inside. dip_var == base_var gives the constant-variance control.
/// Inside the dip the two signals synchronize while the causal mechanism
/// is unchanged.
SvarSpec synchrony_pitfall_scenario(double base_var, double dip_var,
                                    std::size_t dip_start, std::size_t dip_end,
                                    std::size_t order, std::size_t length);

}  // namespace tct
