#include "tct/simulate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "tct/errors.hpp"
#include "tct/philox.hpp"

namespace tct {

namespace {

void check_schedule_length(std::size_t got, std::size_t want, const char* name) {
    if (got != want) {
        throw ValidationError(std::string("SvarSpec: schedule '") + name + "' has length " +
                              std::to_string(got) + ", expected " + std::to_string(want));
    }
}

Eigen::VectorXd first_lag_vector(std::size_t order, double value) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
    v[0] = value;
    return v;
}

/// AR(2) coefficients for complex roots rho * exp(+-i theta), zero-padded
/// to the requested order.
Eigen::VectorXd damped_oscillator(std::size_t order, double rho, double theta) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
    v[0] = 2.0 * rho * std::cos(theta);
    v[1] = -rho * rho;
    return v;
}

}  // namespace

void SvarSpec::validate() const {
    if (order < 1) {
        throw ValidationError("SvarSpec: order must be >= 1");
    }
    const std::size_t T = a.size();
    if (T == 0) {
        throw ValidationError("SvarSpec: empty coefficient schedule");
    }
    check_schedule_length(b.size(), T, "b");
    check_schedule_length(c.size(), T, "c");
    check_schedule_length(d.size(), T, "d");
    check_schedule_length(noise_mean1.size(), T, "noise_mean1");
    check_schedule_length(noise_mean2.size(), T, "noise_mean2");
    check_schedule_length(noise_var1.size(), T, "noise_var1");
    check_schedule_length(noise_var2.size(), T, "noise_var2");
    const auto p = static_cast<Eigen::Index>(order);
    for (std::size_t t = 0; t < T; ++t) {
        if (a[t].size() != p || b[t].size() != p || c[t].size() != p || d[t].size() != p) {
            throw ValidationError("SvarSpec: coefficient vector at t = " + std::to_string(t) +
                                  " does not have length " + std::to_string(order));
        }
        if (!(noise_var1[t] > 0.0) || !(noise_var2[t] > 0.0)) {
            throw ValidationError("SvarSpec: non-positive innovation variance at t = " +
                                  std::to_string(t));
        }
    }
}

bool SvarSpec::constant_coefficients() const noexcept {
    for (std::size_t t = 1; t < a.size(); ++t) {
        if (a[t] != a[0] || b[t] != b[0] || c[t] != c[0] || d[t] != d[0]) {
            return false;
        }
    }
    return true;
}

SvarSpec make_constant_spec(std::size_t order, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                            const Eigen::VectorXd& d, double mean1, double mean2,
                            double var1, double var2, std::size_t length) {
    SvarSpec spec;
    spec.order = order;
    spec.a.assign(length, a);
    spec.b.assign(length, b);
    spec.c.assign(length, c);
    spec.d.assign(length, d);
    spec.noise_mean1.assign(length, mean1);
    spec.noise_mean2.assign(length, mean2);
    spec.noise_var1.assign(length, var1);
    spec.noise_var2.assign(length, var2);
    spec.burn_in = 10 * order;
    spec.validate();
    return spec;
}

double spectral_radius_at(const SvarSpec& spec, std::size_t t) {
    if (t >= spec.length()) {
        throw ValidationError("spectral_radius_at: t out of range");
    }
    const auto p = static_cast<Eigen::Index>(spec.order);
    const Eigen::Index dim = 2 * p;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(dim, dim);
    // Top block row: lag-i coefficient matrices [[a_i, b_i], [c_i, d_i]].
    for (Eigen::Index i = 0; i < p; ++i) {
        companion(0, 2 * i) = spec.a[t][i];
        companion(0, 2 * i + 1) = spec.b[t][i];
        companion(1, 2 * i) = spec.c[t][i];
        companion(1, 2 * i + 1) = spec.d[t][i];
    }
    if (dim > 2) {
        companion.block(2, 0, dim - 2, dim - 2).setIdentity();
    }
    return companion.eigenvalues().cwiseAbs().maxCoeff();
}

double max_spectral_radius(const SvarSpec& spec) {
    double radius = 0.0;
    for (std::size_t t = 0; t < spec.length(); ++t) {
        radius = std::max(radius, spectral_radius_at(spec, t));
    }
    return radius;
}

TimeSeriesEnsemble simulate_svar(const SvarSpec& spec, std::size_t n_trials,
                                 std::uint64_t seed) {
    spec.validate();
    if (n_trials < 1) {
        throw ValidationError("simulate_svar: n_trials must be >= 1");
    }
    if (spec.constant_coefficients()) {
        const double radius = spectral_radius_at(spec, 0);
        if (radius >= 1.0) {
            throw NumericError("simulate_svar: unstable constant-coefficient spec, "
                               "companion spectral radius " + std::to_string(radius));
        }
    }

    const std::size_t p = spec.order;
    const std::size_t T = spec.length();
    const std::size_t total = spec.burn_in + T;
    if (total < p) {
        throw ValidationError("simulate_svar: schedule shorter than the model order");
    }

    TimeSeriesEnsemble out(n_trials, 2, T, 1.0, 0);
    std::vector<double> x0(total), x1(total);

    for (std::size_t r = 0; r < n_trials; ++r) {
        for (std::size_t s = 0; s < total; ++s) {
            // Steps before the schedule starts reuse the t = 0 entry.
            const std::size_t k = s < spec.burn_in ? 0 : s - spec.burn_in;
            const auto step = static_cast<std::uint32_t>(s);
            const auto trial = static_cast<std::uint32_t>(r);
            const double z0 = rng::normal(seed, rng::Stream::sim_noise, step, trial, 0);
            const double z1 = rng::normal(seed, rng::Stream::sim_noise, step, trial, 1);
            const double eta0 = spec.noise_mean1[k] + std::sqrt(spec.noise_var1[k]) * z0;
            const double eta1 = spec.noise_mean2[k] + std::sqrt(spec.noise_var2[k]) * z1;
            if (s < p) {
                x0[s] = spec.noise_mean1[0] + std::sqrt(spec.noise_var1[0]) * z0;
                x1[s] = spec.noise_mean2[0] + std::sqrt(spec.noise_var2[0]) * z1;
                continue;
            }
            double own0 = 0.0, cross0 = 0.0, own1 = 0.0, cross1 = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                const double lag0 = x0[s - 1 - i];
                const double lag1 = x1[s - 1 - i];
                own0 += spec.a[k][static_cast<Eigen::Index>(i)] * lag0;
                cross0 += spec.b[k][static_cast<Eigen::Index>(i)] * lag1;
                cross1 += spec.c[k][static_cast<Eigen::Index>(i)] * lag0;
                own1 += spec.d[k][static_cast<Eigen::Index>(i)] * lag1;
            }
            x0[s] = own0 + cross0 + eta0;
            x1[s] = own1 + cross1 + eta1;
        }
        auto s0 = out.series(r, 0);
        auto s1 = out.series(r, 1);
        for (std::size_t t = 0; t < T; ++t) {
            s0[t] = x0[spec.burn_in + t];
            s1[t] = x1[spec.burn_in + t];
        }
    }
    return out;
}

SvarSpec unidirectional_scenario(double coupling, std::size_t order, std::size_t length) {
    if (order < 1 || length < 1) {
        throw ValidationError("unidirectional_scenario: order and length must be >= 1");
    }
    const Eigen::VectorXd own = first_lag_vector(order, 0.5);
    const Eigen::VectorXd b = first_lag_vector(order, coupling);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));
    SvarSpec spec = make_constant_spec(order, own, b, zero, own, 0.0, 0.0, 1.0, 1.0, length);
    const double radius = spectral_radius_at(spec, 0);
    if (radius >= 1.0) {
        throw NumericError("unidirectional_scenario: unstable coefficient set, "
                           "companion spectral radius " + std::to_string(radius));
    }
    return spec;
}

SvarSpec synchrony_pitfall_scenario(double base_var, double dip_var,
                                    std::size_t dip_start, std::size_t dip_end,
                                    std::size_t order, std::size_t length) {
    if (!(base_var > 0.0) || !(dip_var > 0.0) || dip_var > base_var) {
        throw ValidationError("synchrony_pitfall_scenario: need 0 < dip_var <= base_var");
    }
    if (dip_start >= dip_end || dip_end > length) {
        throw ValidationError("synchrony_pitfall_scenario: dip window [" +
                              std::to_string(dip_start) + ", " + std::to_string(dip_end) +
                              ") outside [0, " + std::to_string(length) + ")");
    }
    if (order < 1) {
        throw ValidationError("synchrony_pitfall_scenario: order must be >= 1");
    }

    constexpr double theta = 2.0 * std::numbers::pi / 20.0;  // 20-sample period
    Eigen::VectorXd driver_own, effect_own;
    if (order == 1) {
        // No oscillation at order 1; keep the slow-decay driver.
        driver_own = first_lag_vector(1, 0.995);
        effect_own = first_lag_vector(1, 0.53);
    } else {
        driver_own = damped_oscillator(order, 0.998, theta);
        effect_own = damped_oscillator(order, 0.7, theta);
    }
    const Eigen::VectorXd b = first_lag_vector(order, 0.5);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(order));

    SvarSpec spec = make_constant_spec(order, effect_own, b, zero, driver_own,
                                       0.0, 0.0, 0.25, base_var, length);
    for (std::size_t t = dip_start; t < dip_end; ++t) {
        spec.noise_var2[t] = dip_var;
    }
    // The driver decays slowly; give it time to reach its stationary law.
    spec.burn_in = 2000;
    spec.validate();
    return spec;
}

}  // namespace tct
