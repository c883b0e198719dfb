#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "tct/ensemble.hpp"

namespace tct {

/// Which coupling a causal measure quantifies. Channel labels follow the
/// model equations: "ch1" is data channel 0, "ch2" is data channel 1.
enum class Direction {
    ch2_to_ch1,  // coupling b: channel 1's past into channel 0
    ch1_to_ch2,  // coupling c: channel 0's past into channel 1
};

inline const char* direction_label(Direction d) {
    return d == Direction::ch2_to_ch1 ? "ch2_to_ch1" : "ch1_to_ch2";
}

/// Time-inhomogeneous bivariate SVAR fitted independently at each
/// analysis time by cross-trial least squares. All per-time vectors are
/// indexed like `times`; coefficient vectors are newest-lag-first.
///
/// Residual variances use the unbiased convention RSS / (R - #regressors).
/// The raw RSS values are kept alongside: for nested fits
/// rss_full <= rss_reduced holds exactly, which is not guaranteed after
/// dof correction.
struct SvarModel {
    std::size_t order = 0;
    bool intercept = true;
    std::size_t n_trials = 0;
    std::vector<std::size_t> times;  // epoch time indices, [p, T)

    // Channel-0 equation ("ch1"): own past a, cross past b.
    std::vector<Eigen::VectorXd> a, b;
    std::vector<double> intercept1;
    std::vector<double> sigma2_1, sigma2_1_reduced;
    std::vector<double> rss1_full, rss1_reduced;

    // Channel-1 equation ("ch2"): cross past c, own past d.
    std::vector<Eigen::VectorXd> c, d;
    std::vector<double> intercept2;
    std::vector<double> sigma2_2, sigma2_2_reduced;
    std::vector<double> rss2_full, rss2_reduced;

    // Classical OLS standard errors of the full-model coefficients.
    std::vector<Eigen::VectorXd> se_a, se_b, se_c, se_d;
    std::vector<double> se_intercept1, se_intercept2;

    std::size_t n_analysis_times() const noexcept { return times.size(); }

    /// Coupling vector of the given direction at time index i.
    const Eigen::VectorXd& coupling(Direction dir, std::size_t i) const {
        return dir == Direction::ch2_to_ch1 ? b[i] : c[i];
    }
    /// Full-model innovation variance of the target channel.
    double target_variance(Direction dir, std::size_t i) const {
        return dir == Direction::ch2_to_ch1 ? sigma2_1[i] : sigma2_2[i];
    }
};

/// Fits full (own past + other's past) and reduced (own past only) models
/// for both channels at every analysis time t in [p, T), regressing across
/// trials. Throws ValidationError when trials are too few for the
/// regressor count and NumericError (naming t) when the cross-trial design
/// is singular and no ridge is configured.
SvarModel fit_svar_ensemble(const TimeSeriesEnsemble& epochs, const ModelConfig& config);

/// Cross-trial moments of the stacked lag vector [ch1 lags; ch2 lags]
/// (dimension 2p) at each analysis time, with the Schur-complement
/// conditional covariances used by the causal measures.
struct LaggedMoments {
    std::size_t order = 0;
    std::size_t n_trials = 0;
    std::vector<std::size_t> times;

    std::vector<Eigen::VectorXd> mean;  // 2p
    std::vector<Eigen::MatrixXd> cov;   // 2p x 2p, symmetric PSD

    std::vector<Eigen::MatrixXd> cov1, cov2;  // marginal p x p blocks
    std::vector<Eigen::MatrixXd> cond_cov_2_given_1;  // Cov[ch2 lags | ch1 lags]
    std::vector<Eigen::MatrixXd> cond_cov_1_given_2;

    // Set when the conditioned block was near-singular (condition number
    // above 1e12); the Schur complement then used a pseudoinverse.
    std::vector<bool> conditioning_warning;

    const Eigen::MatrixXd& marginal_cov(Direction dir, std::size_t i) const {
        return dir == Direction::ch2_to_ch1 ? cov2[i] : cov1[i];
    }
    const Eigen::MatrixXd& conditional_cov(Direction dir, std::size_t i) const {
        return dir == Direction::ch2_to_ch1 ? cond_cov_2_given_1[i] : cond_cov_1_given_2[i];
    }
    Eigen::VectorXd source_mean(Direction dir, std::size_t i) const {
        const auto p = static_cast<Eigen::Index>(order);
        return dir == Direction::ch2_to_ch1 ? mean[i].tail(p) : mean[i].head(p);
    }
};

LaggedMoments compute_lagged_moments(const TimeSeriesEnsemble& epochs, std::size_t order);

/// Baseline moments of the cause channel's lag vector, pooled over all
/// trials and all times in [window_start, window_end). The window must lie
/// wholly before the epoch's alignment point and leave room for the lags.
struct ReferenceStats {
    std::size_t window_start = 0;
    std::size_t window_end = 0;
    Direction direction = Direction::ch2_to_ch1;
    std::size_t n_pooled = 0;
    Eigen::VectorXd mean;  // p
    Eigen::MatrixXd cov;   // p x p
};

ReferenceStats compute_reference_stats(const TimeSeriesEnsemble& epochs,
                                       std::size_t window_start, std::size_t window_end,
                                       std::size_t order, Direction direction);

}  // namespace tct
