#include "tct/estimate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tct/errors.hpp"

namespace tct {

namespace {

constexpr double kConditionWarnThreshold = 1e12;

void check_bivariate(const TimeSeriesEnsemble& epochs) {
    if (epochs.n_channels() != 2) {
        throw ValidationError("estimation requires a bivariate ensemble, got " +
                              std::to_string(epochs.n_channels()) + " channels");
    }
}

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd std_err;
    double rss = 0.0;
    double sigma2 = 0.0;  // rss / (R - k)
};

/// Solves the normal equations (G + ridge I) beta = Zt y. G is the shared
/// Gram matrix of the full design; `cols` selects the regressors of this
/// model. Throws NumericError when the selected block is singular and no
/// ridge is available.
OlsFit solve_ols(const Eigen::MatrixXd& design, const Eigen::MatrixXd& gram,
                 const Eigen::VectorXd& target, const std::vector<Eigen::Index>& cols,
                 double ridge, std::size_t t) {
    const auto k = static_cast<Eigen::Index>(cols.size());
    const auto n = design.rows();

    Eigen::MatrixXd G(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            G(i, j) = gram(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
        }
        G(i, i) += ridge;
    }
    Eigen::VectorXd h(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        h[i] = design.col(cols[static_cast<std::size_t>(i)]).dot(target);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    const auto& diag = ldlt.vectorD();
    const double dmax = diag.maxCoeff();
    const double dmin = diag.minCoeff();
    const bool singular = ldlt.info() != Eigen::Success || dmax <= 0.0 ||
                          dmin <= dmax * static_cast<double>(n) *
                                      std::numeric_limits<double>::epsilon();
    if (singular && ridge <= 0.0) {
        throw NumericError("singular cross-trial design at time t = " + std::to_string(t) +
                           "; add trials or set ridge_epsilon");
    }

    OlsFit fit;
    fit.beta = ldlt.solve(h);

    Eigen::VectorXd resid = target;
    for (Eigen::Index i = 0; i < k; ++i) {
        resid -= fit.beta[i] * design.col(cols[static_cast<std::size_t>(i)]);
    }
    fit.rss = resid.squaredNorm();
    const double dof = static_cast<double>(n) - static_cast<double>(k);
    fit.sigma2 = fit.rss / dof;

    const Eigen::MatrixXd Ginv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
    fit.std_err.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        fit.std_err[i] = std::sqrt(std::max(0.0, fit.sigma2 * Ginv(i, i)));
    }
    return fit;
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix, plus a flag for
/// condition numbers above the warning threshold.
Eigen::MatrixXd psd_pseudoinverse(const Eigen::MatrixXd& m, bool& ill_conditioned) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd& lambda = es.eigenvalues();
    const double lmax = lambda.maxCoeff();
    const double tol = lmax > 0.0
                           ? lmax * static_cast<double>(m.rows()) *
                                 std::numeric_limits<double>::epsilon()
                           : 0.0;
    double lmin_pos = lmax;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] > tol) {
            inv[i] = 1.0 / lambda[i];
            lmin_pos = std::min(lmin_pos, lambda[i]);
        }
    }
    ill_conditioned = lmax <= 0.0 || lambda.minCoeff() <= tol ||
                      lmax / lmin_pos > kConditionWarnThreshold;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

SvarModel fit_svar_ensemble(const TimeSeriesEnsemble& epochs, const ModelConfig& config) {
    check_bivariate(epochs);
    const std::size_t p = config.order;
    if (p < 1) {
        throw ValidationError("fit_svar_ensemble: model order must be >= 1");
    }
    const std::size_t R = epochs.n_trials();
    const std::size_t T = epochs.n_times();
    if (T < p + 1) {
        throw ValidationError("fit_svar_ensemble: epochs of length " + std::to_string(T) +
                              " leave no analysis time for order " + std::to_string(p));
    }
    const std::size_t k_full = 2 * p + (config.include_intercept ? 1 : 0);
    if (R < k_full + 1) {
        throw ValidationError("fit_svar_ensemble: " + std::to_string(R) +
                              " trials cannot identify " + std::to_string(k_full) +
                              " regressors with positive degrees of freedom");
    }

    const auto pi = static_cast<Eigen::Index>(p);
    const auto n = static_cast<Eigen::Index>(R);

    SvarModel model;
    model.order = p;
    model.intercept = config.include_intercept;
    model.n_trials = R;

    // Shared design: [ch0 lags | ch1 lags | 1]; reduced models select
    // column subsets so the Gram matrix is computed once per time point.
    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(k_full));
    Eigen::VectorXd y0(n), y1(n);
    std::vector<Eigen::Index> full_cols(k_full);
    for (std::size_t j = 0; j < k_full; ++j) full_cols[j] = static_cast<Eigen::Index>(j);
    std::vector<Eigen::Index> red0_cols, red1_cols;
    for (Eigen::Index i = 0; i < pi; ++i) red0_cols.push_back(i);
    for (Eigen::Index i = 0; i < pi; ++i) red1_cols.push_back(pi + i);
    if (config.include_intercept) {
        red0_cols.push_back(2 * pi);
        red1_cols.push_back(2 * pi);
    }

    for (std::size_t t = p; t < T; ++t) {
        for (std::size_t r = 0; r < R; ++r) {
            const auto s0 = epochs.series(r, 0);
            const auto s1 = epochs.series(r, 1);
            const auto row = static_cast<Eigen::Index>(r);
            for (Eigen::Index i = 0; i < pi; ++i) {
                design(row, i) = s0[t - 1 - static_cast<std::size_t>(i)];
                design(row, pi + i) = s1[t - 1 - static_cast<std::size_t>(i)];
            }
            if (config.include_intercept) design(row, 2 * pi) = 1.0;
            y0[row] = s0[t];
            y1[row] = s1[t];
        }
        const Eigen::MatrixXd gram = design.transpose() * design;

        const OlsFit full0 = solve_ols(design, gram, y0, full_cols, config.ridge_epsilon, t);
        const OlsFit full1 = solve_ols(design, gram, y1, full_cols, config.ridge_epsilon, t);
        const OlsFit red0 = solve_ols(design, gram, y0, red0_cols, config.ridge_epsilon, t);
        const OlsFit red1 = solve_ols(design, gram, y1, red1_cols, config.ridge_epsilon, t);

        // Nested least squares: the full fit cannot raise the RSS. Ridge
        // biases both fits, so the guarantee only binds without it.
        if (config.ridge_epsilon == 0.0) {
            const double slack0 = 1e-12 * std::max(1.0, red0.rss);
            const double slack1 = 1e-12 * std::max(1.0, red1.rss);
            if (full0.rss > red0.rss + slack0 || full1.rss > red1.rss + slack1) {
                throw NumericError("fit_svar_ensemble: nested-fit residual ordering violated "
                                   "at t = " + std::to_string(t));
            }
        }

        model.times.push_back(t);
        model.a.push_back(full0.beta.head(pi));
        model.b.push_back(full0.beta.segment(pi, pi));
        model.c.push_back(full1.beta.head(pi));
        model.d.push_back(full1.beta.segment(pi, pi));
        model.intercept1.push_back(config.include_intercept ? full0.beta[2 * pi] : 0.0);
        model.intercept2.push_back(config.include_intercept ? full1.beta[2 * pi] : 0.0);
        model.sigma2_1.push_back(full0.sigma2);
        model.sigma2_2.push_back(full1.sigma2);
        model.sigma2_1_reduced.push_back(red0.sigma2);
        model.sigma2_2_reduced.push_back(red1.sigma2);
        model.rss1_full.push_back(full0.rss);
        model.rss1_reduced.push_back(red0.rss);
        model.rss2_full.push_back(full1.rss);
        model.rss2_reduced.push_back(red1.rss);
        model.se_a.push_back(full0.std_err.head(pi));
        model.se_b.push_back(full0.std_err.segment(pi, pi));
        model.se_c.push_back(full1.std_err.head(pi));
        model.se_d.push_back(full1.std_err.segment(pi, pi));
        model.se_intercept1.push_back(config.include_intercept ? full0.std_err[2 * pi] : 0.0);
        model.se_intercept2.push_back(config.include_intercept ? full1.std_err[2 * pi] : 0.0);
    }
    return model;
}

LaggedMoments compute_lagged_moments(const TimeSeriesEnsemble& epochs, std::size_t order) {
    check_bivariate(epochs);
    if (order < 1) {
        throw ValidationError("compute_lagged_moments: order must be >= 1");
    }
    const std::size_t R = epochs.n_trials();
    const std::size_t T = epochs.n_times();
    if (R < 2) {
        throw ValidationError("compute_lagged_moments: covariance needs at least 2 trials");
    }
    if (T < order + 1) {
        throw ValidationError("compute_lagged_moments: epochs too short for order " +
                              std::to_string(order));
    }

    const auto pi = static_cast<Eigen::Index>(order);
    const auto n = static_cast<Eigen::Index>(R);
    const Eigen::Index dim = 2 * pi;

    LaggedMoments mom;
    mom.order = order;
    mom.n_trials = R;

    Eigen::MatrixXd stacked(n, dim);
    for (std::size_t t = order; t < T; ++t) {
        for (std::size_t r = 0; r < R; ++r) {
            const auto s0 = epochs.series(r, 0);
            const auto s1 = epochs.series(r, 1);
            const auto row = static_cast<Eigen::Index>(r);
            for (Eigen::Index i = 0; i < pi; ++i) {
                stacked(row, i) = s0[t - 1 - static_cast<std::size_t>(i)];
                stacked(row, pi + i) = s1[t - 1 - static_cast<std::size_t>(i)];
            }
        }
        const Eigen::VectorXd mu = stacked.colwise().mean();
        const Eigen::MatrixXd centered = stacked.rowwise() - mu.transpose();
        Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(R - 1);
        cov = ((cov + cov.transpose()) * 0.5).eval();

        const Eigen::MatrixXd cov11 = cov.topLeftCorner(pi, pi);
        const Eigen::MatrixXd cov22 = cov.bottomRightCorner(pi, pi);
        const Eigen::MatrixXd cov12 = cov.topRightCorner(pi, pi);

        bool warn1 = false, warn2 = false;
        const Eigen::MatrixXd inv11 = psd_pseudoinverse(cov11, warn1);
        const Eigen::MatrixXd inv22 = psd_pseudoinverse(cov22, warn2);
        Eigen::MatrixXd cond2 = cov22 - cov12.transpose() * inv11 * cov12;
        Eigen::MatrixXd cond1 = cov11 - cov12 * inv22 * cov12.transpose();
        cond2 = ((cond2 + cond2.transpose()) * 0.5).eval();
        cond1 = ((cond1 + cond1.transpose()) * 0.5).eval();

        mom.times.push_back(t);
        mom.mean.push_back(mu);
        mom.cov.push_back(std::move(cov));
        mom.cov1.push_back(cov11);
        mom.cov2.push_back(cov22);
        mom.cond_cov_2_given_1.push_back(std::move(cond2));
        mom.cond_cov_1_given_2.push_back(std::move(cond1));
        mom.conditioning_warning.push_back(warn1 || warn2);
    }
    return mom;
}

ReferenceStats compute_reference_stats(const TimeSeriesEnsemble& epochs,
                                       std::size_t window_start, std::size_t window_end,
                                       std::size_t order, Direction direction) {
    check_bivariate(epochs);
    if (order < 1) {
        throw ValidationError("compute_reference_stats: order must be >= 1");
    }
    if (window_start >= window_end) {
        throw ValidationError("compute_reference_stats: empty reference window");
    }
    if (window_start < order) {
        throw ValidationError("compute_reference_stats: window start " +
                              std::to_string(window_start) + " leaves no room for " +
                              std::to_string(order) + " lags");
    }
    if (window_end > epochs.time_axis_offset()) {
        throw ValidationError("compute_reference_stats: reference window [" +
                              std::to_string(window_start) + ", " + std::to_string(window_end) +
                              ") must precede the alignment point at " +
                              std::to_string(epochs.time_axis_offset()));
    }

    const std::size_t cause_channel = direction == Direction::ch2_to_ch1 ? 1 : 0;
    const std::size_t R = epochs.n_trials();
    const std::size_t n_times = window_end - window_start;
    const std::size_t N = R * n_times;
    if (N < 2) {
        throw ValidationError("compute_reference_stats: fewer than 2 pooled lag vectors");
    }

    const auto pi = static_cast<Eigen::Index>(order);
    Eigen::MatrixXd pooled(static_cast<Eigen::Index>(N), pi);
    Eigen::Index row = 0;
    for (std::size_t t = window_start; t < window_end; ++t) {
        for (std::size_t r = 0; r < R; ++r, ++row) {
            const auto s = epochs.series(r, cause_channel);
            for (Eigen::Index i = 0; i < pi; ++i) {
                pooled(row, i) = s[t - 1 - static_cast<std::size_t>(i)];
            }
        }
    }

    ReferenceStats ref;
    ref.window_start = window_start;
    ref.window_end = window_end;
    ref.direction = direction;
    ref.n_pooled = N;
    ref.mean = pooled.colwise().mean();
    const Eigen::MatrixXd centered = pooled.rowwise() - ref.mean.transpose();
    ref.cov = centered.transpose() * centered / static_cast<double>(N - 1);
    ref.cov = ((ref.cov + ref.cov.transpose()) * 0.5).eval();
    return ref;
}

}  // namespace tct
