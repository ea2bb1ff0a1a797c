#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixchan/gof.hpp"
#include "mixchan/mixture.hpp"

namespace mixchan {

/// Per-sample, per-component membership coefficients. Row i holds the
/// posterior probabilities that sample i came from each component; every
/// row sums to 1.
class ResponsibilityMatrix {
public:
    ResponsibilityMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& at(std::size_t i, std::size_t k) { return values_[i * cols_ + k]; }
    double at(std::size_t i, std::size_t k) const { return values_[i * cols_ + k]; }

    /// Throws DomainError unless every entry is in [0,1] and every row sums
    /// to 1 within 1e-9.
    void validate() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

enum class InitStrategy { quantile, random_responsibility };

const char* init_strategy_name(InitStrategy s);
InitStrategy init_strategy_from_name(std::string_view name);

struct FitConfig {
    std::size_t max_iterations = 500;
    double rel_loglik_tol = 1e-8;
    std::size_t restarts = 8;
    std::uint64_t seed = 1;
    InitStrategy init_strategy = InitStrategy::quantile;
    double weight_floor = 1e-6;     // minimum mean responsibility per component
    double variance_floor = 1e-12;  // fraction of the sample variance

    void validate() const;  // throws DomainError
};

struct FitReport {
    MixtureModel model;
    std::vector<double> loglik_trace;  // initial value plus one entry per iteration
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t restart_index = 0;
    std::optional<MetricReport> metrics;  // filled by the evaluation pipeline

    double final_loglik() const { return loglik_trace.back(); }
};

/// Single-Gamma maximum likelihood fit. Solves ln(a) - digamma(a) = s with
/// Newton-Raphson from the Minka starting point, s being the log-moment gap
/// ln(mean) - mean(ln x); the scale follows as mean / a.
GammaParams gamma_mle(std::span<const double> samples);

/// E-step: membership coefficients from the current model, computed in log
/// space with per-row max subtraction.
ResponsibilityMatrix e_step(const MixtureModel& model, std::span<const double> samples);

struct MStepGuards {
    double weight_floor = 1e-6;      // minimum column mean of responsibilities
    double variance_floor_abs = 0.0; // absolute variance floor (0 = disabled)
};

/// M-step: weights from responsibility column means; Gamma and Gaussian
/// parameters from responsibility-weighted mean and variance (for Gamma by
/// inverting mean = a*b, variance = a*b^2); Weibull from the weighted
/// profile-likelihood equation solved by guarded Newton.
MixtureModel m_step(std::span<const double> samples, const ResponsibilityMatrix& resp,
                    Family family, const MStepGuards& guards = {});

/// Deterministic starting model. quantile: equal-count slices of the sorted
/// samples, each moment-fitted, weights 1/m. random_responsibility: a random
/// stochastic matrix pushed through one M-step.
MixtureModel initialize(std::span<const double> samples, Family family, std::size_t m,
                        InitStrategy strategy, std::uint64_t seed);

/// Full EM fit with restarts. Restart seeds derive deterministically from
/// config.seed; when the configured strategy is quantile, restart 0 uses it
/// and later restarts fall back to random responsibilities so they actually
/// differ. Collapsed restarts are abandoned; the best surviving run by
/// (log-likelihood, restart index) is returned. parallelism > 1 runs that
/// many restarts concurrently with identical results.
FitReport em_fit(std::span<const double> samples, Family family, std::size_t m,
                 const FitConfig& config, unsigned parallelism = 1);

/// Bayesian information criterion -2 lnL + p ln n with p = 3m - 1.
double bic(double loglik, std::size_t m, std::size_t n);

struct SelectionEntry {
    std::size_t m;
    double bic;
    FitReport report;
};

struct SelectionResult {
    std::size_t best_m;
    std::vector<SelectionEntry> entries;   // successful fits, ascending m
    std::vector<std::string> failures;     // "m=3: <reason>" for fits that failed
};

/// Fits every component count in [m_lo, m_hi] (within [1, 8]) and picks the
/// BIC minimizer. Individual failures are recorded; throws FitFailedError
/// only when every m fails.
SelectionResult select_components(std::span<const double> samples, Family family,
                                  std::size_t m_lo, std::size_t m_hi,
                                  const FitConfig& config, unsigned parallelism = 1);

}  // namespace mixchan
