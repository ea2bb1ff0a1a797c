#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mixchan/mixture.hpp"

namespace mixchan {

/// Binned received-power samples. Interior bins are half-open [e_b, e_{b+1});
/// the rightmost edge is inclusive. Samples outside [edges.front(),
/// edges.back()] are not counted.
struct Histogram {
    std::vector<double> edges;        // length B+1, strictly increasing
    std::vector<std::size_t> counts;  // length B
    bool fd_fallback = false;  // Freedman-Diaconis degenerated to fixed(ceil(sqrt(n)))

    std::size_t bin_count() const noexcept { return counts.size(); }
    std::size_t total_count() const noexcept;
    std::vector<double> counts_as_double() const;
};

/// Binning rule for build_histogram.
class Binning {
public:
    enum class Kind { freedman_diaconis, fixed, edges };

    static Binning freedman_diaconis() { return Binning(Kind::freedman_diaconis, 0, {}); }
    static Binning fixed(std::size_t bins) { return Binning(Kind::fixed, bins, {}); }
    static Binning explicit_edges(std::vector<double> edges) {
        return Binning(Kind::edges, 0, std::move(edges));
    }

    Kind kind() const noexcept { return kind_; }
    std::size_t bins() const noexcept { return bins_; }
    const std::vector<double>& edges() const noexcept { return edges_; }
    std::string describe() const;

private:
    Binning(Kind kind, std::size_t bins, std::vector<double> edges)
        : kind_(kind), bins_(bins), edges_(std::move(edges)) {}

    Kind kind_;
    std::size_t bins_;
    std::vector<double> edges_;
};

/// Freedman-Diaconis width h = 2 IQR n^{-1/3} (at least two bins); fixed(B)
/// spans [min, max] evenly; zero IQR falls back to fixed(ceil(sqrt(n))) with
/// fd_fallback set.
Histogram build_histogram(std::span<const double> samples, const Binning& binning);

/// Per bin: n * (cdf(upper edge) - cdf(lower edge)).
std::vector<double> expected_counts(const MixtureModel& model, const Histogram& hist,
                                    std::size_t n);

/// Weighted mean relative difference sum|y - yhat| / (0.5 sum(y + yhat)), in [0, 2].
double wmrd(std::span<const double> actual, std::span<const double> expected);
double wmrd(const Histogram& actual, std::span<const double> expected);

/// KL divergence sum p ln(p/q) in nats between two probability vectors.
/// Both vectors are smoothed by smoothing_eps and re-normalized first;
/// zero-actual bins contribute nothing.
double kl_divergence(std::span<const double> actual, std::span<const double> estimated,
                     double smoothing_eps = 1e-12);

struct KsResult {
    double statistic;
    double critical;
    bool passed;
};

/// Supremum distance D = max_i max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n)
/// between the empirical CDF and F. Defined for any non-empty sample.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);

/// One-sample Kolmogorov-Smirnov test against an arbitrary CDF, with the
/// asymptotic critical value c(alpha)/sqrt(n), c(alpha) = sqrt(-ln(alpha/2)/2).
/// The test decision needs at least five samples.
KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                 double significance);
KsResult ks_test(std::span<const double> samples, const MixtureModel& model,
                 double significance = 0.05);

struct MetricReport {
    double wmrd = 0.0;
    double kl_divergence = 0.0;  // nats
    double ks_statistic = 0.0;
    double ks_critical = 0.0;
    bool ks_passed = false;
    std::size_t bin_count = 0;
};

/// Shared evaluation pipeline: histogram the samples, derive model-implied
/// expected counts on the same bins, and compute WMRD, KL (on the normalized
/// vectors) and the KS test.
MetricReport evaluate_fit(const MixtureModel& model, std::span<const double> samples,
                          const Binning& binning, double significance = 0.05);

}  // namespace mixchan
