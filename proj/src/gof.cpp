#include "mixchan/gof.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixchan/errors.hpp"

namespace mixchan {

namespace {

// Linear-interpolation quantile of an already sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    edges.front() = lo;
    edges.back() = hi;
    return edges;
}

void fill_counts(Histogram& hist, std::span<const double> samples) {
    hist.counts.assign(hist.edges.size() - 1, 0);
    const double lo = hist.edges.front();
    const double hi = hist.edges.back();
    for (double x : samples) {
        if (x < lo || x > hi) {
            continue;
        }
        std::size_t idx;
        if (x == hi) {
            idx = hist.counts.size() - 1;  // rightmost edge inclusive
        } else {
            const auto it = std::upper_bound(hist.edges.begin(), hist.edges.end(), x);
            idx = static_cast<std::size_t>(it - hist.edges.begin()) - 1;
        }
        ++hist.counts[idx];
    }
}

}  // namespace

std::size_t Histogram::total_count() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::vector<double> Histogram::counts_as_double() const {
    return std::vector<double>(counts.begin(), counts.end());
}

std::string Binning::describe() const {
    switch (kind_) {
        case Kind::freedman_diaconis: return "freedman-diaconis";
        case Kind::fixed: return "fixed(" + std::to_string(bins_) + ")";
        case Kind::edges: return "edges(" + std::to_string(edges_.size() - 1) + ")";
    }
    return "unknown";
}

Histogram build_histogram(std::span<const double> samples, const Binning& binning) {
    if (samples.size() < 2) {
        throw DomainError("build_histogram: need at least two samples");
    }
    for (double x : samples) {
        if (!std::isfinite(x)) {
            throw DomainError("build_histogram: samples must be finite");
        }
    }

    Histogram hist;

    if (binning.kind() == Binning::Kind::edges) {
        hist.edges = binning.edges();
        if (hist.edges.size() < 2) {
            throw DomainError("build_histogram: need at least two edges");
        }
        for (std::size_t i = 1; i < hist.edges.size(); ++i) {
            if (!(hist.edges[i] > hist.edges[i - 1])) {
                throw DomainError("build_histogram: edges must be strictly increasing");
            }
        }
        fill_counts(hist, samples);
        return hist;
    }

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    double lo = sorted.front();
    double hi = sorted.back();
    if (lo == hi) {
        // Degenerate range; pad so the edges stay strictly increasing.
        lo -= 0.5;
        hi += 0.5;
    }

    std::size_t bins = 0;
    if (binning.kind() == Binning::Kind::fixed) {
        bins = binning.bins();
        if (bins < 2) {
            throw DomainError("build_histogram: fixed binning needs at least two bins");
        }
    } else {
        const double n = static_cast<double>(sorted.size());
        const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
        const double width = 2.0 * iqr * std::pow(n, -1.0 / 3.0);
        if (width <= 0.0) {
            bins = static_cast<std::size_t>(std::ceil(std::sqrt(n)));
            hist.fd_fallback = true;
        } else {
            bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
        }
        // Extreme outliers can drive the rule toward absurd bin counts.
        bins = std::clamp<std::size_t>(bins, 2, 1000000);
    }

    hist.edges = uniform_edges(lo, hi, bins);
    fill_counts(hist, samples);
    return hist;
}

std::vector<double> expected_counts(const MixtureModel& model, const Histogram& hist,
                                    std::size_t n) {
    std::vector<double> out(hist.bin_count());
    double cdf_lo = mixture_cdf(model, hist.edges.front());
    for (std::size_t b = 0; b < out.size(); ++b) {
        const double cdf_hi = mixture_cdf(model, hist.edges[b + 1]);
        out[b] = static_cast<double>(n) * std::max(0.0, cdf_hi - cdf_lo);
        cdf_lo = cdf_hi;
    }
    return out;
}

double wmrd(std::span<const double> actual, std::span<const double> expected) {
    if (actual.size() != expected.size()) {
        throw DomainError("wmrd: vectors must have equal length");
    }
    double num = 0.0;
    double denom = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        num += std::fabs(actual[i] - expected[i]);
        denom += 0.5 * (actual[i] + expected[i]);
    }
    if (denom == 0.0) {
        throw DomainError("wmrd: both vectors are all zero");
    }
    return num / denom;
}

double wmrd(const Histogram& actual, std::span<const double> expected) {
    const std::vector<double> counts = actual.counts_as_double();
    return wmrd(std::span<const double>(counts), expected);
}

double kl_divergence(std::span<const double> actual, std::span<const double> estimated,
                     double smoothing_eps) {
    if (actual.size() != estimated.size()) {
        throw DomainError("kl_divergence: vectors must have equal length");
    }
    if (actual.empty()) {
        throw DomainError("kl_divergence: vectors must be non-empty");
    }
    if (smoothing_eps < 0.0) {
        throw DomainError("kl_divergence: smoothing_eps must be non-negative");
    }
    double p_sum = 0.0;
    double q_sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] < 0.0 || estimated[i] < 0.0) {
            throw DomainError("kl_divergence: probabilities must be non-negative");
        }
        p_sum += actual[i] + smoothing_eps;
        q_sum += estimated[i] + smoothing_eps;
    }
    if (p_sum <= 0.0 || q_sum <= 0.0) {
        throw DomainError("kl_divergence: vectors must have positive mass");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double p = (actual[i] + smoothing_eps) / p_sum;
        const double q = (estimated[i] + smoothing_eps) / q_sum;
        if (p > 0.0) {
            kl += p * std::log(p / q);
        }
    }
    return kl < 0.0 ? 0.0 : kl;
}

double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf) {
    if (samples.empty()) {
        throw DomainError("ks_statistic: empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double upper = static_cast<double>(i + 1) / n - f;
        const double lower = f - static_cast<double>(i) / n;
        d = std::max(d, std::max(upper, lower));
    }
    return d;
}

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                 double significance) {
    if (samples.size() < 5) {
        throw DomainError("ks_test: need at least five samples");
    }
    if (!(significance > 0.0) || !(significance < 1.0)) {
        throw DomainError("ks_test: significance must lie in (0, 1)");
    }
    const double d = ks_statistic(samples, cdf);
    const double c = std::sqrt(-0.5 * std::log(significance / 2.0));
    const double critical = c / std::sqrt(static_cast<double>(samples.size()));
    return KsResult{d, critical, d < critical};
}

KsResult ks_test(std::span<const double> samples, const MixtureModel& model,
                 double significance) {
    return ks_test(samples, [&model](double x) { return mixture_cdf(model, x); },
                   significance);
}

MetricReport evaluate_fit(const MixtureModel& model, std::span<const double> samples,
                          const Binning& binning, double significance) {
    const Histogram hist = build_histogram(samples, binning);
    const std::vector<double> expected = expected_counts(model, hist, samples.size());
    const std::vector<double> counts = hist.counts_as_double();

    const double count_total = static_cast<double>(hist.total_count());
    const double expected_total = std::accumulate(expected.begin(), expected.end(), 0.0);
    std::vector<double> p_act(counts.size());
    std::vector<double> p_est(expected.size());
    for (std::size_t b = 0; b < counts.size(); ++b) {
        p_act[b] = counts[b] / count_total;
        p_est[b] = expected_total > 0.0 ? expected[b] / expected_total : 0.0;
    }

    MetricReport report;
    report.wmrd = wmrd(std::span<const double>(counts), std::span<const double>(expected));
    report.kl_divergence = kl_divergence(p_act, p_est);
    const KsResult ks = ks_test(samples, model, significance);
    report.ks_statistic = ks.statistic;
    report.ks_critical = ks.critical;
    report.ks_passed = ks.passed;
    report.bin_count = hist.bin_count();
    return report;
}

}  // namespace mixchan
