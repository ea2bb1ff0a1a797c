#pragma once

// Shared helpers for the test suites. The numerical oracles here (Simpson
// quadrature, closed-form identities, harmonic sums) are deliberately
// independent of the library code paths they check.

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mixchan/mixture.hpp"

namespace testsup {

// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int intervals) {
    if (intervals % 2 != 0) ++intervals;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) {
        acc += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

// Integration range covering essentially all of a component's mass.
struct Range {
    double lo;
    double hi;
};

inline Range component_range(const mixchan::ComponentParams& params) {
    const mixchan::Moments m = mixchan::moments(params);
    const double sd = std::sqrt(m.variance);
    double lo = m.mean - 50.0 * sd;
    double hi = m.mean + 50.0 * sd;
    if (mixchan::family_of(params) != mixchan::Family::gaussian) {
        lo = std::max(lo, 0.0);
    }
    return Range{lo, hi};
}

// Quadrature of mixture_pdf over the union of the component ranges, with the
// step sized to resolve the narrowest component. The first stretch after the
// lower limit gets a much finer mesh: at the support edge the density's
// higher derivatives can be singular for non-integer shapes, which would
// otherwise cap Simpson's convergence there.
inline double mixture_pdf_quadrature(const mixchan::MixtureModel& model) {
    double lo = 1e300;
    double hi = -1e300;
    double min_sd = 1e300;
    for (const mixchan::Component& c : model.components()) {
        const Range r = component_range(c.params);
        lo = std::min(lo, r.lo);
        hi = std::max(hi, r.hi);
        min_sd = std::min(min_sd, std::sqrt(mixchan::moments(c.params).variance));
    }
    const auto f = [&](double x) { return mixchan::mixture_pdf(model, x); };
    const double split = std::min(lo + min_sd, hi);
    const double head = simpson(f, lo, split, 20000);
    int intervals = static_cast<int>(std::ceil((hi - split) / (min_sd / 40.0)));
    intervals = std::min(std::max(intervals, 2000), 4000000);
    return head + simpson(f, split, hi, intervals);
}

inline double sample_mean(std::span<const double> xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

// Population variance.
inline double sample_variance(std::span<const double> xs) {
    const double mean = sample_mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(xs.size());
}

inline double sample_central_moment(std::span<const double> xs, int order) {
    const double mean = sample_mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += std::pow(x - mean, order);
    return acc / static_cast<double>(xs.size());
}

// H_n = sum_{k=1..n} 1/k.
inline double harmonic(int n) {
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += 1.0 / static_cast<double>(k);
    return acc;
}

// Closed-form P(a, x) for integer a: 1 - e^{-x} sum_{j<a} x^j / j!.
inline double reg_lower_inc_gamma_int_shape(int a, double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int j = 1; j < a; ++j) {
        term *= x / static_cast<double>(j);
        sum += term;
    }
    return 1.0 - std::exp(-x) * sum;
}

// Self-deleting scratch directory for file-based tests.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto ticks = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("mixchan_test_" + std::to_string(ticks) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testsup
