#include "mixchan/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <utility>

#include "mixchan/errors.hpp"
#include "mixchan/special.hpp"

namespace mixchan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sample_support(std::span<const double> samples, Family family, const char* fn) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!in_support(family, samples[i])) {
            throw DomainError(std::string(fn) + ": sample " + std::to_string(i) +
                              " outside the " + family_name(family) + " support");
        }
    }
}

std::vector<double> log_samples(std::span<const double> samples) {
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = std::log(samples[i]);
    }
    return out;
}

// Component log-density compiled to per-sample constants. eval() assumes x
// inside the family support (positive for gamma/weibull); lx = ln x.
struct CompKernel {
    Family family;
    double log_weight;
    double c0;
    double a;
    double b;

    double eval(double x, double lx) const {
        switch (family) {
            case Family::gamma:
                return c0 + a * lx - x * b;  // a = shape-1, b = 1/scale
            case Family::gaussian: {
                const double z = (x - a) * b;  // a = mean, b = 1/stddev
                return c0 - 0.5 * z * z;
            }
            case Family::weibull:
                // a = shape, b = ln(scale)
                return c0 + (a - 1.0) * lx - std::exp(a * (lx - b));
        }
        return -kInf;
    }
};

std::vector<CompKernel> build_kernels(const MixtureModel& model) {
    std::vector<CompKernel> kernels;
    kernels.reserve(model.size());
    for (const Component& c : model.components()) {
        CompKernel k;
        k.family = model.family();
        k.log_weight = std::log(c.weight);
        std::visit([&k](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GammaParams>) {
                k.c0 = -ln_gamma(p.shape) - p.shape * std::log(p.scale);
                k.a = p.shape - 1.0;
                k.b = 1.0 / p.scale;
            } else if constexpr (std::is_same_v<T, GaussianParams>) {
                k.c0 = -std::log(p.stddev) - 0.91893853320467274178032973640562;
                k.a = p.mean;
                k.b = 1.0 / p.stddev;
            } else {
                k.c0 = std::log(p.shape) - p.shape * std::log(p.scale);
                k.a = p.shape;
                k.b = std::log(p.scale);
            }
        }, c.params);
        kernels.push_back(k);
    }
    return kernels;
}

// One pass computing both the responsibilities and the log-likelihood of the
// current model (the row normalizer is the per-sample log density).
double responsibilities_and_loglik(const std::vector<CompKernel>& kernels,
                                   std::span<const double> xs,
                                   std::span<const double> lxs,
                                   ResponsibilityMatrix& resp) {
    const std::size_t m = kernels.size();
    std::vector<double> terms(m);
    double loglik = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double max_term = -kInf;
        for (std::size_t k = 0; k < m; ++k) {
            terms[k] = kernels[k].log_weight + kernels[k].eval(xs[i], lxs[i]);
            max_term = std::max(max_term, terms[k]);
        }
        if (max_term == -kInf) {
            throw ResponsibilityError(
                "every component density underflowed at sample " + std::to_string(i), i);
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            terms[k] = std::exp(terms[k] - max_term);
            sum += terms[k];
        }
        for (std::size_t k = 0; k < m; ++k) {
            resp.at(i, k) = terms[k] / sum;
        }
        loglik += max_term + std::log(sum);
    }
    return loglik;
}

struct WeightedStats {
    double weight_sum;
    double mean;
    double variance;
};

WeightedStats column_stats(std::span<const double> xs, const ResponsibilityMatrix& resp,
                           std::size_t k) {
    double wsum = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        wsum += resp.at(i, k);
        mean += resp.at(i, k) * xs[i];
    }
    if (wsum <= 0.0) {
        return WeightedStats{wsum, 0.0, 0.0};
    }
    mean /= wsum;
    double var = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - mean;
        var += resp.at(i, k) * d * d;
    }
    return WeightedStats{wsum, mean, var / wsum};
}

// Weighted Weibull MLE. Solves the profile equation
//   S1(k)/S0(k) - 1/k - c = 0
// over t_i = ln x_i - max ln x (the shift cancels and keeps exp(k t) <= 1),
// with S_j = sum w e^{k t} t^j and c the weighted mean of t. The left side
// is strictly increasing in k, so Newton with a sign-bracket fallback is
// globally safe. Scale follows as exp(max ln x) (S0/W)^{1/k}.
WeibullParams weibull_weighted_mle(std::span<const double> lxs,
                                   const ResponsibilityMatrix& resp, std::size_t k_col,
                                   double weight_sum) {
    const double t_shift = *std::max_element(lxs.begin(), lxs.end());
    double c = 0.0;
    for (std::size_t i = 0; i < lxs.size(); ++i) {
        c += resp.at(i, k_col) * (lxs[i] - t_shift);
    }
    c /= weight_sum;

    const auto profile = [&](double k) {
        double s0 = 0.0;
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t i = 0; i < lxs.size(); ++i) {
            const double t = lxs[i] - t_shift;
            const double e = resp.at(i, k_col) * std::exp(k * t);
            s0 += e;
            s1 += e * t;
            s2 += e * t * t;
        }
        const double ratio = s1 / s0;
        const double g = ratio - 1.0 / k - c;
        const double gp = (s2 / s0 - ratio * ratio) + 1.0 / (k * k);
        return std::array<double, 3>{g, gp, s0};
    };

    // Moment start: sd(ln X) = pi / (k sqrt(6)).
    double lsd = 0.0;
    for (std::size_t i = 0; i < lxs.size(); ++i) {
        const double d = (lxs[i] - t_shift) - c;
        lsd += resp.at(i, k_col) * d * d;
    }
    lsd = std::sqrt(lsd / weight_sum);
    if (!(lsd > 0.0)) {
        throw CollapseError("weibull m-step: zero log-variance in component " +
                            std::to_string(k_col), k_col);
    }
    double k = 3.141592653589793 / (lsd * std::sqrt(6.0));
    k = std::clamp(k, 1e-3, 1e6);

    double lo = 1e-6;
    double hi = 1e8;
    bool done = false;
    for (int iter = 0; iter < 200 && !done; ++iter) {
        const auto [g, gp, s0] = profile(k);
        (void)s0;
        if (g > 0.0) {
            hi = std::min(hi, k);
        } else {
            lo = std::max(lo, k);
        }
        double next = k - g / gp;
        if (!(next > lo) || !(next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        if (std::fabs(next - k) < 1e-12 * std::max(1.0, k)) {
            k = next;
            done = true;
        } else {
            k = next;
        }
    }
    if (!done) {
        throw ConvergenceError("weibull m-step: shape solve did not converge", k);
    }
    const double s0_final = profile(k)[2];
    const double scale = std::exp(t_shift + std::log(s0_final / weight_sum) / k);
    return WeibullParams{k, scale};
}

struct FitRun {
    MixtureModel model;
    std::vector<double> trace;
    bool converged;
};

FitRun run_em(std::span<const double> xs, std::span<const double> lxs, Family family,
              std::size_t m, InitStrategy strategy, std::uint64_t seed,
              const FitConfig& config, const MStepGuards& guards) {
    MixtureModel model = initialize(xs, family, m, strategy, seed);
    ResponsibilityMatrix resp(xs.size(), m);
    double ll = responsibilities_and_loglik(build_kernels(model), xs, lxs, resp);
    if (!std::isfinite(ll)) {
        throw Error("initial log-likelihood is not finite");
    }
    std::vector<double> trace{ll};
    bool converged = false;

    ResponsibilityMatrix next_resp(xs.size(), m);
    for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
        MixtureModel next = m_step(xs, resp, family, guards);
        const double next_ll =
            responsibilities_and_loglik(build_kernels(next), xs, lxs, next_resp);
        if (!std::isfinite(next_ll)) {
            throw Error("log-likelihood became non-finite");
        }
        if (next_ll < ll) {
            // The moment-matching M-step has stalled at its approximation
            // floor; keep the previous iterate so the trace stays monotone.
            converged = true;
            break;
        }
        model = std::move(next);
        std::swap(resp, next_resp);
        trace.push_back(next_ll);
        if (next_ll - ll <= config.rel_loglik_tol * std::max(1.0, std::fabs(ll))) {
            converged = true;
            break;
        }
        ll = next_ll;
    }
    return FitRun{std::move(model), std::move(trace), converged};
}

}  // namespace

void ResponsibilityMatrix::validate() const {
    for (std::size_t i = 0; i < rows_; ++i) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < cols_; ++k) {
            const double v = at(i, k);
            if (!(v >= 0.0) || !(v <= 1.0)) {
                throw DomainError("responsibility entry outside [0,1] at row " +
                                  std::to_string(i));
            }
            row_sum += v;
        }
        if (std::fabs(row_sum - 1.0) > 1e-9) {
            throw DomainError("responsibility row " + std::to_string(i) +
                              " sums to " + std::to_string(row_sum));
        }
    }
}

const char* init_strategy_name(InitStrategy s) {
    return s == InitStrategy::quantile ? "quantile" : "random-responsibility";
}

InitStrategy init_strategy_from_name(std::string_view name) {
    if (name == "quantile") return InitStrategy::quantile;
    if (name == "random-responsibility") return InitStrategy::random_responsibility;
    throw DomainError("unknown init strategy: " + std::string(name));
}

void FitConfig::validate() const {
    if (max_iterations < 1) throw DomainError("FitConfig: max_iterations must be >= 1");
    if (!(rel_loglik_tol > 0.0)) throw DomainError("FitConfig: rel_loglik_tol must be > 0");
    if (restarts < 1) throw DomainError("FitConfig: restarts must be >= 1");
    if (!(weight_floor > 0.0)) throw DomainError("FitConfig: weight_floor must be > 0");
    if (!(variance_floor > 0.0)) throw DomainError("FitConfig: variance_floor must be > 0");
}

GammaParams gamma_mle(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw DomainError("gamma_mle: need at least two samples");
    }
    check_sample_support(samples, Family::gamma, "gamma_mle");

    double mean = 0.0;
    double mean_log = 0.0;
    for (double x : samples) {
        mean += x;
        mean_log += std::log(x);
    }
    mean /= static_cast<double>(samples.size());
    mean_log /= static_cast<double>(samples.size());

    const double s = std::log(mean) - mean_log;  // >= 0 by Jensen, 0 iff all equal
    if (!(s > 1e-13)) {
        throw DegenerateDataError("gamma_mle: log-moment gap is zero (all samples equal?)");
    }

    // Minka's closed-form start, then Newton on ln(a) - digamma(a) - s = 0.
    double alpha = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        const double lg = std::log(alpha);
        const double dg = digamma(alpha);
        const double f = lg - dg - s;
        // At very large alpha the cancellation noise in f, amplified by
        // 1/f' ~ 2 alpha^2, can exceed any absolute step tolerance; a
        // residual at rounding level is convergence.
        if (std::fabs(f) <=
            8.0 * std::numeric_limits<double>::epsilon() *
                (std::fabs(lg) + std::fabs(dg) + std::fabs(s))) {
            converged = true;
            break;
        }
        const double fp = 1.0 / alpha - trigamma(alpha);
        double next = alpha - f / fp;
        if (!(next > 0.0) || !std::isfinite(next)) {
            next = 0.5 * alpha;
        }
        const double update = std::fabs(next - alpha);
        alpha = next;
        if (update < 1e-10) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("gamma_mle: Newton did not converge", alpha);
    }
    return GammaParams{alpha, mean / alpha};
}

ResponsibilityMatrix e_step(const MixtureModel& model, std::span<const double> samples) {
    check_sample_support(samples, model.family(), "e_step");
    ResponsibilityMatrix resp(samples.size(), model.size());
    const std::vector<double> lxs =
        model.family() == Family::gaussian ? std::vector<double>(samples.size(), 0.0)
                                           : log_samples(samples);
    responsibilities_and_loglik(build_kernels(model), samples, lxs, resp);
    return resp;
}

MixtureModel m_step(std::span<const double> samples, const ResponsibilityMatrix& resp,
                    Family family, const MStepGuards& guards) {
    if (resp.rows() != samples.size()) {
        throw DomainError("m_step: responsibility rows do not match the sample count");
    }
    if (resp.cols() == 0 || samples.empty()) {
        throw DomainError("m_step: empty responsibilities");
    }
    check_sample_support(samples, family, "m_step");

    const double l = static_cast<double>(samples.size());
    std::vector<double> lxs;
    if (family == Family::weibull) {
        lxs = log_samples(samples);
    }

    std::vector<Component> comps;
    comps.reserve(resp.cols());
    for (std::size_t k = 0; k < resp.cols(); ++k) {
        const WeightedStats stats = column_stats(samples, resp, k);
        if (!(stats.weight_sum >= guards.weight_floor * l)) {
            throw CollapseError("m_step: component " + std::to_string(k) +
                                " weight collapsed below the floor", k);
        }
        ComponentParams params = GammaParams{1.0, 1.0};
        switch (family) {
            case Family::gamma:
                if (!(stats.variance > guards.variance_floor_abs)) {
                    throw CollapseError("m_step: component " + std::to_string(k) +
                                        " variance collapsed below the floor", k);
                }
                params = GammaParams{stats.mean * stats.mean / stats.variance,
                                     stats.variance / stats.mean};
                break;
            case Family::gaussian:
                if (!(stats.variance > guards.variance_floor_abs)) {
                    throw CollapseError("m_step: component " + std::to_string(k) +
                                        " variance collapsed below the floor", k);
                }
                params = GaussianParams{stats.mean, std::sqrt(stats.variance)};
                break;
            case Family::weibull:
                if (!(stats.variance > guards.variance_floor_abs)) {
                    throw CollapseError("m_step: component " + std::to_string(k) +
                                        " variance collapsed below the floor", k);
                }
                params = weibull_weighted_mle(lxs, resp, k, stats.weight_sum);
                break;
        }
        comps.push_back(Component{stats.weight_sum / l, params});
    }
    return MixtureModel(std::move(comps));
}

MixtureModel initialize(std::span<const double> samples, Family family, std::size_t m,
                        InitStrategy strategy, std::uint64_t seed) {
    if (m == 0) {
        throw DomainError("initialize: need at least one component");
    }
    if (samples.size() < 10 * m) {
        throw DomainError("initialize: need at least 10*m samples, got " +
                          std::to_string(samples.size()));
    }
    check_sample_support(samples, family, "initialize");

    if (strategy == InitStrategy::quantile) {
        std::vector<double> sorted(samples.begin(), samples.end());
        std::sort(sorted.begin(), sorted.end());
        ResponsibilityMatrix resp(sorted.size(), m);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t begin = k * sorted.size() / m;
            const std::size_t end = (k + 1) * sorted.size() / m;
            for (std::size_t i = begin; i < end; ++i) {
                resp.at(i, k) = 1.0;
            }
        }
        MixtureModel sliced = m_step(sorted, resp, family);
        std::vector<Component> comps = sliced.components();
        for (Component& c : comps) {
            c.weight = 1.0 / static_cast<double>(m);
        }
        return MixtureModel(std::move(comps));
    }

    Rng rng(seed);
    ResponsibilityMatrix resp(samples.size(), m);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            resp.at(i, k) = rng.uniform_pos();
            row_sum += resp.at(i, k);
        }
        for (std::size_t k = 0; k < m; ++k) {
            resp.at(i, k) /= row_sum;
        }
    }
    return m_step(samples, resp, family);
}

FitReport em_fit(std::span<const double> samples, Family family, std::size_t m,
                 const FitConfig& config, unsigned parallelism) {
    config.validate();
    if (m == 0) {
        throw DomainError("em_fit: need at least one component");
    }
    if (samples.size() < 10 * m) {
        throw DomainError("em_fit: need at least 10*m samples, got " +
                          std::to_string(samples.size()));
    }
    check_sample_support(samples, family, "em_fit");

    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
                  static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) {
        var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(samples.size());
    if (!(var > 0.0)) {
        throw DegenerateDataError("em_fit: sample variance is zero");
    }
    const MStepGuards guards{config.weight_floor, config.variance_floor * var};

    const std::vector<double> lxs = family == Family::gaussian
                                        ? std::vector<double>(samples.size(), 0.0)
                                        : log_samples(samples);

    Rng root(config.seed);
    std::vector<std::uint64_t> seeds(config.restarts);
    for (std::uint64_t& s : seeds) {
        s = root.next_u64();
    }

    const auto run_one = [&](std::size_t r) -> std::pair<std::optional<FitRun>, std::string> {
        // Quantile starts are data-deterministic, so only restart 0 uses one;
        // later restarts draw random responsibilities to explore other basins.
        const InitStrategy strategy =
            (r == 0) ? config.init_strategy : InitStrategy::random_responsibility;
        try {
            return {run_em(samples, lxs, family, m, strategy, seeds[r], config, guards),
                    std::string()};
        } catch (const Error& e) {
            return {std::nullopt, e.what()};
        }
    };

    std::vector<std::pair<std::optional<FitRun>, std::string>> outcomes(config.restarts);
    if (parallelism <= 1 || config.restarts == 1) {
        for (std::size_t r = 0; r < config.restarts; ++r) {
            outcomes[r] = run_one(r);
        }
    } else {
        for (std::size_t base = 0; base < config.restarts; base += parallelism) {
            const std::size_t end = std::min<std::size_t>(base + parallelism, config.restarts);
            std::vector<std::future<std::pair<std::optional<FitRun>, std::string>>> futures;
            futures.reserve(end - base);
            for (std::size_t r = base; r < end; ++r) {
                futures.push_back(std::async(std::launch::async, run_one, r));
            }
            for (std::size_t r = base; r < end; ++r) {
                outcomes[r] = futures[r - base].get();
            }
        }
    }

    // Deterministic reduction: best final log-likelihood, ties to the lowest
    // restart index, independent of completion order.
    std::size_t best = config.restarts;
    std::vector<std::string> diagnostics;
    for (std::size_t r = 0; r < config.restarts; ++r) {
        if (!outcomes[r].first.has_value()) {
            diagnostics.push_back("restart " + std::to_string(r) + ": " + outcomes[r].second);
            continue;
        }
        if (best == config.restarts ||
            outcomes[r].first->trace.back() > outcomes[best].first->trace.back()) {
            best = r;
        }
    }
    if (best == config.restarts) {
        std::string what = "em_fit: every restart failed (";
        for (std::size_t i = 0; i < diagnostics.size() && i < 3; ++i) {
            what += (i ? "; " : "") + diagnostics[i];
        }
        if (diagnostics.size() > 3) {
            what += "; ...";
        }
        what += ")";
        throw FitFailedError(what, std::move(diagnostics));
    }

    FitRun& run = *outcomes[best].first;
    for (std::size_t t = 1; t < run.trace.size(); ++t) {
        if (run.trace[t] < run.trace[t - 1] - 1e-9) {
            throw Error("em_fit: log-likelihood trace decreased");
        }
    }
    const std::size_t iterations = run.trace.size() - 1;
    return FitReport{std::move(run.model), std::move(run.trace), run.converged,
                     iterations, best, std::nullopt};
}

double bic(double loglik, std::size_t m, std::size_t n) {
    const double p = 3.0 * static_cast<double>(m) - 1.0;
    return -2.0 * loglik + p * std::log(static_cast<double>(n));
}

SelectionResult select_components(std::span<const double> samples, Family family,
                                  std::size_t m_lo, std::size_t m_hi,
                                  const FitConfig& config, unsigned parallelism) {
    if (m_lo < 1 || m_hi > 8 || m_lo > m_hi) {
        throw DomainError("select_components: component range must lie within [1, 8]");
    }
    SelectionResult result;
    result.best_m = 0;
    double best_bic = kInf;
    for (std::size_t m = m_lo; m <= m_hi; ++m) {
        try {
            FitReport report = em_fit(samples, family, m, config, parallelism);
            const double score = bic(report.final_loglik(), m, samples.size());
            if (score < best_bic) {
                best_bic = score;
                result.best_m = m;
            }
            result.entries.push_back(SelectionEntry{m, score, std::move(report)});
        } catch (const Error& e) {
            result.failures.push_back("m=" + std::to_string(m) + ": " + e.what());
        }
    }
    if (result.entries.empty()) {
        throw FitFailedError("select_components: every component count failed",
                             result.failures);
    }
    return result;
}

}  // namespace mixchan
