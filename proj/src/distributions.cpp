#include "mixchan/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mixchan/errors.hpp"
#include "mixchan/special.hpp"

namespace mixchan {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_positive_finite(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be positive and finite, got " +
                          std::to_string(v));
    }
}

double draw_normal_std(Rng& rng) {
    // Box-Muller; consumes two uniforms per variate, no cached state.
    const double u1 = rng.uniform_pos();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

// Marsaglia-Tsang squeeze method, valid for shape >= 1; shapes below 1 are
// boosted with the U^{1/shape} transform.
double draw_gamma_std(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double u = rng.uniform_pos();
        return draw_gamma_std(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = draw_normal_std(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

}  // namespace

const char* family_name(Family f) {
    switch (f) {
        case Family::gamma: return "gamma";
        case Family::gaussian: return "gaussian";
        case Family::weibull: return "weibull";
    }
    throw DomainError("family_name: unknown family tag");
}

Family family_from_name(std::string_view name) {
    if (name == "gamma") return Family::gamma;
    if (name == "gaussian") return Family::gaussian;
    if (name == "weibull") return Family::weibull;
    throw DomainError("unknown family name: " + std::string(name));
}

Family family_of(const ComponentParams& params) {
    return static_cast<Family>(params.index());
}

double param1(const ComponentParams& params) {
    return std::visit([](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, GaussianParams>) {
            return p.mean;
        } else {
            return p.shape;
        }
    }, params);
}

double param2(const ComponentParams& params) {
    return std::visit([](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, GaussianParams>) {
            return p.stddev;
        } else {
            return p.scale;
        }
    }, params);
}

ComponentParams make_params(Family family, double p1, double p2) {
    switch (family) {
        case Family::gamma: return GammaParams{p1, p2};
        case Family::gaussian: return GaussianParams{p1, p2};
        case Family::weibull: return WeibullParams{p1, p2};
    }
    throw DomainError("make_params: unknown family tag");
}

void validate(const ComponentParams& params) {
    std::visit([](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GammaParams>) {
            check_positive_finite(p.shape, "gamma shape");
            check_positive_finite(p.scale, "gamma scale");
        } else if constexpr (std::is_same_v<T, GaussianParams>) {
            if (!std::isfinite(p.mean)) {
                throw DomainError("gaussian mean must be finite");
            }
            check_positive_finite(p.stddev, "gaussian stddev");
        } else {
            check_positive_finite(p.shape, "weibull shape");
            check_positive_finite(p.scale, "weibull scale");
        }
    }, params);
}

bool in_support(Family family, double x) {
    if (!std::isfinite(x)) return false;
    return family == Family::gaussian || x > 0.0;
}

double log_pdf(const ComponentParams& params, double x) {
    validate(params);
    return std::visit([x](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GammaParams>) {
            if (!(x > 0.0)) return -kInf;
            return (p.shape - 1.0) * std::log(x) - x / p.scale -
                   ln_gamma(p.shape) - p.shape * std::log(p.scale);
        } else if constexpr (std::is_same_v<T, GaussianParams>) {
            const double z = (x - p.mean) / p.stddev;
            return -0.5 * z * z - std::log(p.stddev) - kLogSqrt2Pi;
        } else {
            if (!(x > 0.0)) return -kInf;
            const double t = x / p.scale;
            return std::log(p.shape / p.scale) + (p.shape - 1.0) * std::log(t) -
                   std::pow(t, p.shape);
        }
    }, params);
}

double pdf(const ComponentParams& params, double x) {
    const double lp = log_pdf(params, x);
    return lp == -kInf ? 0.0 : std::exp(lp);
}

double cdf(const ComponentParams& params, double x) {
    validate(params);
    return std::visit([x](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GammaParams>) {
            if (!(x > 0.0)) return 0.0;
            return reg_lower_inc_gamma(p.shape, x / p.scale);
        } else if constexpr (std::is_same_v<T, GaussianParams>) {
            return 0.5 * std::erfc(-(x - p.mean) / (p.stddev * std::sqrt(2.0)));
        } else {
            if (!(x > 0.0)) return 0.0;
            return -std::expm1(-std::pow(x / p.scale, p.shape));
        }
    }, params);
}

double sample_one(const ComponentParams& params, Rng& rng) {
    return std::visit([&rng](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GammaParams>) {
            return p.scale * draw_gamma_std(rng, p.shape);
        } else if constexpr (std::is_same_v<T, GaussianParams>) {
            return p.mean + p.stddev * draw_normal_std(rng);
        } else {
            double v;
            do {
                v = p.scale * std::pow(-std::log(rng.uniform_pos()), 1.0 / p.shape);
            } while (!(v > 0.0));
            return v;
        }
    }, params);
}

std::vector<double> sample(const ComponentParams& params, std::size_t n, std::uint64_t seed) {
    validate(params);
    if (n == 0) {
        throw DomainError("sample: requested an empty sample");
    }
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(sample_one(params, rng));
    }
    return out;
}

Moments moments(const ComponentParams& params) {
    validate(params);
    return std::visit([](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, GammaParams>) {
            return Moments{p.shape * p.scale, p.shape * p.scale * p.scale};
        } else if constexpr (std::is_same_v<T, GaussianParams>) {
            return Moments{p.mean, p.stddev * p.stddev};
        } else {
            const double g1 = std::exp(ln_gamma(1.0 + 1.0 / p.shape));
            const double g2 = std::exp(ln_gamma(1.0 + 2.0 / p.shape));
            return Moments{p.scale * g1, p.scale * p.scale * (g2 - g1 * g1)};
        }
    }, params);
}

}  // namespace mixchan
