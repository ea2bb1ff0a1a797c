#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "mixchan/rng.hpp"

namespace mixchan {

enum class Family { gamma, gaussian, weibull };

const char* family_name(Family f);
Family family_from_name(std::string_view name);  // throws DomainError on unknown names

/// Gamma(shape alpha, scale beta), support (0, inf).
struct GammaParams {
    double shape;
    double scale;
};

/// Normal(mean mu, standard deviation sigma), support R.
struct GaussianParams {
    double mean;
    double stddev;
};

/// Weibull(shape k, scale lambda), support (0, inf).
struct WeibullParams {
    double shape;
    double scale;
};

/// Family-tagged parameter set of one mixture component.
using ComponentParams = std::variant<GammaParams, GaussianParams, WeibullParams>;

Family family_of(const ComponentParams& params);

/// First/second parameter in the family's conventional order
/// (shape/scale for gamma and weibull, mean/stddev for gaussian).
double param1(const ComponentParams& params);
double param2(const ComponentParams& params);
ComponentParams make_params(Family family, double p1, double p2);

/// Throws DomainError unless the parameters satisfy the family invariants
/// (both finite; shape/scale/stddev strictly positive).
void validate(const ComponentParams& params);

/// True when x lies in the family's support. Gamma and Weibull use the open
/// interval (0, inf): the density at x = 0 is defined as 0 even for shapes
/// below 1 where the limit diverges.
bool in_support(Family family, double x);

double pdf(const ComponentParams& params, double x);
double log_pdf(const ComponentParams& params, double x);  // -inf outside the support
double cdf(const ComponentParams& params, double x);

/// One variate drawn from an existing stream.
double sample_one(const ComponentParams& params, Rng& rng);

/// n variates, bit-identical for a fixed seed. Throws DomainError for n = 0.
std::vector<double> sample(const ComponentParams& params, std::size_t n, std::uint64_t seed);

struct Moments {
    double mean;
    double variance;
};

Moments moments(const ComponentParams& params);

}  // namespace mixchan
