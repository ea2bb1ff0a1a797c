#include "mixchan/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mixchan/errors.hpp"

namespace mixchan {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

MixtureModel::MixtureModel(std::vector<Component> components)
    : family_(Family::gamma), components_(std::move(components)) {
    if (components_.empty()) {
        throw DomainError("mixture must have at least one component");
    }
    family_ = family_of(components_.front().params);
    double weight_sum = 0.0;
    for (const Component& c : components_) {
        if (family_of(c.params) != family_) {
            throw DomainError("mixture components must share one family");
        }
        validate(c.params);
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw DomainError("component weight must be positive, got " +
                              std::to_string(c.weight));
        }
        if (components_.size() > 1 && !(c.weight < 1.0)) {
            throw DomainError("component weight must be below 1 in a multi-component mixture");
        }
        weight_sum += c.weight;
    }
    if (std::fabs(weight_sum - 1.0) > 1e-9) {
        throw DomainError("component weights must sum to 1 within 1e-9, got " +
                          std::to_string(weight_sum));
    }
    // Re-normalize only when measurably off, so serialization round-trips
    // reproduce stored weights bit-exactly.
    if (std::fabs(weight_sum - 1.0) > 1e-15) {
        for (Component& c : components_) {
            c.weight /= weight_sum;
        }
    }
    std::stable_sort(components_.begin(), components_.end(),
                     [](const Component& a, const Component& b) {
                         if (a.weight != b.weight) return a.weight > b.weight;
                         return moments(a.params).mean < moments(b.params).mean;
                     });
}

double mixture_pdf(const MixtureModel& model, double x) {
    double acc = 0.0;
    for (const Component& c : model.components()) {
        acc += c.weight * pdf(c.params, x);
    }
    return acc;
}

std::vector<double> mixture_pdf(const MixtureModel& model, std::span<const double> xs) {
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        out.push_back(mixture_pdf(model, x));
    }
    return out;
}

double mixture_log_pdf(const MixtureModel& model, double x) {
    std::vector<double> terms(model.size());
    double max_term = -kInf;
    for (std::size_t k = 0; k < model.size(); ++k) {
        const Component& c = model.components()[k];
        terms[k] = std::log(c.weight) + log_pdf(c.params, x);
        max_term = std::max(max_term, terms[k]);
    }
    if (max_term == -kInf) {
        return -kInf;
    }
    double acc = 0.0;
    for (double t : terms) {
        acc += std::exp(t - max_term);
    }
    return max_term + std::log(acc);
}

double mixture_cdf(const MixtureModel& model, double x) {
    double acc = 0.0;
    for (const Component& c : model.components()) {
        acc += c.weight * cdf(c.params, x);
    }
    return acc > 1.0 ? 1.0 : acc;
}

std::vector<double> mixture_sample(const MixtureModel& model, std::size_t n,
                                   std::uint64_t seed) {
    if (n == 0) {
        throw DomainError("mixture_sample: requested an empty sample");
    }
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double cum = 0.0;
        std::size_t pick = model.size() - 1;
        for (std::size_t k = 0; k < model.size(); ++k) {
            cum += model.components()[k].weight;
            if (u < cum) {
                pick = k;
                break;
            }
        }
        out.push_back(sample_one(model.components()[pick].params, rng));
    }
    return out;
}

Moments mixture_moments(const MixtureModel& model) {
    double mean = 0.0;
    double second = 0.0;
    for (const Component& c : model.components()) {
        const Moments m = moments(c.params);
        mean += c.weight * m.mean;
        second += c.weight * (m.variance + m.mean * m.mean);
    }
    return Moments{mean, second - mean * mean};
}

double log_likelihood(const MixtureModel& model, std::span<const double> samples) {
    double acc = 0.0;
    for (double x : samples) {
        acc += mixture_log_pdf(model, x);
    }
    return acc;
}

}  // namespace mixchan
