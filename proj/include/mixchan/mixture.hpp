#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mixchan/distributions.hpp"

namespace mixchan {

/// One weighted mixture component.
struct Component {
    double weight;
    ComponentParams params;
};

/// A finite mixture of same-family components. Immutable after construction.
///
/// Construction validates every invariant: at least one component, a single
/// shared family, valid per-family parameters, weights positive and summing
/// to 1 within 1e-9 (re-normalized exactly when off by more than 1e-15).
/// Components are stored in canonical order: descending weight, ties broken
/// by ascending component mean, so fitted models compare across runs.
class MixtureModel {
public:
    explicit MixtureModel(std::vector<Component> components);

    Family family() const noexcept { return family_; }
    const std::vector<Component>& components() const noexcept { return components_; }
    std::size_t size() const noexcept { return components_.size(); }

private:
    Family family_;
    std::vector<Component> components_;
};

double mixture_pdf(const MixtureModel& model, double x);
std::vector<double> mixture_pdf(const MixtureModel& model, std::span<const double> xs);

/// log of mixture_pdf, evaluated stably via log-sum-exp.
double mixture_log_pdf(const MixtureModel& model, double x);

double mixture_cdf(const MixtureModel& model, double x);

/// Categorical draw over the weights, then a component draw; deterministic per seed.
std::vector<double> mixture_sample(const MixtureModel& model, std::size_t n, std::uint64_t seed);

Moments mixture_moments(const MixtureModel& model);

/// Sum of mixture_log_pdf over the samples.
double log_likelihood(const MixtureModel& model, std::span<const double> samples);

}  // namespace mixchan
