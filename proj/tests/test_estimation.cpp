#include "mixchan/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mixchan/errors.hpp"
#include "support.hpp"

using namespace mixchan;

namespace {

// Well-separated synthetic truth used across the EM tests.
MixtureModel separated_pair() {
    return MixtureModel({
        Component{0.5, GammaParams{2.0, 1.0}},    // mean 2
        Component{0.5, GammaParams{50.0, 0.1}},   // mean 5
    });
}

// Best pairwise alignment for a two-component fit against the truth
// (equal true weights make weight order arbitrary).
struct Aligned {
    Component fitted[2];
    Component truth[2];
};

Aligned align_two(const MixtureModel& fitted, const MixtureModel& truth) {
    const auto& f = fitted.components();
    const auto& t = truth.components();
    const auto cost = [](const Component& a, const Component& b) {
        return std::fabs(moments(a.params).mean - moments(b.params).mean);
    };
    if (cost(f[0], t[0]) + cost(f[1], t[1]) <= cost(f[0], t[1]) + cost(f[1], t[0])) {
        return Aligned{{f[0], f[1]}, {t[0], t[1]}};
    }
    return Aligned{{f[0], f[1]}, {t[1], t[0]}};
}

FitConfig quick_config(std::uint64_t seed, std::size_t restarts = 2) {
    FitConfig config;
    config.seed = seed;
    config.restarts = restarts;
    config.max_iterations = 300;
    return config;
}

}  // namespace

TEST_SUITE("estimation") {

TEST_CASE("gamma_mle recovers the generating parameters") {
    const auto xs = sample(GammaParams{1.0, 1.0}, 100000, 3001);
    const GammaParams fit = gamma_mle(xs);
    CHECK(fit.shape > 0.97);
    CHECK(fit.shape < 1.03);

    // Single-gamma parameters fitted to the 20 cm sweep, used as truth here.
    const auto ys = sample(GammaParams{30.084, 0.227}, 4096, 3002);
    const GammaParams fit2 = gamma_mle(ys);
    CHECK(fit2.shape == doctest::Approx(30.084).epsilon(0.05));
    CHECK(fit2.scale == doctest::Approx(0.227).epsilon(0.05));
}

TEST_CASE("gamma_mle beats the moment-matched start point in likelihood") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const auto xs = sample(GammaParams{3.7, 0.4}, 400, seed);
        const GammaParams mle = gamma_mle(xs);
        const double mean = testsup::sample_mean(xs);
        const double var = testsup::sample_variance(xs);
        const GammaParams moment{mean * mean / var, var / mean};
        const MixtureModel mle_model({Component{1.0, mle}});
        const MixtureModel mom_model({Component{1.0, moment}});
        CHECK(log_likelihood(mle_model, xs) >= log_likelihood(mom_model, xs) - 1e-9);
    }
}

TEST_CASE("gamma_mle stays solvable for nearly-degenerate data") {
    // Relative spread 1e-5 drives the shape estimate toward 1e10; the solve
    // must still terminate with the scale matching mean/shape.
    Rng rng(99);
    std::vector<double> xs(500);
    for (double& x : xs) x = 1000.0 * (1.0 + 1e-5 * rng.uniform());
    const GammaParams fit = gamma_mle(xs);
    CHECK(fit.shape > 1e8);
    CHECK(std::isfinite(fit.scale));
    CHECK(fit.shape * fit.scale == doctest::Approx(testsup::sample_mean(xs)).epsilon(1e-12));
}

TEST_CASE("gamma_mle error paths") {
    const std::vector<double> constant(50, 3.0);
    CHECK_THROWS_AS(gamma_mle(constant), DegenerateDataError);
    const std::vector<double> with_negative = {1.0, 2.0, -0.5, 3.0};
    CHECK_THROWS_AS(gamma_mle(with_negative), DomainError);
    const std::vector<double> one = {1.0};
    CHECK_THROWS_AS(gamma_mle(one), DomainError);
}

TEST_CASE("e_step: single component gives unit responsibilities") {
    const MixtureModel model({Component{1.0, GammaParams{2.0, 1.0}}});
    const std::vector<double> xs = {0.5, 1.0, 4.0};
    const ResponsibilityMatrix resp = e_step(model, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(resp.at(i, 0) == 1.0);
    }
}

TEST_CASE("e_step: identical components split by the prior weights") {
    const ComponentParams shared = GammaParams{2.0, 1.0};
    const MixtureModel model({Component{0.7, shared}, Component{0.3, shared}});
    const std::vector<double> xs = {0.4, 2.0, 6.0};
    const ResponsibilityMatrix resp = e_step(model, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(resp.at(i, 0) == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(resp.at(i, 1) == doctest::Approx(0.3).epsilon(1e-12));
    }
}

TEST_CASE("e_step hand value: exponential vs gamma(2) at x = 2") {
    // pdfs are e^-2 and 2 e^-2, so the row is (1/3, 2/3).
    const MixtureModel model({
        Component{0.5, GammaParams{1.0, 1.0}},
        Component{0.5, GammaParams{2.0, 1.0}},
    });
    const std::vector<double> xs = {2.0};
    const ResponsibilityMatrix resp = e_step(model, xs);
    CHECK(resp.at(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(resp.at(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("e_step rows are stochastic for random models and data") {
    const MixtureModel model = separated_pair();
    const auto xs = mixture_sample(model, 500, 91);
    const ResponsibilityMatrix resp = e_step(model, xs);
    CHECK_NOTHROW(resp.validate());
}

TEST_CASE("e_step rejects samples outside the family support") {
    const MixtureModel model({Component{1.0, GammaParams{2.0, 1.0}}});
    const std::vector<double> xs = {1.0, -1.0};
    CHECK_THROWS_AS(e_step(model, xs), DomainError);
}

TEST_CASE("e_step reports the sample index when every density underflows") {
    // x/scale overflows for the second sample, so both component densities
    // vanish there.
    const MixtureModel model({
        Component{0.5, GammaParams{2.0, 0.5}},
        Component{0.5, GammaParams{3.0, 0.25}},
    });
    const std::vector<double> xs = {1.0, 1e308};
    try {
        e_step(model, xs);
        FAIL("expected ResponsibilityError");
    } catch (const ResponsibilityError& e) {
        CHECK(e.sample_index() == 1);
    }
}

TEST_CASE("m_step with uniform responsibilities reproduces the full-data moment fit") {
    const auto xs = sample(GammaParams{4.0, 0.7}, 300, 5);
    const double mean = testsup::sample_mean(xs);
    const double var = testsup::sample_variance(xs);
    ResponsibilityMatrix resp(xs.size(), 3);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            resp.at(i, k) = 1.0 / 3.0;
        }
    }
    const MixtureModel model = m_step(xs, resp, Family::gamma);
    for (const Component& c : model.components()) {
        CHECK(c.weight == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(param1(c.params) == doctest::Approx(mean * mean / var).epsilon(1e-9));
        CHECK(param2(c.params) == doctest::Approx(var / mean).epsilon(1e-9));
    }
}

TEST_CASE("m_step hand value: {2,4} with unit responsibilities") {
    const std::vector<double> xs = {2.0, 4.0};
    ResponsibilityMatrix resp(2, 1);
    resp.at(0, 0) = 1.0;
    resp.at(1, 0) = 1.0;
    const MixtureModel model = m_step(xs, resp, Family::gamma);
    // E = 3, V = 1  ->  shape 9, scale 1/3
    CHECK(param1(model.components()[0].params) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(param2(model.components()[0].params) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("m_step gaussian and weibull updates match their estimators") {
    const auto xs = sample(GaussianParams{5.0, 2.0}, 4000, 6);
    ResponsibilityMatrix resp(xs.size(), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) resp.at(i, 0) = 1.0;
    const MixtureModel g = m_step(xs, resp, Family::gaussian);
    CHECK(param1(g.components()[0].params) ==
          doctest::Approx(testsup::sample_mean(xs)).epsilon(1e-12));
    CHECK(param2(g.components()[0].params) ==
          doctest::Approx(std::sqrt(testsup::sample_variance(xs))).epsilon(1e-12));

    const auto ws = sample(WeibullParams{2.5, 1.7}, 20000, 7);
    ResponsibilityMatrix wresp(ws.size(), 1);
    for (std::size_t i = 0; i < ws.size(); ++i) wresp.at(i, 0) = 1.0;
    const MixtureModel w = m_step(ws, wresp, Family::weibull);
    CHECK(param1(w.components()[0].params) == doctest::Approx(2.5).epsilon(0.05));
    CHECK(param2(w.components()[0].params) == doctest::Approx(1.7).epsilon(0.05));
}

TEST_CASE("m_step collapse and validation errors") {
    const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    ResponsibilityMatrix resp(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        resp.at(i, 0) = 1.0;
        resp.at(i, 1) = 0.0;  // dead column
    }
    CHECK_THROWS_AS(m_step(xs, resp, Family::gamma), CollapseError);

    ResponsibilityMatrix wrong(3, 2);
    CHECK_THROWS_AS(m_step(xs, wrong, Family::gamma), DomainError);

    // Variance floor: both samples in a component equal.
    const std::vector<double> flat = {2.0, 2.0, 5.0};
    ResponsibilityMatrix fresp(3, 2);
    fresp.at(0, 0) = 1.0;
    fresp.at(1, 0) = 1.0;
    fresp.at(2, 1) = 1.0;
    CHECK_THROWS_AS(m_step(flat, fresp, Family::gamma, MStepGuards{1e-6, 0.0}),
                    CollapseError);
}

TEST_CASE("initialize: m = 1 gives the full-data moment fit for any strategy") {
    const auto xs = sample(GammaParams{3.0, 2.0}, 500, 8);
    const double mean = testsup::sample_mean(xs);
    const double var = testsup::sample_variance(xs);
    for (InitStrategy strategy :
         {InitStrategy::quantile, InitStrategy::random_responsibility}) {
        const MixtureModel model = initialize(xs, Family::gamma, 1, strategy, 17);
        CHECK(model.components()[0].weight == 1.0);
        CHECK(param1(model.components()[0].params) ==
              doctest::Approx(mean * mean / var).epsilon(1e-9));
        CHECK(param2(model.components()[0].params) ==
              doctest::Approx(var / mean).epsilon(1e-9));
    }
}

TEST_CASE("initialize is deterministic per seed") {
    const auto xs = mixture_sample(separated_pair(), 600, 9);
    for (InitStrategy strategy :
         {InitStrategy::quantile, InitStrategy::random_responsibility}) {
        const MixtureModel a = initialize(xs, Family::gamma, 3, strategy, 33);
        const MixtureModel b = initialize(xs, Family::gamma, 3, strategy, 33);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a.components()[k].weight == b.components()[k].weight);
            CHECK(param1(a.components()[k].params) == param1(b.components()[k].params));
            CHECK(param2(a.components()[k].params) == param2(b.components()[k].params));
        }
    }
}

TEST_CASE("quantile initialization lands near the separated component means") {
    const MixtureModel truth = separated_pair();
    const auto xs = mixture_sample(truth, 4000, 10);
    const MixtureModel init = initialize(xs, Family::gamma, 2, InitStrategy::quantile, 1);
    std::vector<double> init_means;
    for (const Component& c : init.components()) {
        init_means.push_back(moments(c.params).mean);
    }
    std::sort(init_means.begin(), init_means.end());
    CHECK(init_means[0] > 2.0 / 2.0);
    CHECK(init_means[0] < 2.0 * 2.0);
    CHECK(init_means[1] > 5.0 / 2.0);
    CHECK(init_means[1] < 5.0 * 2.0);
}

TEST_CASE("initialize rejects undersized samples") {
    const std::vector<double> xs = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(initialize(xs, Family::gamma, 2, InitStrategy::quantile, 1),
                    DomainError);
}

TEST_CASE("em_fit with one component converges immediately to the moment fit") {
    for (Family family : {Family::gamma, Family::gaussian, Family::weibull}) {
        const auto xs = sample(GammaParams{6.0, 0.5}, 800, 21);
        const FitReport report = em_fit(xs, family, 1, quick_config(77));
        CHECK(report.converged);
        CHECK(report.iterations <= 2);
        CHECK(report.model.components()[0].weight == 1.0);
        if (family == Family::gamma) {
            const double mean = testsup::sample_mean(xs);
            const double var = testsup::sample_variance(xs);
            CHECK(param1(report.model.components()[0].params) ==
                  doctest::Approx(mean * mean / var).epsilon(1e-9));
        }
    }
}

TEST_CASE("em_fit m=1 mixture moments equal the sample moments") {
    const auto xs = sample(GammaParams{2.2, 1.4}, 1000, 22);
    const FitReport report = em_fit(xs, Family::gamma, 1, quick_config(5));
    const Moments m = mixture_moments(report.model);
    CHECK(m.mean == doctest::Approx(testsup::sample_mean(xs)).epsilon(1e-9));
    CHECK(m.variance == doctest::Approx(testsup::sample_variance(xs)).epsilon(1e-9));
}

TEST_CASE("em_fit recovers a well-separated pair") {
    const MixtureModel truth = separated_pair();
    const auto xs = mixture_sample(truth, 20000, 23);
    const FitReport report = em_fit(xs, Family::gamma, 2, quick_config(2319, 4));
    REQUIRE(report.model.size() == 2);
    const Aligned aligned = align_two(report.model, truth);
    for (int k = 0; k < 2; ++k) {
        CHECK(std::fabs(aligned.fitted[k].weight - aligned.truth[k].weight) < 0.05);
        CHECK(param1(aligned.fitted[k].params) ==
              doctest::Approx(param1(aligned.truth[k].params)).epsilon(0.10));
        CHECK(param2(aligned.fitted[k].params) ==
              doctest::Approx(param2(aligned.truth[k].params)).epsilon(0.10));
    }
}

TEST_CASE("em_fit traces are monotone and properly shaped") {
    const auto xs = mixture_sample(separated_pair(), 3000, 24);
    for (Family family : {Family::gamma, Family::gaussian, Family::weibull}) {
        const FitReport report = em_fit(xs, family, 2, quick_config(31, 3));
        CHECK(report.iterations == report.loglik_trace.size() - 1);
        for (std::size_t t = 1; t < report.loglik_trace.size(); ++t) {
            CHECK(report.loglik_trace[t] >= report.loglik_trace[t - 1] - 1e-9);
        }
    }
}

TEST_CASE("em_fit is deterministic and schedule-independent") {
    const auto xs = mixture_sample(separated_pair(), 4000, 25);
    const FitConfig config = quick_config(99, 6);
    const FitReport serial = em_fit(xs, Family::gamma, 2, config, 1);
    const FitReport parallel = em_fit(xs, Family::gamma, 2, config, 4);
    const FitReport again = em_fit(xs, Family::gamma, 2, config, 1);
    CHECK(serial.restart_index == parallel.restart_index);
    CHECK(serial.loglik_trace == parallel.loglik_trace);
    CHECK(serial.loglik_trace == again.loglik_trace);
    REQUIRE(serial.model.size() == parallel.model.size());
    for (std::size_t k = 0; k < serial.model.size(); ++k) {
        CHECK(serial.model.components()[k].weight == parallel.model.components()[k].weight);
        CHECK(param1(serial.model.components()[k].params) ==
              param1(parallel.model.components()[k].params));
        CHECK(param2(serial.model.components()[k].params) ==
              param2(parallel.model.components()[k].params));
    }
}

TEST_CASE("em_fit handles realistic measured-power magnitudes") {
    // Received powers from short-range sweeps sit around 1e-12 W linear;
    // scales that small must not destabilize the fit or the metrics.
    const MixtureModel law({
        Component{0.540, GammaParams{72.285, 0.0824e-12}},
        Component{0.460, GammaParams{67.904, 0.115e-12}},
    });
    const auto xs = mixture_sample(law, 4096, 5);
    const FitReport rep = em_fit(xs, Family::gamma, 2, quick_config(5, 4));
    CHECK(rep.converged);
    for (const Component& c : rep.model.components()) {
        CHECK(param1(c.params) > 40.0);
        CHECK(param1(c.params) < 110.0);
        CHECK(param2(c.params) > 1e-14);
        CHECK(param2(c.params) < 1e-12);
    }
    const MetricReport metrics = evaluate_fit(rep.model, xs, Binning::freedman_diaconis());
    CHECK(metrics.ks_passed);
    CHECK(metrics.kl_divergence < 0.05);
    const GammaParams mle = gamma_mle(xs);
    CHECK(mle.shape > 20.0);
    CHECK(mle.shape < 45.0);
}

TEST_CASE("em_fit error paths") {
    const std::vector<double> tiny = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(em_fit(tiny, Family::gamma, 1, quick_config(1)), DomainError);

    const std::vector<double> constant(40, 2.0);
    CHECK_THROWS_AS(em_fit(constant, Family::gamma, 2, quick_config(1)),
                    DegenerateDataError);

    // A weight floor no component can reach makes every restart collapse.
    const auto xs = mixture_sample(separated_pair(), 200, 26);
    FitConfig config = quick_config(7, 3);
    config.weight_floor = 0.75;
    CHECK_THROWS_AS(em_fit(xs, Family::gamma, 2, config), FitFailedError);

    FitConfig bad = quick_config(1);
    bad.restarts = 0;
    CHECK_THROWS_AS(em_fit(xs, Family::gamma, 2, bad), DomainError);
}

TEST_CASE("bic uses p = 3m - 1 free parameters") {
    const double ll = -123.0;
    const std::size_t n = 500;
    CHECK(bic(ll, 1, n) ==
          doctest::Approx(-2.0 * ll + 2.0 * std::log(500.0)).epsilon(1e-12));
    CHECK(bic(ll, 4, n) ==
          doctest::Approx(-2.0 * ll + 11.0 * std::log(500.0)).epsilon(1e-12));
}

TEST_CASE("select_components favours m=1 for single-gamma data") {
    int chose_one = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const auto xs = sample(GammaParams{4.0, 0.8}, 400, 5000 + trial);
        const SelectionResult sel =
            select_components(xs, Family::gamma, 1, 3, quick_config(60 + trial, 2));
        if (sel.best_m == 1) ++chose_one;
    }
    CHECK(chose_one >= 18);
}

TEST_CASE("select_components finds the separated two-component truth") {
    const auto xs = mixture_sample(separated_pair(), 5000, 27);
    const SelectionResult sel =
        select_components(xs, Family::gamma, 1, 4, quick_config(61, 2));
    CHECK(sel.best_m == 2);
    CHECK(sel.entries.size() + sel.failures.size() == 4);
}

TEST_CASE("select_components validates the range") {
    const auto xs = mixture_sample(separated_pair(), 500, 28);
    CHECK_THROWS_AS(select_components(xs, Family::gamma, 0, 2, quick_config(1)),
                    DomainError);
    CHECK_THROWS_AS(select_components(xs, Family::gamma, 1, 9, quick_config(1)),
                    DomainError);
}

TEST_CASE("fit config validation") {
    FitConfig config;
    config.rel_loglik_tol = 0.0;
    CHECK_THROWS_AS(config.validate(), DomainError);
    config = FitConfig{};
    config.weight_floor = 0.0;
    CHECK_THROWS_AS(config.validate(), DomainError);
    config = FitConfig{};
    config.max_iterations = 0;
    CHECK_THROWS_AS(config.validate(), DomainError);
}

}  // TEST_SUITE
