#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "topowg/bayes.hpp"
#include "topowg/bound_states.hpp"
#include "topowg/errors.hpp"

using namespace topowg;

namespace {

EstimationConfig small_config() {
    EstimationConfig c;
    c.base.N = 61;
    c.which = Parameter::g;
    c.x_true = 0.1;
    c.prior = PriorInterval{0.0, 0.2, 401};
    c.t = 15.0;
    c.n_samples = 20;
    c.seed = 5;
    return c;
}

// Local maxima of the posterior weights, largest first.
std::vector<std::pair<double, double>> modes(const PosteriorGrid& post) {
    std::vector<std::pair<double, double>> out;
    const auto& w = post.weights();
    for (std::size_t i = 1; i + 1 < w.size(); ++i)
        if (w[i] > w[i - 1] && w[i] >= w[i + 1]) out.emplace_back(w[i], post.x()[i]);
    std::sort(out.rbegin(), out.rend());
    return out;
}

double local_width(const PosteriorGrid& post, double centre, double half_window) {
    double m = 0, v = 0, z = 0;
    for (std::size_t i = 0; i < post.size(); ++i)
        if (std::abs(post.x()[i] - centre) <= half_window) {
            z += post.weights()[i];
            m += post.weights()[i] * post.x()[i];
        }
    m /= z;
    for (std::size_t i = 0; i < post.size(); ++i)
        if (std::abs(post.x()[i] - centre) <= half_window) v += post.weights()[i] * (post.x()[i] - m) * (post.x()[i] - m);
    return std::sqrt(v / z);
}

}  // namespace

TEST_SUITE("bayes") {

TEST_CASE("prior interval") {
    const auto pts = PriorInterval{0.0, 0.2, 5}.points();
    REQUIRE(pts.size() == 5);
    CHECK(pts[0] == 0.0);
    CHECK(pts[4] == 0.2);
    CHECK(pts[2] == doctest::Approx(0.1));
    CHECK_THROWS_AS(PriorInterval({0.2, 0.1, 5}).validate(), ParameterError);
    CHECK_THROWS_AS(PriorInterval({0.0, 0.1, 1}).validate(), ParameterError);
    CHECK(default_prior(Parameter::g).hi == 0.2);
    CHECK(default_prior(Parameter::delta).hi == 0.4);
    CHECK(default_prior(Parameter::delta).n_grid == 2001);
}

TEST_CASE("binomial records") {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        CHECK(simulate_record(1.0, 10000, rng) == 10000);
        CHECK(simulate_record(0.0, 10000, rng) == 0);
    }
    double mean = 0.0;
    for (int i = 0; i < 1000; ++i) mean += simulate_record(0.5, 10000, rng) / 1e4 / 1000.0;
    CHECK(std::abs(mean - 0.5) <= 0.005);
    CHECK_THROWS_AS(simulate_record(1.5, 10, rng), ParameterError);
    CHECK_THROWS_AS(simulate_record(0.5, 0, rng), ParameterError);
    Rng a = substream_rng(9, 3), b = substream_rng(9, 3);
    CHECK(simulate_record(0.3, 1000, a) == simulate_record(0.3, 1000, b));
}

TEST_CASE("posterior update: flat likelihood keeps the prior, normalization holds") {
    const auto prior = PosteriorGrid::uniform(PriorInterval{0.0, 1.0, 101});
    const std::vector<double> flat(101, 0.37);
    const auto post = posterior_update(40, 100, flat, prior);
    for (std::size_t i = 0; i < post.size(); ++i) CHECK(post.weights()[i] == doctest::Approx(prior.weights()[i]).epsilon(1e-13));

    oracle::Lcg gen(41);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> model(101);
        for (auto& x : model) x = gen.uniform(0.0, 1.0);
        model[7] = 0.0;
        model[8] = 1.0;
        auto chained = prior;
        for (int k = 0; k < 3; ++k) {
            chained = posterior_update(gen.integer(0, 100000), 100000, model, chained);
            double s = 0.0;
            for (double w : chained.weights()) {
                CHECK(w >= 0.0);
                s += w;
            }
            CHECK(std::abs(s - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("posterior update: all hits put the mode at the model maximum") {
    const auto prior = PosteriorGrid::uniform(PriorInterval{0.0, 1.0, 201});
    std::vector<double> model(201);
    for (std::size_t i = 0; i < model.size(); ++i) model[i] = 0.9 * std::exp(-std::pow((i / 200.0 - 0.3) * 5, 2));
    const auto post = posterior_update(500, 500, model, prior);
    CHECK(post.argmax() == static_cast<std::size_t>(std::max_element(model.begin(), model.end()) - model.begin()));
}

TEST_CASE("posterior update matches a direct binomial evaluation") {
    const auto prior = PosteriorGrid::uniform(PriorInterval{0.0, 1.0, 11});
    std::vector<double> model{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
    const long m = 7, M = 20;
    const auto post = posterior_update(m, M, model, prior);
    std::vector<double> ref(11);
    double z = 0.0;
    for (int i = 0; i < 11; ++i) z += ref[i] = std::pow(model[i], m) * std::pow(1 - model[i], M - m);
    for (int i = 0; i < 11; ++i) CHECK(post.weights()[i] == doctest::Approx(ref[i] / z).epsilon(1e-12));
    CHECK_THROWS_AS(posterior_update(21, 20, model, prior), ParameterError);
    CHECK_THROWS_AS(posterior_update(1, 20, std::vector<double>(3, 0.5), prior), ParameterError);
}

TEST_CASE("squared relative error") {
    std::vector<double> x{0.0, 0.1, 0.2};
    CHECK(squared_relative_error(PosteriorGrid(x, {0, 1, 0}), 0.1) == 0.0);
    CHECK(squared_relative_error(PosteriorGrid(x, {0, 0, 1}), 0.1) == doctest::Approx(1.0));
    // uniform grid on [0, 0.2]: discrete variance (h^2/12)(n+1)/(n-1) -> 1/3 relative
    const int n = 2001;
    const auto uni = PosteriorGrid::uniform(PriorInterval{0.0, 0.2, n});
    const double exact = (0.04 / 12.0) * (n + 1.0) / (n - 1.0) / 0.01;
    CHECK(squared_relative_error(uni, 0.1) == doctest::Approx(exact).epsilon(1e-10));
    CHECK(std::abs(squared_relative_error(uni, 0.1) - 1.0 / 3.0) < 1e-3);
    CHECK_THROWS_AS(squared_relative_error(uni, 0.0), ParameterError);
    const auto r = summarize(PosteriorGrid(x, {1, 1, 0}), 0.1);
    CHECK(r.mean == doctest::Approx(0.05));
    CHECK(r.variance == doctest::Approx(0.0025));
    CHECK(r.delta_sq == doctest::Approx((0.0025 + 0.0025) / 0.01));
}

TEST_CASE("model grid P1 equals the spectrum at each grid point") {
    auto c = small_config();
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const auto p1 = model.p1(12.0);
    for (std::size_t i : {0u, 57u, 200u, 399u}) {
        const auto p = with_parameter(c.base, Parameter::g, model.points()[i]);
        CHECK(p1[i] == doctest::Approx(std::norm(survival_amplitude(emitter_spectrum(build_hamiltonian(p)), 12.0))));
    }
    const ModelGrid threaded(c.base, Parameter::g, c.prior, std::nullopt, 3);
    CHECK(threaded.p1(12.0) == p1);
}

TEST_CASE("sequential estimate: single time, duplicated time vs doubled shots") {
    auto c = small_config();
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const auto data = clean_source(c.true_params());

    const double t = 15.0;
    const auto seq = sequential_estimate(c, std::span<const double>(&t, 1), model, data);
    Rng rng = substream_rng(c.seed, 0);
    const long m = simulate_record(data(t), c.shots, rng);
    const auto one = posterior_update(m, c.shots, model.p1(t), PosteriorGrid::uniform(c.prior));
    CHECK(seq.weights() == one.weights());

    const auto p = model.p1(t);
    const auto prior = PosteriorGrid::uniform(c.prior);
    const auto twice = posterior_update(3000, 5000, p, posterior_update(2100, 5000, p, prior));
    const auto doubled = posterior_update(5100, 10000, p, prior);
    for (std::size_t i = 0; i < prior.size(); ++i)
        CHECK(twice.weights()[i] == doctest::Approx(doubled.weights()[i]).epsilon(1e-10));
}

TEST_CASE("a second record time suppresses the aliases of a single late record") {
    EstimationConfig c;  // N=201, M=1e4, g in [0, 0.2], 2001 points
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const auto data = clean_source(c.true_params());
    auto secondary = [](const std::vector<std::pair<double, double>>& m) {
        double best = 0.0;
        for (std::size_t k = 1; k < m.size(); ++k)
            if (std::abs(m[k].second - m[0].second) > 2e-3) best = std::max(best, m[k].first / m[0].first);
        return best;
    };
    const auto one = modes(sequential_estimate(c, std::vector<double>{100.0}, model, data));
    REQUIRE(one.size() >= 2);
    CHECK(secondary(one) > 0.1);  // a lone record is ambiguous

    // {t, 1.07 t} makes the true value dominant but leaves an alias near
    // g = 0.058 at about 1% of the peak
    const auto near = modes(sequential_estimate(c, std::vector<double>{100.0, 107.0}, model, data));
    CHECK(std::abs(near[0].second - 0.1) < 1e-3);
    CHECK(secondary(near) < 0.05);

    // a short record at Jt = 10 removes the aliases entirely
    const auto anchored = modes(sequential_estimate(c, std::vector<double>{10.0, 100.0}, model, data));
    CHECK(std::abs(anchored[0].second - 0.1) < 1e-3);
    CHECK(secondary(anchored) < 0.01);
}

TEST_CASE("posterior peak at the true g narrows with time") {
    EstimationConfig c;
    c.anchor_times = {10.0};
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const auto data = clean_source(c.true_params());
    double prev = 1.0;
    for (double t : {20.0, 50.0, 100.0}) {
        const auto post = sequential_estimate(c, c.times_at(t), model, data);
        CHECK(std::abs(post.x()[post.argmax()] - 0.1) < 2e-3);
        const double w = local_width(post, 0.1, 0.01);
        CHECK(w < prev);
        prev = w;
    }
}

TEST_CASE("average error is reproducible and independent of the schedule") {
    auto c = small_config();
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const auto data = clean_source(c.true_params());
    const auto a = average_error(c, model, data);
    const auto b = average_error(c, model, data);
    REQUIRE(a.samples.size() == static_cast<std::size_t>(c.n_samples));
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].mean == b.samples[i].mean);
        CHECK(a.samples[i].delta_sq == b.samples[i].delta_sq);
    }
    CHECK(a.mean_delta_sq == b.mean_delta_sq);
    c.seed = 6;
    CHECK(average_error(c, model, data).mean_delta_sq != a.mean_delta_sq);
}

TEST_CASE("anchor and companion times") {
    EstimationConfig c;
    c.anchor_times = {10.0};
    c.companion_factors = {1.07};
    CHECK(c.times_at(50.0) == std::vector<double>{10.0, 50.0, 50.0 * 1.07});
    CHECK(c.times_at(10.0) == std::vector<double>{10.0, 10.0 * 1.07});
    c.companion_factors = {-1.0};
    CHECK_THROWS_AS(c.validate(), ParameterError);
    c.companion_factors.clear();
    c.x_true = 0.3;
    CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("zero disorder reproduces the clean average exactly") {
    auto c = small_config();
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const auto clean = average_error(c, model, clean_source(c.true_params()));
    for (auto inf : {DisorderInference::clean, DisorderInference::matched}) {
        const auto dis = disorder_averaged_error(c, 0.0, 1, model, inf);
        CHECK(dis.mean_delta_sq == clean.mean_delta_sq);
    }
}

TEST_CASE("disorder averages do not depend on the worker count") {
    auto c = small_config();
    c.n_samples = 5;
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const std::vector<double> times{12.0, 18.0};
    const auto serial = disorder_averaged_errors(c, times, 0.1, 4, model, DisorderInference::matched, 1);
    const auto threaded = disorder_averaged_errors(c, times, 0.1, 4, model, DisorderInference::matched, 3);
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(serial[i].mean_delta_sq == threaded[i].mean_delta_sq);
    CHECK_THROWS_AS(disorder_averaged_errors(c, times, -0.1, 4, model, DisorderInference::clean), ParameterError);
}

TEST_CASE("zero dephasing matches the unitary average within Monte Carlo error") {
    auto c = small_config();
    const ModelGrid model(c.base, Parameter::g, c.prior);
    const auto unitary = average_error(c, model, clean_source(c.true_params()));
    const auto dephased = dephasing_error(c, 0.0, model);
    CHECK(dephased.mean_delta_sq ==
          doctest::Approx(unitary.mean_delta_sq).epsilon(3.0 * unitary.stderr_delta_sq / unitary.mean_delta_sq));
    CHECK_THROWS_AS(dephased_source(c.true_params(), 0.0, TimeGrid({1.0}))(2.0), ParameterError);
}

TEST_CASE("longer coherence time improves g estimates across the prior") {
    EstimationConfig c;
    c.anchor_times = {10.0};
    const ModelGrid model(c.base, Parameter::g, c.prior);
    int better = 0, total = 0;
    for (double g = 0.04; g <= 0.16 + 1e-9; g += 0.02) {
        c.x_true = g;
        const auto data = clean_source(c.true_params());
        const std::vector<double> times{25.0, 100.0};
        const auto res = time_sweep(c, times, model, data);
        ++total;
        if (res[1].mean_delta_sq < res[0].mean_delta_sq) ++better;
    }
    CHECK(better >= 0.8 * total);
}

TEST_CASE("posterior CSV") {
    std::ostringstream os;
    write_posterior_csv(os, PosteriorGrid({0.0, 0.5}, {1.0, 3.0}));
    CHECK(os.str() == "x,weight\n0,0.25\n0.5,0.75\n");
}

}  // TEST_SUITE
