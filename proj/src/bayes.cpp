#include "topowg/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <string>

#include "topowg/errors.hpp"
#include "topowg/parallel.hpp"

namespace topowg {

void PriorInterval::validate() const {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ParameterError("prior interval needs finite lo < hi");
    if (n_grid < 2) throw ParameterError("prior grid needs at least 2 points");
}

std::vector<double> PriorInterval::points() const {
    validate();
    std::vector<double> x(static_cast<std::size_t>(n_grid));
    for (int i = 0; i < n_grid; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / (n_grid - 1);
    return x;
}

PriorInterval default_prior(Parameter which) {
    return which == Parameter::g ? PriorInterval{0.0, 0.2, 2001} : PriorInterval{0.0, 0.4, 2001};
}

PosteriorGrid::PosteriorGrid(std::vector<double> x, std::vector<double> weights)
    : x_(std::move(x)), w_(std::move(weights)) {
    if (x_.size() != w_.size() || x_.empty()) throw ParameterError("posterior grid and weights must match in size");
    double total = 0.0;
    for (double w : w_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw NumericalError("posterior weights must be finite and nonnegative");
        total += w;
    }
    if (!(total > 0.0)) throw NumericalError("posterior has zero total weight");
    for (double& w : w_) w /= total;
}

PosteriorGrid PosteriorGrid::uniform(const PriorInterval& prior) {
    return PosteriorGrid(prior.points(), std::vector<double>(static_cast<std::size_t>(prior.n_grid), 1.0));
}

double PosteriorGrid::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) m += w_[i] * x_[i];
    return m;
}

double PosteriorGrid::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) v += w_[i] * (x_[i] - m) * (x_[i] - m);
    return v;
}

std::size_t PosteriorGrid::argmax() const {
    return static_cast<std::size_t>(std::max_element(w_.begin(), w_.end()) - w_.begin());
}

long simulate_record(double p1_true, long shots, Rng& rng) {
    if (shots < 1) throw ParameterError("shots must be >= 1");
    if (!(p1_true >= 0.0 && p1_true <= 1.0)) throw ParameterError("p1 must lie in [0, 1]");
    std::binomial_distribution<long> dist(shots, p1_true);
    return dist(rng);
}

PosteriorGrid posterior_update(long m, long shots, std::span<const double> model_p1, const PosteriorGrid& prior) {
    if (model_p1.size() != prior.size()) throw ParameterError("model P1 must be aligned with the posterior grid");
    if (m < 0 || m > shots) throw ParameterError("count m must lie in [0, shots]");
    const std::size_t n = prior.size();
    std::vector<double> logw(n);
    double best = -std::numeric_limits<double>::infinity();
    const double hits = static_cast<double>(m);
    const double misses = static_cast<double>(shots - m);
    for (std::size_t i = 0; i < n; ++i) {
        const double w0 = prior.weights()[i];
        if (w0 <= 0.0) {
            logw[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const double p = std::clamp(model_p1[i], kLikelihoodFloor, 1.0 - kLikelihoodFloor);
        logw[i] = std::log(w0) + hits * std::log(p) + misses * std::log1p(-p);
        best = std::max(best, logw[i]);
    }
    if (!std::isfinite(best)) throw NumericalError("posterior underflow: no grid point carries weight");
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(logw[i] - best);
    return PosteriorGrid(prior.x(), std::move(w));
}

double squared_relative_error(const PosteriorGrid& posterior, double x_true) {
    if (x_true == 0.0) throw ParameterError("relative error is undefined for x_true = 0");
    const double m = posterior.mean();
    return (posterior.variance() + (m - x_true) * (m - x_true)) / (x_true * x_true);
}

EstimationResult summarize(const PosteriorGrid& posterior, double x_true) {
    EstimationResult r;
    r.mean = posterior.mean();
    r.variance = posterior.variance();
    r.delta_sq = squared_relative_error(posterior, x_true);
    return r;
}

ModelGrid::ModelGrid(const ModelParams& base, Parameter which, const PriorInterval& prior,
                     const std::optional<DisorderSpec>& disorder, int workers)
    : which_(which), prior_(prior), points_(prior.points()) {
    spectra_.resize(points_.size());
    parallel_for(points_.size(), workers, [&](std::size_t i) {
        spectra_[i] = emitter_spectrum(build_hamiltonian(with_parameter(base, which, points_[i]), disorder));
    });
}

std::vector<double> ModelGrid::p1(double t) const {
    std::vector<double> out(spectra_.size());
    for (std::size_t i = 0; i < spectra_.size(); ++i)
        out[i] = std::clamp(std::norm(survival_amplitude(spectra_[i], t)), 0.0, 1.0);
    return out;
}

P1Source clean_source(const ModelParams& params, const std::optional<DisorderSpec>& disorder) {
    auto spectrum = std::make_shared<EmitterSpectrum>(emitter_spectrum(build_hamiltonian(params, disorder)));
    return [spectrum](double t) { return std::clamp(std::norm(survival_amplitude(*spectrum, t)), 0.0, 1.0); };
}

P1Source dephased_source(const ModelParams& params, double gamma, const TimeGrid& times) {
    const auto result = lindblad_evolve(build_hamiltonian(params), gamma, times);
    auto table = std::make_shared<std::map<double, double>>();
    for (std::size_t i = 0; i < times.size(); ++i) (*table)[times[i]] = result.trace.p1[i];
    return [table](double t) {
        auto it = table->find(t);
        if (it == table->end()) throw ParameterError("dephased data not integrated at t = " + std::to_string(t));
        return it->second;
    };
}

void EstimationConfig::validate() const {
    base.validate();
    prior.validate();
    if (shots < 1) throw ParameterError("shots M must be >= 1");
    if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
    if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError("evolution time must be finite and >= 0");
    if (x_true < prior.lo || x_true > prior.hi) throw ParameterError("x_true must lie inside the prior interval");
    if (x_true == 0.0) throw ParameterError("x_true = 0 makes the relative error undefined");
    for (double f : companion_factors)
        if (!(f > 0.0) || !std::isfinite(f)) throw ParameterError("companion time factors must be positive");
    for (double a : anchor_times)
        if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError("anchor times must be finite and >= 0");
}

std::vector<double> EstimationConfig::times_at(double t_main) const {
    std::vector<double> out;
    for (double a : anchor_times)
        if (a < t_main) out.push_back(a);
    out.push_back(t_main);
    for (double f : companion_factors) out.push_back(f * t_main);
    return out;
}

std::vector<double> EstimationConfig::times() const { return times_at(t); }

namespace {

// Log-likelihood tables for every time of a record, shared by all samples.
struct RecordModel {
    std::vector<std::vector<double>> p1;  // per time, per grid point
    std::vector<double> p_true;           // per time
};

RecordModel record_model(const std::vector<double>& times, const ModelGrid& model, const P1Source& data) {
    RecordModel rm;
    for (double t : times) {
        rm.p1.push_back(model.p1(t));
        rm.p_true.push_back(std::clamp(data(t), 0.0, 1.0));
    }
    return rm;
}

EstimationResult run_record(const EstimationConfig& config, const RecordModel& rm, const PosteriorGrid& prior,
                            std::uint64_t record_index) {
    Rng rng = substream_rng(config.seed, record_index);
    PosteriorGrid post = prior;
    for (std::size_t k = 0; k < rm.p1.size(); ++k) {
        const long m = simulate_record(rm.p_true[k], config.shots, rng);
        post = posterior_update(m, config.shots, rm.p1[k], post);
    }
    return summarize(post, config.x_true);
}

void finalize(AverageErrorResult& r) {
    const double n = static_cast<double>(r.samples.size());
    double sum = 0.0, sum_var = 0.0, sum_mean = 0.0;
    for (const auto& s : r.samples) {
        sum += s.delta_sq;
        sum_var += s.variance;
        sum_mean += s.mean;
    }
    r.mean_delta_sq = sum / n;
    r.mean_variance = sum_var / n;
    r.mean_estimate = sum_mean / n;
    double ss = 0.0;
    for (const auto& s : r.samples) ss += (s.delta_sq - r.mean_delta_sq) * (s.delta_sq - r.mean_delta_sq);
    r.stderr_delta_sq = r.samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

void check_model(const EstimationConfig& config, const ModelGrid& model) {
    config.validate();
    if (model.parameter() != config.which) throw ParameterError("model grid senses a different parameter");
    if (model.prior().lo != config.prior.lo || model.prior().hi != config.prior.hi ||
        model.prior().n_grid != config.prior.n_grid)
        throw ParameterError("model grid and configuration use different priors");
}

}  // namespace

AverageErrorResult average_error(const EstimationConfig& config, const ModelGrid& model, const P1Source& data,
                                 std::uint64_t record_offset) {
    check_model(config, model);
    const RecordModel rm = record_model(config.times(), model, data);
    const PosteriorGrid prior = PosteriorGrid::uniform(config.prior);
    AverageErrorResult out;
    out.t = config.t;
    out.samples.reserve(static_cast<std::size_t>(config.n_samples));
    for (int s = 0; s < config.n_samples; ++s)
        out.samples.push_back(run_record(config, rm, prior, record_offset + static_cast<std::uint64_t>(s)));
    finalize(out);
    return out;
}

PosteriorGrid sequential_estimate(const EstimationConfig& config, std::span<const double> times,
                                  const ModelGrid& model, const P1Source& data) {
    check_model(config, model);
    if (times.empty()) throw ParameterError("sequential estimate needs at least one time");
    const RecordModel rm = record_model(std::vector<double>(times.begin(), times.end()), model, data);
    Rng rng = substream_rng(config.seed, 0);
    PosteriorGrid post = PosteriorGrid::uniform(config.prior);
    for (std::size_t k = 0; k < rm.p1.size(); ++k) {
        const long m = simulate_record(rm.p_true[k], config.shots, rng);
        post = posterior_update(m, config.shots, rm.p1[k], post);
    }
    return post;
}

std::vector<AverageErrorResult> time_sweep(const EstimationConfig& config, std::span<const double> times,
                                           const ModelGrid& model, const P1Source& data) {
    std::vector<AverageErrorResult> out;
    for (double t : times) {
        EstimationConfig c = config;
        c.t = t;
        out.push_back(average_error(c, model, data));
    }
    return out;
}

std::vector<AverageErrorResult> disorder_averaged_errors(const EstimationConfig& config, std::span<const double> times,
                                                         double W, int n_realizations, const ModelGrid& clean_model,
                                                         DisorderInference inference, int workers) {
    if (!(W >= 0.0)) throw ParameterError("disorder strength W must be >= 0");
    if (n_realizations < 1) throw ParameterError("need at least one disorder realization");
    constexpr std::uint64_t kDisorderTag = 0xd150d3e5ULL;

    std::vector<AverageErrorResult> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) out[k].t = times[k];
    for (int r = 0; r < n_realizations; ++r) {
        const DisorderSpec spec{W, substream_seed(config.seed ^ kDisorderTag, static_cast<std::uint64_t>(r))};
        const P1Source data = clean_source(config.true_params(), spec);
        std::optional<ModelGrid> matched;
        if (inference == DisorderInference::matched && W > 0.0)
            matched.emplace(config.base, config.which, config.prior, spec, workers);
        const ModelGrid& model = matched ? *matched : clean_model;
        const std::uint64_t offset = static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(config.n_samples);
        for (std::size_t k = 0; k < times.size(); ++k) {
            EstimationConfig c = config;
            c.t = times[k];
            auto part = average_error(c, model, data, offset);
            out[k].samples.insert(out[k].samples.end(), part.samples.begin(), part.samples.end());
        }
    }
    for (auto& r : out) finalize(r);
    return out;
}

AverageErrorResult disorder_averaged_error(const EstimationConfig& config, double W, int n_realizations,
                                           const ModelGrid& clean_model, DisorderInference inference, int workers) {
    const double t = config.t;
    return disorder_averaged_errors(config, std::span<const double>(&t, 1), W, n_realizations, clean_model, inference,
                                    workers)
        .front();
}

std::vector<AverageErrorResult> dephasing_errors(const EstimationConfig& config, std::span<const double> times,
                                                 double gamma, const ModelGrid& model) {
    config.validate();
    std::vector<double> all;
    for (double t : times)
        for (double tt : config.times_at(t)) all.push_back(tt);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    const P1Source data = dephased_source(config.true_params(), gamma, TimeGrid(all));
    return time_sweep(config, times, model, data);
}

AverageErrorResult dephasing_error(const EstimationConfig& config, double gamma, const ModelGrid& model) {
    const double t = config.t;
    return dephasing_errors(config, std::span<const double>(&t, 1), gamma, model).front();
}

void write_posterior_csv(std::ostream& os, const PosteriorGrid& posterior) {
    const auto old_precision = os.precision(17);
    os << "x,weight\n";
    for (std::size_t i = 0; i < posterior.size(); ++i) os << posterior.x()[i] << ',' << posterior.weights()[i] << '\n';
    os.precision(old_precision);
}

}  // namespace topowg
