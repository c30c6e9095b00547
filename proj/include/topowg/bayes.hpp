#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "topowg/dynamics.hpp"
#include "topowg/fisher.hpp"
#include "topowg/model.hpp"
#include "topowg/random.hpp"

namespace topowg {

/// Uniform prior on [lo, hi], discretized on n_grid points including both ends.
struct PriorInterval {
    double lo = 0.0;
    double hi = 0.2;
    int n_grid = 2001;

    void validate() const;
    std::vector<double> points() const;
};

/// Prior interval used for each parameter unless overridden: g in [0, 0.2], delta in [0, 0.4].
PriorInterval default_prior(Parameter which);

/// Discrete posterior; weights are nonnegative and sum to 1.
class PosteriorGrid {
public:
    PosteriorGrid(std::vector<double> x, std::vector<double> weights);
    static PosteriorGrid uniform(const PriorInterval& prior);

    const std::vector<double>& x() const noexcept { return x_; }
    const std::vector<double>& weights() const noexcept { return w_; }
    std::size_t size() const noexcept { return x_.size(); }

    double mean() const;
    double variance() const;
    std::size_t argmax() const;

private:
    std::vector<double> x_;
    std::vector<double> w_;
};

struct EstimationResult {
    double mean = 0.0;
    double variance = 0.0;
    double delta_sq = 0.0;  ///< (variance + (mean - x)^2) / x^2
};

/// m ~ Binomial(shots, p1_true).
long simulate_record(double p1_true, long shots, Rng& rng);

inline constexpr double kLikelihoodFloor = 1e-12;

/// Multiplies the prior by p^m (1-p)^(shots-m) in log space (the binomial
/// coefficient cancels) and renormalizes. model_p1 is clamped to
/// [kLikelihoodFloor, 1 - kLikelihoodFloor].
PosteriorGrid posterior_update(long m, long shots, std::span<const double> model_p1, const PosteriorGrid& prior);

/// Average squared relative error of a posterior about x_true != 0.
double squared_relative_error(const PosteriorGrid& posterior, double x_true);
EstimationResult summarize(const PosteriorGrid& posterior, double x_true);

/// Emitter spectra of the model at every prior grid point, other
/// parameters held fixed. p1(t) is the likelihood model at time t.
class ModelGrid {
public:
    ModelGrid(const ModelParams& base, Parameter which, const PriorInterval& prior,
              const std::optional<DisorderSpec>& disorder = std::nullopt, int workers = 1);

    Parameter parameter() const noexcept { return which_; }
    const PriorInterval& prior() const noexcept { return prior_; }
    const std::vector<double>& points() const noexcept { return points_; }

    std::vector<double> p1(double t) const;

private:
    Parameter which_;
    PriorInterval prior_;
    std::vector<double> points_;
    std::vector<EmitterSpectrum> spectra_;
};

/// Population that generates the measurement data, as a function of t.
using P1Source = std::function<double(double)>;

/// Unitary data at the given parameters.
P1Source clean_source(const ModelParams& params, const std::optional<DisorderSpec>& disorder = std::nullopt);

/// Dephased data, integrated once over `times`; querying any other time throws.
P1Source dephased_source(const ModelParams& params, double gamma, const TimeGrid& times);

struct EstimationConfig {
    Parameter which = Parameter::g;
    double x_true = 0.1;
    ModelParams base;          ///< holds the fixed parameter; the sensed one is replaced by x_true
    double t = 50.0;
    long shots = 10000;        ///< M
    int n_samples = 100;
    std::uint64_t seed = 1;
    PriorInterval prior = default_prior(Parameter::g);
    /// Records at f * t for each factor f are chained onto the record at t,
    /// each with `shots` repetitions, to remove phase aliases. Empty means
    /// a single-time record.
    std::vector<double> companion_factors;
    /// Records at these fixed times are taken first, before the record at t.
    /// Anchors at or after t are skipped.
    std::vector<double> anchor_times;

    void validate() const;
    ModelParams true_params() const { return with_parameter(base, which, x_true); }
    std::vector<double> times() const;
    std::vector<double> times_at(double t_main) const;
};

struct AverageErrorResult {
    double t = 0.0;
    double mean_delta_sq = 0.0;
    double stderr_delta_sq = 0.0;
    double mean_variance = 0.0;
    double mean_estimate = 0.0;
    std::vector<EstimationResult> samples;
};

/// Averages Delta x^2 over n_samples records. Record s draws from
/// substream (seed, record_offset + s) and starts from a fresh uniform prior.
AverageErrorResult average_error(const EstimationConfig& config, const ModelGrid& model, const P1Source& data,
                                 std::uint64_t record_offset = 0);

/// Chains one record per time onto a uniform prior (records from substream (seed, 0)).
PosteriorGrid sequential_estimate(const EstimationConfig& config, std::span<const double> times,
                                  const ModelGrid& model, const P1Source& data);

/// How disordered data is inverted.
enum class DisorderInference {
    clean,    ///< the disorder-free likelihood
    matched,  ///< the likelihood of the same disorder realization
};

/// Mean Delta x^2 at each main time in `times` for data from n_realizations
/// disorder draws. Realization r uses disorder seed substream_seed(seed ^ tag, r)
/// and record substreams r*n_samples .. (r+1)*n_samples-1.
std::vector<AverageErrorResult> disorder_averaged_errors(const EstimationConfig& config, std::span<const double> times,
                                                         double W, int n_realizations, const ModelGrid& clean_model,
                                                         DisorderInference inference, int workers = 1);

AverageErrorResult disorder_averaged_error(const EstimationConfig& config, double W, int n_realizations,
                                           const ModelGrid& clean_model, DisorderInference inference, int workers = 1);

/// Mean Delta x^2 at each main time for data generated by the dephasing
/// master equation and inverted with `model` (one integration for all times).
std::vector<AverageErrorResult> dephasing_errors(const EstimationConfig& config, std::span<const double> times,
                                                 double gamma, const ModelGrid& model);

AverageErrorResult dephasing_error(const EstimationConfig& config, double gamma, const ModelGrid& model);

/// Average errors at each main time for a fixed data source.
std::vector<AverageErrorResult> time_sweep(const EstimationConfig& config, std::span<const double> times,
                                           const ModelGrid& model, const P1Source& data);

/// CSV with header "x,weight".
void write_posterior_csv(std::ostream& os, const PosteriorGrid& posterior);

}  // namespace topowg
