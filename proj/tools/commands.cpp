#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "topowg/bayes.hpp"
#include "topowg/bound_states.hpp"
#include "topowg/dynamics.hpp"
#include "topowg/errors.hpp"
#include "topowg/fisher.hpp"
#include "topowg/model.hpp"
#include "topowg/parallel.hpp"

namespace topowg::cli {

Run::Run(std::string command, Config config, std::filesystem::path out, int workers)
    : command_(std::move(command)), config_(std::move(config)), out_(std::move(out)), workers_(std::max(1, workers)) {}

std::ofstream Run::open(const std::string& name) {
    std::filesystem::create_directories(out_);
    std::ofstream os(out_ / name);
    if (!os) throw ParameterError("cannot write '" + (out_ / name).string() + "'");
    os.precision(17);
    outputs_.push_back(name);
    log("writing " + name);
    return os;
}

void Run::log(const std::string& message) const { std::cerr << "[topowg " << command_ << "] " << message << std::endl; }

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

ModelParams model_params(const Config& c) {
    ModelParams p;
    p.N = c.integer("N");
    p.delta = c.number("delta");
    p.g = c.number("g");
    p.emitter_frequency = c.number("Delta");
    const std::string& end = c.text("end");
    if (end == "left") p.end = CoupledEnd::left;
    else if (end == "right") p.end = CoupledEnd::right;
    else throw ParameterError("key 'end' must be left or right, got '" + end + "'");
    p.validate();
    return p;
}

std::optional<DisorderSpec> disorder(const Config& c) {
    const double W = c.number("W");
    if (W < 0.0) throw ParameterError("key 'W' must be >= 0");
    if (W == 0.0) return std::nullopt;
    return DisorderSpec{W, c.unsigned_integer("seed")};
}

TimeGrid uniform_grid(const Config& c) {
    const int nt = c.integer("nt");
    if (nt < 1) throw ParameterError("key 'nt' must be >= 1");
    return TimeGrid::linspace(c.number("t0"), c.number("t1"), nt);
}

std::vector<double> main_times(const Config& c) {
    auto t = c.list("times");
    if (t.empty()) throw ParameterError("key 'times' lists no times");
    for (double x : t)
        if (!(x > 0.0)) throw ParameterError("key 'times' must hold positive times");
    return t;
}

double or_default(const Config& c, const std::string& key, double fallback) {
    return c.text(key).empty() ? fallback : c.number(key);
}

EstimationConfig estimation(const Config& c) {
    EstimationConfig e;
    e.which = parse_parameter(c.text("which"));
    e.base = model_params(c);
    const PriorInterval prior = default_prior(e.which);
    e.prior.lo = or_default(c, "prior_lo", prior.lo);
    e.prior.hi = or_default(c, "prior_hi", prior.hi);
    e.prior.n_grid = c.integer("n_grid");
    e.x_true = or_default(c, "x_true", e.which == Parameter::g ? 0.1 : 0.2);
    e.shots = c.integer("M");
    e.n_samples = c.integer("n_samples");
    e.seed = c.unsigned_integer("seed");
    e.companion_factors = c.list("companion");
    e.anchor_times = c.list("anchor");
    e.validate();
    return e;
}

double analytic_or_nan(const ModelParams& p, double (*f)(const ModelParams&)) {
    try {
        return f(p);
    } catch (const ParameterError&) {
        return kNaN;
    }
}

// Energies and, when a pair exists, the bound-state amplitudes.
void write_bands(Run& run) {
    const Config& c = run.config();
    const ModelParams p = model_params(c);
    const auto H = build_hamiltonian(p, disorder(c));
    const Spectrum s = eigendecompose(H);
    const Eigen::VectorXd w = s.emitter_weights();
    const double gap = std::abs(p.delta);
    {
        auto os = run.open("energies.csv");
        os << "index,energy,emitter_weight,in_gap\n";
        for (Eigen::Index k = 0; k < s.energies.size(); ++k)
            os << k << ',' << s.energies(k) << ',' << w(k) << ','
               << (std::abs(s.energies(k)) < 2.0 * gap - kGapEpsilon ? 1 : 0) << '\n';
    }
    const int n_gap = count_in_gap(s.energies, p.delta);
    run.log("in-gap states: " + std::to_string(n_gap));
    try {
        const BoundStatePair pair = numeric_bound_states(s, p);
        auto os = run.open("bound_states.csv");
        write_bound_states_csv(os, pair);
        const bool clean = c.number("W") == 0.0;
        auto summary = run.open("bound_energy.csv");
        summary << "quantity,numeric,analytic\n";
        summary << "energy," << pair.energy << ',' << (clean ? analytic_or_nan(p, analytic_bound_energy) : kNaN) << '\n';
        summary << "overlap," << pair.overlap << ',' << (clean ? analytic_or_nan(p, analytic_overlap) : kNaN)
                << '\n';
        summary << "q,nan," << (clean ? analytic_or_nan(p, siegert_factor) : kNaN) << '\n';
        run.log("E_B = " + fmt(pair.energy) + ", b = " + fmt(pair.overlap));
    } catch (const TopologyError& e) {
        run.log(std::string("no bound-state pair: ") + e.what());
    }
}

// Relative Cramer-Rao bound 1 / (M x^2 sum F) over the records chained at t.
std::vector<double> relative_crb(const EstimationConfig& e, const std::vector<double>& times) {
    std::vector<double> all;
    for (double t : times)
        for (double tt : e.times_at(t)) all.push_back(tt);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    const FisherTrace F = fisher_numeric(e.true_params(), e.which, TimeGrid(all));
    std::map<double, double> at;
    for (std::size_t i = 0; i < all.size(); ++i) at[all[i]] = F.values[i];
    std::vector<double> out;
    for (double t : times) {
        double sum = 0.0;
        for (double tt : e.times_at(t)) sum += at[tt];
        out.push_back(sum > 0.0 ? 1.0 / (static_cast<double>(e.shots) * e.x_true * e.x_true * sum) : kNaN);
    }
    return out;
}

std::vector<AverageErrorResult> parallel_sweep(const EstimationConfig& e, const std::vector<double>& times,
                                               const ModelGrid& model, const P1Source& data, int workers) {
    std::vector<AverageErrorResult> out(times.size());
    parallel_for(times.size(), workers, [&](std::size_t k) {
        EstimationConfig ck = e;
        ck.t = times[k];
        out[k] = average_error(ck, model, data);
    });
    return out;
}

void write_error_table(std::ostream& os, const std::vector<AverageErrorResult>& r, const std::vector<double>& crb) {
    os << "t,mean_delta_sq,stderr,mean_variance,mean_estimate,crb,hl_ref,sql_ref\n";
    const double t0 = r.front().t, e0 = r.front().mean_delta_sq;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double ratio = t0 / r[k].t;
        os << r[k].t << ',' << r[k].mean_delta_sq << ',' << r[k].stderr_delta_sq << ',' << r[k].mean_variance << ','
           << r[k].mean_estimate << ',' << crb[k] << ',' << e0 * ratio * ratio << ',' << e0 * ratio << '\n';
    }
}

DisorderInference inference(const Config& c) {
    const std::string& s = c.text("inference");
    if (s == "matched") return DisorderInference::matched;
    if (s == "clean") return DisorderInference::clean;
    throw ParameterError("key 'inference' must be matched or clean, got '" + s + "'");
}

int realizations(const Config& c) {
    const int n = c.integer("n_realizations");
    if (n < 1) throw ParameterError("key 'n_realizations' must be >= 1");
    return n;
}

double rate(const std::string& key, double value) {
    if (!(value >= 0.0)) throw ParameterError("key '" + key + "' must hold values >= 0");
    return value;
}

// Errors vs time; W > 0 averages over disorder draws, gamma > 0 uses dephased data.
void write_bayes_time(Run& run) {
    const Config& c = run.config();
    const EstimationConfig e = estimation(c);
    const auto times = main_times(c);
    const double W = rate("W", c.number("W"));
    const double gamma = rate("gamma", c.number("gamma"));
    if (W > 0.0 && gamma > 0.0) throw ParameterError("W and gamma cannot both be nonzero");
    run.log("building model grid (" + std::to_string(e.prior.n_grid) + " points)");
    const ModelGrid model(e.base, e.which, e.prior, std::nullopt, run.workers());
    std::vector<AverageErrorResult> r;
    if (W > 0.0) {
        run.log("disorder W = " + fmt(W) + ", " + std::to_string(realizations(c)) + " realizations");
        r = disorder_averaged_errors(e, times, W, realizations(c), model, inference(c), run.workers());
    } else if (gamma > 0.0) {
        run.log("dephasing gamma = " + fmt(gamma));
        r = dephasing_errors(e, times, gamma, model);
    } else {
        r = parallel_sweep(e, times, model, clean_source(e.true_params()), run.workers());
    }
    auto os = run.open("errors.csv");
    write_error_table(os, r, relative_crb(e, times));
}

void cmd_bands(Run& run) { write_bands(run); }

void cmd_dynamics(Run& run) {
    const Config& c = run.config();
    const ModelParams p = model_params(c);
    const auto H = build_hamiltonian(p, disorder(c));
    const TimeGrid grid = uniform_grid(c);
    const auto trace = excited_population(emitter_spectrum(H), grid);
    const double gamma = rate("gamma", c.number("gamma"));
    std::optional<LindbladResult> dephased;
    if (gamma > 0.0) {
        run.log("integrating the master equation, gamma = " + fmt(gamma));
        dephased = lindblad_evolve(H, gamma, grid);
    }
    bool analytic = true;
    try {
        require_analytic_regime(p);
    } catch (const ParameterError& e) {
        analytic = false;
        run.log(std::string("closed forms unavailable: ") + e.what());
    }
    auto os = run.open("trace.csv");
    os << "t,p1,p1_approx,p1_rabi" << (dephased ? ",p1_dephased" : "") << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        os << t << ',' << trace.p1[i] << ',' << (analytic ? approx_population(p, t) : kNaN) << ','
           << (analytic ? rabi_reference(p, t) : kNaN);
        if (dephased) os << ',' << dephased->trace.p1[i];
        os << '\n';
    }
}

void cmd_fisher(Run& run) {
    const Config& c = run.config();
    const ModelParams p = model_params(c);
    const Parameter which = parse_parameter(c.text("which"));
    const TimeGrid grid = uniform_grid(c);
    std::optional<FisherTrace> F;
    if (disorder(c)) {
        // numeric derivative over a fixed disorder draw
        const auto spec = disorder(c);
        const double x = get_parameter(p, which), h = c.number("step");
        if (!(h > 0.0)) throw ParameterError("key 'step' must be > 0");
        const auto hi = excited_population(emitter_spectrum(build_hamiltonian(with_parameter(p, which, x + h), spec)), grid);
        const auto lo = excited_population(emitter_spectrum(build_hamiltonian(with_parameter(p, which, x - h), spec)), grid);
        const auto mid = excited_population(emitter_spectrum(build_hamiltonian(p, spec)), grid);
        FisherTrace t;
        t.grid = grid;
        t.parameter = which;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double p1 = mid.raw[i], d = (hi.raw[i] - lo.raw[i]) / (2 * h), den = p1 * (1 - p1);
            t.p1.push_back(mid.p1[i]);
            t.valid.push_back(den >= kFisherMaskFloor);
            t.values.push_back(den >= kFisherMaskFloor ? d * d / den : 0.0);
        }
        F = std::move(t);
    } else {
        F = fisher_numeric(p, which, grid, c.number("step"));
    }
    bool analytic = true;
    try {
        bound_energy_derivative(p, which);
    } catch (const ParameterError& e) {
        analytic = false;
        run.log(std::string("closed forms unavailable: ") + e.what());
    }
    auto os = run.open("fisher.csv");
    os << "t,F,F_approx,A,F_rabi,p1,masked\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        os << t << ',' << F->values[i] << ',' << (analytic ? fisher_approx(p, which, t) : kNaN) << ','
           << (analytic ? dip_factor(p, t) : kNaN) << ',' << (analytic ? rabi_fisher(p, which, t) : kNaN) << ','
           << F->p1[i] << ',' << (F->valid[i] ? 0 : 1) << '\n';
    }
}

void cmd_bayes_time(Run& run) { write_bayes_time(run); }

void cmd_bayes_range(Run& run) {
    const Config& c = run.config();
    EstimationConfig e = estimation(c);
    const auto times = main_times(c);
    auto xs = c.list("x_values");
    if (xs.empty())
        xs = e.which == Parameter::g ? parse_list("0.04:0.16:0.02") : parse_list("0.1:0.3:0.025");
    const ModelGrid model(e.base, e.which, e.prior, std::nullopt, run.workers());
    struct Cell {
        double t, x;
        AverageErrorResult r;
    };
    std::vector<Cell> cells;
    for (double t : times)
        for (double x : xs) cells.push_back({t, x, {}});
    parallel_for(cells.size(), run.workers(), [&](std::size_t k) {
        EstimationConfig ck = e;
        ck.t = cells[k].t;
        ck.x_true = cells[k].x;
        ck.validate();
        cells[k].r = average_error(ck, model, clean_source(ck.true_params()));
    });
    auto os = run.open("range.csv");
    os << "t,x_true,mean_delta_sq,stderr,mean_variance,mean_estimate\n";
    for (const auto& cell : cells)
        os << cell.t << ',' << cell.x << ',' << cell.r.mean_delta_sq << ',' << cell.r.stderr_delta_sq << ','
           << cell.r.mean_variance << ',' << cell.r.mean_estimate << '\n';
}

void cmd_posterior(Run& run) {
    const Config& c = run.config();
    const EstimationConfig e = estimation(c);
    const auto times = main_times(c);
    const ModelGrid model(e.base, e.which, e.prior, std::nullopt, run.workers());
    const P1Source data = clean_source(e.true_params());
    auto summary = run.open("posterior_summary.csv");
    summary << "t,mean,variance,argmax,delta_sq\n";
    for (double t : times) {
        const auto chain = e.times_at(t);
        const PosteriorGrid post = sequential_estimate(e, chain, model, data);
        auto os = run.open("posterior_t" + fmt(t) + ".csv");
        write_posterior_csv(os, post);
        const auto s = summarize(post, e.x_true);
        summary << t << ',' << s.mean << ',' << s.variance << ',' << post.x()[post.argmax()] << ',' << s.delta_sq
                << '\n';
    }
}

void cmd_disorder(Run& run) {
    const Config& c = run.config();
    const EstimationConfig e = estimation(c);
    const auto times = main_times(c);
    const auto Ws = c.list("W_list");
    const DisorderInference inf = inference(c);
    const int R = realizations(c);
    const ModelGrid model(e.base, e.which, e.prior, std::nullopt, run.workers());
    auto os = run.open("disorder.csv");
    os << "W,t,mean_delta_sq,stderr,mean_variance,mean_estimate\n";
    for (double W : Ws) {
        rate("W_list", W);
        run.log("W = " + fmt(W) + " (" + c.text("inference") + " inference, " + std::to_string(R) + " realizations)");
        const auto r = W > 0.0 ? disorder_averaged_errors(e, times, W, R, model, inf, run.workers())
                               : parallel_sweep(e, times, model, clean_source(e.true_params()), run.workers());
        for (const auto& x : r)
            os << W << ',' << x.t << ',' << x.mean_delta_sq << ',' << x.stderr_delta_sq << ',' << x.mean_variance
               << ',' << x.mean_estimate << '\n';
        os.flush();
    }
}

void cmd_dephasing(Run& run) {
    const Config& c = run.config();
    const EstimationConfig e = estimation(c);
    const auto times = main_times(c);
    const auto gammas = c.list("gamma_list");
    for (double g : gammas) rate("gamma_list", g);
    const ModelGrid model(e.base, e.which, e.prior, std::nullopt, run.workers());
    run.log("integrating " + std::to_string(gammas.size()) + " master equations");
    std::vector<std::vector<AverageErrorResult>> r(gammas.size());
    parallel_for(gammas.size(), run.workers(), [&](std::size_t k) {
        r[k] = gammas[k] > 0.0 ? dephasing_errors(e, times, gammas[k], model)
                               : time_sweep(e, times, model, clean_source(e.true_params()));
    });
    auto os = run.open("dephasing.csv");
    os << "gamma,t,mean_delta_sq,stderr,mean_variance,mean_estimate,sql_ref\n";
    for (std::size_t k = 0; k < gammas.size(); ++k) {
        const double t0 = r[k].front().t, e0 = r[k].front().mean_delta_sq;
        for (const auto& x : r[k])
            os << gammas[k] << ',' << x.t << ',' << x.mean_delta_sq << ',' << x.stderr_delta_sq << ','
               << x.mean_variance << ',' << x.mean_estimate << ',' << e0 * t0 / x.t << '\n';
    }
}

void cmd_finite_size(Run& run) {
    const Config& c = run.config();
    const ModelParams base = model_params(c);
    const Parameter which = parse_parameter(c.text("which"));
    const TimeGrid grid = uniform_grid(c);
    const auto Ns = c.integer_list("N_list");
    if (Ns.empty()) throw ParameterError("key 'N_list' lists no sizes");
    std::vector<FisherTrace> F(Ns.size());
    for (int n : Ns) {
        ModelParams p = base;
        p.N = n;
        p.validate();
    }
    parallel_for(Ns.size(), run.workers(), [&](std::size_t k) {
        ModelParams p = base;
        p.N = Ns[k];
        F[k] = fisher_numeric(p, which, grid, c.number("step"));
    });
    auto os = run.open("finite_size.csv");
    os << "N,t,F,masked\n";
    for (std::size_t k = 0; k < Ns.size(); ++k)
        for (std::size_t i = 0; i < grid.size(); ++i)
            os << Ns[k] << ',' << grid[i] << ',' << F[k].values[i] << ',' << (F[k].valid[i] ? 0 : 1) << '\n';
}

void cmd_even_n(Run& run) {
    if (run.config().integer("N") % 2 != 0) run.log("warning: N is odd");
    write_bands(run);
    write_bayes_time(run);
}

}  // namespace

std::string csv_schema(const std::string& command) {
    static const std::map<std::string, std::string> s{
        {"bands",
         "energies.csv: index,energy,emitter_weight,in_gap\n"
         "bound_states.csv: index,label,amplitude_plus,amplitude_minus (label emitter or site-n)\n"
         "bound_energy.csv: quantity,numeric,analytic (rows energy, overlap, q)"},
        {"dynamics", "trace.csv: t,p1,p1_approx,p1_rabi[,p1_dephased when gamma > 0]"},
        {"fisher", "fisher.csv: t,F,F_approx,A,F_rabi,p1,masked"},
        {"bayes-time",
         "errors.csv: t,mean_delta_sq,stderr,mean_variance,mean_estimate,crb,hl_ref,sql_ref\n"
         "  delta_sq is relative to x_true^2; crb = 1/(M x^2 sum F) over the chained records;\n"
         "  hl_ref and sql_ref are t^-2 and t^-1 lines through the first row"},
        {"bayes-range", "range.csv: t,x_true,mean_delta_sq,stderr,mean_variance,mean_estimate"},
        {"posterior",
         "posterior_t<t>.csv: x,weight (one file per time)\n"
         "posterior_summary.csv: t,mean,variance,argmax,delta_sq"},
        {"disorder", "disorder.csv: W,t,mean_delta_sq,stderr,mean_variance,mean_estimate"},
        {"dephasing", "dephasing.csv: gamma,t,mean_delta_sq,stderr,mean_variance,mean_estimate,sql_ref"},
        {"finite-size", "finite_size.csv: N,t,F,masked"},
        {"even-n", "energies.csv, bound_states.csv, bound_energy.csv as bands; errors.csv as bayes-time"},
    };
    const auto it = s.find(command);
    return it == s.end() ? "" : it->second + "\nmanifest.json: command, config, version, eigen_version, outputs";
}

ErrorClass classify(const std::exception& e) {
    if (dynamic_cast<const NumericalError*>(&e)) return {"numerical", 2};
    if (dynamic_cast<const ParameterError*>(&e)) return {"validation", 1};
    return {"runtime", 2};
}

void execute(Run& run) {
    static const std::map<std::string, void (*)(Run&)> table{
        {"bands", cmd_bands},           {"dynamics", cmd_dynamics},   {"fisher", cmd_fisher},
        {"bayes-time", cmd_bayes_time}, {"bayes-range", cmd_bayes_range}, {"posterior", cmd_posterior},
        {"disorder", cmd_disorder},     {"dephasing", cmd_dephasing}, {"finite-size", cmd_finite_size},
        {"even-n", cmd_even_n},
    };
    const auto it = table.find(run.command());
    if (it == table.end()) throw ParameterError("unknown command '" + run.command() + "'");
    it->second(run);
}

}  // namespace topowg::cli
