#include <optional>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "topowg/bayes.hpp"
#include "topowg/bound_states.hpp"
#include "topowg/dynamics.hpp"
#include "topowg/errors.hpp"
#include "topowg/fisher.hpp"
#include "topowg/model.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace topowg;

namespace {

std::optional<DisorderSpec> disorder(double W, std::uint64_t seed) {
    if (W < 0.0) throw ParameterError("disorder strength W must be >= 0");
    if (W == 0.0) return std::nullopt;
    return DisorderSpec{W, seed};
}

EstimationConfig estimation(const ModelParams& params, const std::string& which, double x_true, double t, long shots,
                            int n_samples, std::uint64_t seed, std::optional<double> prior_lo,
                            std::optional<double> prior_hi, int n_grid, std::vector<double> anchors,
                            std::vector<double> companions) {
    EstimationConfig e;
    e.which = parse_parameter(which);
    e.base = params;
    e.x_true = x_true;
    e.t = t;
    e.shots = shots;
    e.n_samples = n_samples;
    e.seed = seed;
    e.prior = default_prior(e.which);
    if (prior_lo) e.prior.lo = *prior_lo;
    if (prior_hi) e.prior.hi = *prior_hi;
    e.prior.n_grid = n_grid;
    e.anchor_times = std::move(anchors);
    e.companion_factors = std::move(companions);
    e.validate();
    return e;
}

}  // namespace

PYBIND11_MODULE(_topowg, m) {
    m.doc() = "Emitter coupled to the end of an SSH waveguide";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto param = py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<OutOfGapError>(m, "OutOfGapError", param.ptr());
    py::register_exception<DegenerateCouplingError>(m, "DegenerateCouplingError", param.ptr());
    py::register_exception<TopologyError>(m, "TopologyError", param.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    py::enum_<CoupledEnd>(m, "CoupledEnd").value("left", CoupledEnd::left).value("right", CoupledEnd::right);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](int N, double delta, double g, double Delta, CoupledEnd end) {
                 ModelParams p;
                 p.N = N;
                 p.delta = delta;
                 p.g = g;
                 p.emitter_frequency = Delta;
                 p.end = end;
                 p.validate();
                 return p;
             }),
             "N"_a = 201, "delta"_a = 0.2, "g"_a = 0.1, "Delta"_a = 0.0, "end"_a = CoupledEnd::left)
        .def_readwrite("N", &ModelParams::N)
        .def_readwrite("delta", &ModelParams::delta)
        .def_readwrite("g", &ModelParams::g)
        .def_readwrite("Delta", &ModelParams::emitter_frequency)
        .def_readwrite("end", &ModelParams::end)
        .def_property_readonly("effective_delta", &ModelParams::effective_delta)
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(N=" + std::to_string(p.N) + ", delta=" + std::to_string(p.delta) +
                   ", g=" + std::to_string(p.g) + ", Delta=" + std::to_string(p.emitter_frequency) + ")";
        });

    m.def(
        "hamiltonian",
        [](const ModelParams& p, double W, std::uint64_t seed) { return build_hamiltonian(p, disorder(W, seed)).dense(); },
        "params"_a, "W"_a = 0.0, "seed"_a = 0, "Dense (N+1)x(N+1) Hamiltonian; index 0 is the excited emitter.");

    m.def(
        "spectrum",
        [](const ModelParams& p, double W, std::uint64_t seed) {
            const Spectrum s = eigendecompose(build_hamiltonian(p, disorder(W, seed)));
            return py::make_tuple(s.energies, s.vectors);
        },
        "params"_a, "W"_a = 0.0, "seed"_a = 0, "Energies (ascending) and eigenvectors as columns.");

    m.def("analytic_bound_energy", &analytic_bound_energy, "params"_a);
    m.def("analytic_overlap", &analytic_overlap, "params"_a);
    m.def("siegert_factor", &siegert_factor, "params"_a);
    m.def(
        "bound_states",
        [](const ModelParams& p, double W, std::uint64_t seed) {
            const auto H = build_hamiltonian(p, disorder(W, seed));
            const BoundStatePair b = numeric_bound_states(eigendecompose(H), p);
            return py::dict("energy"_a = b.energy, "overlap"_a = b.overlap, "plus"_a = b.plus, "minus"_a = b.minus);
        },
        "params"_a, "W"_a = 0.0, "seed"_a = 0, "Numeric in-gap pair: energy, overlap, plus, minus.");

    m.def(
        "excited_population",
        [](const ModelParams& p, std::vector<double> times, double W, std::uint64_t seed) {
            const auto H = build_hamiltonian(p, disorder(W, seed));
            return excited_population(emitter_spectrum(H), TimeGrid(std::move(times))).p1;
        },
        "params"_a, "times"_a, "W"_a = 0.0, "seed"_a = 0, "P1(t) = |<psi_0|exp(-iHt)|psi_0>|^2.");
    m.def("approx_population", &approx_population, "params"_a, "t"_a);
    m.def(
        "dephased_population",
        [](const ModelParams& p, double gamma, std::vector<double> times) {
            return lindblad_evolve(build_hamiltonian(p), gamma, TimeGrid(std::move(times))).trace.p1;
        },
        "params"_a, "gamma"_a, "times"_a, "P1(t) under emitter dephasing at rate gamma.");

    m.def(
        "fisher_information",
        [](const ModelParams& p, const std::string& which, std::vector<double> times, double step) {
            const auto F = fisher_numeric(p, parse_parameter(which), TimeGrid(std::move(times)), step);
            return py::make_tuple(F.values, std::vector<bool>(F.valid.begin(), F.valid.end()));
        },
        "params"_a, "which"_a, "times"_a, "step"_a = 1e-5, "Numeric Fisher information and its validity mask.");
    m.def(
        "fisher_approx",
        [](const ModelParams& p, const std::string& which, double t) { return fisher_approx(p, parse_parameter(which), t); },
        "params"_a, "which"_a, "t"_a);
    m.def(
        "bound_energy_derivative",
        [](const ModelParams& p, const std::string& which) { return bound_energy_derivative(p, parse_parameter(which)); },
        "params"_a, "which"_a);
    m.def("dip_factor", &dip_factor, "params"_a, "t"_a);

    m.def(
        "average_error",
        [](const ModelParams& p, const std::string& which, double x_true, double t, long shots, int n_samples,
           std::uint64_t seed, std::optional<double> prior_lo, std::optional<double> prior_hi, int n_grid,
           std::vector<double> anchors, std::vector<double> companions) {
            const auto e = estimation(p, which, x_true, t, shots, n_samples, seed, prior_lo, prior_hi, n_grid,
                                      std::move(anchors), std::move(companions));
            const ModelGrid model(e.base, e.which, e.prior);
            const auto r = average_error(e, model, clean_source(e.true_params()));
            return py::dict("t"_a = r.t, "mean_delta_sq"_a = r.mean_delta_sq, "stderr"_a = r.stderr_delta_sq,
                            "mean_variance"_a = r.mean_variance, "mean_estimate"_a = r.mean_estimate);
        },
        "params"_a, "which"_a, "x_true"_a, "t"_a, "shots"_a = 10000, "n_samples"_a = 100, "seed"_a = 1,
        "prior_lo"_a = py::none(), "prior_hi"_a = py::none(), "n_grid"_a = 2001,
        "anchors"_a = std::vector<double>{10.0}, "companions"_a = std::vector<double>{},
        "Mean squared relative error of the grid posterior over n_samples simulated records.");

    m.def(
        "posterior",
        [](const ModelParams& p, const std::string& which, double x_true, double t, long shots, std::uint64_t seed,
           std::optional<double> prior_lo, std::optional<double> prior_hi, int n_grid, std::vector<double> anchors,
           std::vector<double> companions) {
            const auto e = estimation(p, which, x_true, t, shots, 1, seed, prior_lo, prior_hi, n_grid,
                                      std::move(anchors), std::move(companions));
            const ModelGrid model(e.base, e.which, e.prior);
            const PosteriorGrid post = sequential_estimate(e, e.times(), model, clean_source(e.true_params()));
            return py::make_tuple(post.x(), post.weights());
        },
        "params"_a, "which"_a, "x_true"_a, "t"_a, "shots"_a = 10000, "seed"_a = 1, "prior_lo"_a = py::none(),
        "prior_hi"_a = py::none(), "n_grid"_a = 2001, "anchors"_a = std::vector<double>{10.0},
        "companions"_a = std::vector<double>{}, "Grid points and posterior weights of one simulated record.");
}
