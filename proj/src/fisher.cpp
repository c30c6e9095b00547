#include "topowg/fisher.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "topowg/bound_states.hpp"
#include "topowg/errors.hpp"

namespace topowg {

std::string_view to_string(Parameter p) noexcept { return p == Parameter::g ? "g" : "delta"; }

Parameter parse_parameter(std::string_view name) {
    if (name == "g") return Parameter::g;
    if (name == "delta") return Parameter::delta;
    throw ParameterError("unknown parameter '" + std::string(name) + "' (expected g or delta)");
}

double get_parameter(const ModelParams& params, Parameter which) noexcept {
    return which == Parameter::g ? params.g : params.delta;
}

ModelParams with_parameter(ModelParams params, Parameter which, double value) noexcept {
    (which == Parameter::g ? params.g : params.delta) = value;
    return params;
}

FisherTrace fisher_numeric(const ModelParams& params, Parameter which, const TimeGrid& grid, double step) {
    if (!(step > 0.0)) throw ParameterError("finite-difference step must be positive");
    const double x = get_parameter(params, which);
    const ModelParams lo = with_parameter(params, which, x - step);
    const ModelParams hi = with_parameter(params, which, x + step);
    require_analytic_regime(params);
    try {
        require_analytic_regime(lo);
        require_analytic_regime(hi);
    } catch (const ParameterError& e) {
        throw ParameterError(std::string("x +/- step leaves the in-gap domain: ") + e.what());
    }

    const auto centre = excited_population(emitter_spectrum(build_hamiltonian(params)), grid);
    const auto minus = excited_population(emitter_spectrum(build_hamiltonian(lo)), grid);
    const auto plus = excited_population(emitter_spectrum(build_hamiltonian(hi)), grid);

    FisherTrace out;
    out.grid = grid;
    out.parameter = which;
    out.p1 = centre.p1;
    out.values.resize(grid.size(), 0.0);
    out.valid.resize(grid.size(), false);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double p = centre.raw[i];
        const double var = p * (1.0 - p);
        if (var < kFisherMaskFloor) continue;
        const double deriv = (plus.raw[i] - minus.raw[i]) / (2.0 * step);
        out.values[i] = deriv * deriv / var;
        out.valid[i] = true;
    }
    return out;
}

double bound_energy_derivative(const ModelParams& params, Parameter which) {
    require_analytic_regime(params);
    const double d = params.effective_delta();
    const double jm = 1.0 - d, jp = 1.0 + d;
    const double g = params.g;
    const double den = g * g - jp * jp;
    const double ratio = 1.0 + jm * jm / den;
    const double root = std::sqrt(ratio);
    if (which == Parameter::g) {
        const double sign = g < 0.0 ? -1.0 : 1.0;
        return sign * (root - g * g * jm * jm / (den * den * root));
    }
    // dJ-/d(delta_eff) = -1, dJ+/d(delta_eff) = +1.
    const double dratio = (-2.0 * jm * den + 2.0 * jm * jm * jp) / (den * den);
    const double de_dd = std::abs(g) * dratio / (2.0 * root);
    return params.end_orientation() * de_dd;
}

double dip_factor(const ModelParams& params, double t) {
    const double b = analytic_overlap(params);
    const double b4 = 4.0 * b * b * b * b;
    const double phase = analytic_bound_energy(params) * t;
    const double s = std::sin(phase), c = std::cos(phase);
    return b4 * s * s / (1.0 - b4 * c * c);
}

double fisher_approx(const ModelParams& params, Parameter which, double t) {
    const double de = bound_energy_derivative(params, which);
    return 4.0 * de * de * dip_factor(params, t) * t * t;
}

double rabi_fisher(const ModelParams& params, Parameter which, double t) {
    const double de = bound_energy_derivative(params, which);
    return 4.0 * de * de * t * t;
}

void write_fisher_csv(std::ostream& os, const FisherTrace& trace) {
    const auto old_precision = os.precision(17);
    os << "t,F,masked\n";
    for (std::size_t i = 0; i < trace.grid.size(); ++i)
        os << trace.grid[i] << ',' << trace.values[i] << ',' << (trace.valid[i] ? 0 : 1) << '\n';
    os.precision(old_precision);
}

}  // namespace topowg
