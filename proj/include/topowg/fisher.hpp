#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "topowg/dynamics.hpp"
#include "topowg/model.hpp"

namespace topowg {

/// Parameter being sensed.
enum class Parameter { g, delta };

std::string_view to_string(Parameter p) noexcept;
/// Accepts "g" and "delta"; throws ParameterError otherwise.
Parameter parse_parameter(std::string_view name);

double get_parameter(const ModelParams& params, Parameter which) noexcept;
ModelParams with_parameter(ModelParams params, Parameter which, double value) noexcept;

/// Classical Fisher information of the emitter measurement on a grid.
/// Points with P1(1 - P1) below the floor are masked (valid = false, value 0).
struct FisherTrace {
    TimeGrid grid;
    std::vector<double> values;
    std::vector<bool> valid;
    std::vector<double> p1;
    Parameter parameter = Parameter::g;
};

inline constexpr double kFisherMaskFloor = 1e-10;

/// F_x = (dP1/dx)^2 / (P1 (1 - P1)), with dP1/dx from a central
/// difference over two full spectra at x +/- step.
FisherTrace fisher_numeric(const ModelParams& params, Parameter which, const TimeGrid& grid, double step = 1e-5);

/// Closed-form dE_B/dx.
double bound_energy_derivative(const ModelParams& params, Parameter which);

/// A(t) = 4b^4 sin^2(E_B t) / (1 - 4b^4 cos^2(E_B t)), in [0, 1].
double dip_factor(const ModelParams& params, double t);

/// 4 (dE_B/dx)^2 A(t) t^2.
double fisher_approx(const ModelParams& params, Parameter which, double t);

/// 4 (dE_B/dx)^2 t^2, the envelope of fisher_approx.
double rabi_fisher(const ModelParams& params, Parameter which, double t);

/// CSV with header "t,F,masked".
void write_fisher_csv(std::ostream& os, const FisherTrace& trace);

}  // namespace topowg
