#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include "topowg/model.hpp"

namespace topowg {

/// Strictly increasing, finite, nonnegative times in units of 1/J.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> t);

    /// n points from t0 to t1 inclusive.
    static TimeGrid linspace(double t0, double t1, int n);

    const std::vector<double>& values() const noexcept { return t_; }
    std::size_t size() const noexcept { return t_.size(); }
    double operator[](std::size_t i) const { return t_[i]; }

private:
    std::vector<double> t_;
};

/// Excited-emitter population on a time grid. `p1` is clamped to [0, 1];
/// `raw` keeps the unclamped values.
struct OccupationTrace {
    TimeGrid grid;
    std::vector<double> p1;
    std::vector<double> raw;
};

/// S(t) = sum_k |c_k|^2 exp(-i E_k t).
std::complex<double> survival_amplitude(const EmitterSpectrum& spectrum, double t);
std::complex<double> survival_amplitude(const Spectrum& spectrum, double t);

/// P1(t) = |S(t)|^2 on the grid. Throws NumericalError if a raw value
/// leaves [-1e-9, 1 + 1e-9].
OccupationTrace excited_population(const EmitterSpectrum& spectrum, const TimeGrid& grid);
OccupationTrace excited_population(const Spectrum& spectrum, const TimeGrid& grid);

/// 4 b^4 cos^2(E_B t).
double approx_population(const ModelParams& params, double t);

/// cos^2(E_B t), the bare Rabi baseline.
double rabi_reference(const ModelParams& params, double t);

/// Full state |psi(t)> = exp(-iHt)|psi_0> in the single-excitation basis.
Eigen::VectorXcd evolve_state(const Spectrum& spectrum, double t);

struct LindbladOptions {
    double max_step = 0.01;          ///< upper bound on the RK4 step
    double richardson_tol = 1e-7;    ///< accepted |rho_h - rho_{h/2}|_max at the final time
    int max_refinements = 4;         ///< step halvings before giving up
    double conservation_tol = 1e-9;  ///< trace and hermiticity drift
};

struct LindbladResult {
    OccupationTrace trace;
    double step = 0.0;                     ///< base step of the accepted (finer) run
    double richardson_discrepancy = 0.0;   ///< max |rho_h - rho_{h/2}| at the final time
    double trace_error = 0.0;              ///< max |tr rho - 1| over the grid
    double hermiticity_error = 0.0;        ///< max |rho - rho^dag| over the grid
};

/// Emitter dephasing: d rho/dt = -i[H, rho] + gamma (P rho P - {P, rho}/2)
/// with P the excited-emitter projector (basis index 0), starting from
/// the excited emitter. Classical RK4 with step
/// h = min(max_step, 0.1 / max(|H|, gamma)), subdivided to land on every
/// grid time, checked against a run at h/2.
LindbladResult lindblad_evolve(const SingleExcitationHamiltonian& H, double gamma, const TimeGrid& grid,
                               const LindbladOptions& options = {});

/// CSV with header "t,p1".
void write_trace_csv(std::ostream& os, const OccupationTrace& trace);

}  // namespace topowg
