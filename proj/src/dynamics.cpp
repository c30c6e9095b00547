#include "topowg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "topowg/bound_states.hpp"
#include "topowg/errors.hpp"

namespace topowg {

TimeGrid::TimeGrid(std::vector<double> t) : t_(std::move(t)) {
    for (std::size_t i = 0; i < t_.size(); ++i) {
        if (!std::isfinite(t_[i]) || t_[i] < 0.0)
            throw ParameterError("time grid values must be finite and nonnegative");
        if (i > 0 && !(t_[i] > t_[i - 1])) throw ParameterError("time grid must be strictly increasing");
    }
}

TimeGrid TimeGrid::linspace(double t0, double t1, int n) {
    if (n < 1) throw ParameterError("time grid needs at least one point");
    if (n == 1) return TimeGrid({t0});
    std::vector<double> t(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) t[i] = t0 + (t1 - t0) * static_cast<double>(i) / (n - 1);
    return TimeGrid(std::move(t));
}

std::complex<double> survival_amplitude(const EmitterSpectrum& spectrum, double t) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index k = 0; k < spectrum.energies.size(); ++k) {
        const double phase = spectrum.energies(k) * t;
        re += spectrum.weights(k) * std::cos(phase);
        im -= spectrum.weights(k) * std::sin(phase);
    }
    return {re, im};
}

std::complex<double> survival_amplitude(const Spectrum& spectrum, double t) {
    return survival_amplitude(EmitterSpectrum{spectrum.energies, spectrum.emitter_weights()}, t);
}

namespace {

double checked_probability(double raw, double t) {
    if (!(raw >= -1e-9 && raw <= 1.0 + 1e-9))
        throw NumericalError("population " + std::to_string(raw) + " outside [0, 1] at t = " + std::to_string(t));
    return std::clamp(raw, 0.0, 1.0);
}

}  // namespace

OccupationTrace excited_population(const EmitterSpectrum& spectrum, const TimeGrid& grid) {
    OccupationTrace out{grid, {}, {}};
    out.p1.reserve(grid.size());
    out.raw.reserve(grid.size());
    for (double t : grid.values()) {
        const double raw = std::norm(survival_amplitude(spectrum, t));
        out.raw.push_back(raw);
        out.p1.push_back(checked_probability(raw, t));
    }
    return out;
}

OccupationTrace excited_population(const Spectrum& spectrum, const TimeGrid& grid) {
    return excited_population(EmitterSpectrum{spectrum.energies, spectrum.emitter_weights()}, grid);
}

double approx_population(const ModelParams& params, double t) {
    const double b = analytic_overlap(params);
    const double c = std::cos(analytic_bound_energy(params) * t);
    return 4.0 * b * b * b * b * c * c;
}

double rabi_reference(const ModelParams& params, double t) {
    const double c = std::cos(analytic_bound_energy(params) * t);
    return c * c;
}

Eigen::VectorXcd evolve_state(const Spectrum& spectrum, double t) {
    const Eigen::Index n = spectrum.energies.size();
    Eigen::VectorXcd coeff(n);
    const std::complex<double> i(0.0, 1.0);
    for (Eigen::Index k = 0; k < n; ++k) coeff(k) = spectrum.vectors(0, k) * std::exp(-i * spectrum.energies(k) * t);
    return spectrum.vectors.cast<std::complex<double>>() * coeff;
}

namespace {

// Right-hand side of the emitter-dephasing master equation for a
// tridiagonal H. Uses rho H = (H rho)^dag, valid for Hermitian rho.
class DephasingRhs {
public:
    DephasingRhs(const SingleExcitationHamiltonian& H, double gamma)
        : d_(H.diagonal().cast<std::complex<double>>()),
          e_(H.off_diagonal().cast<std::complex<double>>()),
          gamma_(gamma),
          n_(H.dim()) {}

    void operator()(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) {
        const Eigen::Index m = n_ - 1;
        x_.noalias() = d_.asDiagonal() * rho;
        if (m > 0) {
            x_.bottomRows(m).noalias() += e_.asDiagonal() * rho.topRows(m);
            x_.topRows(m).noalias() += e_.asDiagonal() * rho.bottomRows(m);
        }
        const std::complex<double> minus_i(0.0, -1.0);
        out = minus_i * (x_ - x_.adjoint());
        if (gamma_ > 0.0 && m > 0) {
            out.row(0).tail(m) -= 0.5 * gamma_ * rho.row(0).tail(m);
            out.col(0).tail(m) -= 0.5 * gamma_ * rho.col(0).tail(m);
        }
    }

private:
    Eigen::VectorXcd d_;
    Eigen::VectorXcd e_;
    double gamma_;
    Eigen::Index n_;
    Eigen::MatrixXcd x_;
};

struct Rk4Run {
    std::vector<double> p1;
    Eigen::MatrixXcd final_rho;
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
};

Rk4Run integrate_rk4(const SingleExcitationHamiltonian& H, double gamma, const TimeGrid& grid, double h,
                     double conservation_tol) {
    const Eigen::Index n = H.dim();
    DephasingRhs rhs(H, gamma);
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
    rho(0, 0) = 1.0;
    Eigen::MatrixXcd k1(n, n), k2(n, n), k3(n, n), k4(n, n), tmp(n, n);

    Rk4Run run;
    run.p1.reserve(grid.size());
    double now = 0.0;
    for (double target : grid.values()) {
        const double span = target - now;
        if (span > 0.0) {
            const long steps = std::max(1L, static_cast<long>(std::ceil(span / h - 1e-9)));
            const double dt = span / static_cast<double>(steps);
            for (long s = 0; s < steps; ++s) {
                rhs(rho, k1);
                tmp = rho + (0.5 * dt) * k1;
                rhs(tmp, k2);
                tmp = rho + (0.5 * dt) * k2;
                rhs(tmp, k3);
                tmp = rho + dt * k3;
                rhs(tmp, k4);
                rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            now = target;
        }
        const double tr_err = std::abs(rho.trace() - 1.0);
        const double herm_err = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
        if (!std::isfinite(tr_err) || !std::isfinite(herm_err))
            throw NumericalError("Lindblad integration diverged at t = " + std::to_string(target));
        if (tr_err > conservation_tol || herm_err > conservation_tol)
            throw NumericalError("Lindblad integration lost trace or hermiticity at t = " + std::to_string(target));
        run.trace_error = std::max(run.trace_error, tr_err);
        run.hermiticity_error = std::max(run.hermiticity_error, herm_err);
        run.p1.push_back(rho(0, 0).real());
    }
    run.final_rho = std::move(rho);
    return run;
}

}  // namespace

LindbladResult lindblad_evolve(const SingleExcitationHamiltonian& H, double gamma, const TimeGrid& grid,
                               const LindbladOptions& options) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ParameterError("dephasing rate gamma must be >= 0");
    if (grid.size() == 0) throw ParameterError("empty time grid");

    double h = std::min(options.max_step, 0.1 / std::max(H.norm_inf(), gamma));
    Rk4Run coarse = integrate_rk4(H, gamma, grid, h, options.conservation_tol);
    for (int attempt = 0; attempt <= options.max_refinements; ++attempt) {
        const double fine_step = 0.5 * h;
        if (fine_step < 1e-12) break;
        Rk4Run fine = integrate_rk4(H, gamma, grid, fine_step, options.conservation_tol);
        const double discrepancy = (coarse.final_rho - fine.final_rho).cwiseAbs().maxCoeff();
        if (discrepancy < options.richardson_tol) {
            LindbladResult out;
            out.step = fine_step;
            out.richardson_discrepancy = discrepancy;
            out.trace_error = fine.trace_error;
            out.hermiticity_error = fine.hermiticity_error;
            out.trace.grid = grid;
            out.trace.raw = fine.p1;
            for (std::size_t i = 0; i < fine.p1.size(); ++i)
                out.trace.p1.push_back(checked_probability(fine.p1[i], grid[i]));
            return out;
        }
        h = fine_step;
        coarse = std::move(fine);
    }
    throw NumericalError("Lindblad step refinement did not meet the Richardson tolerance by t = " +
                         std::to_string(grid.values().back()));
}

void write_trace_csv(std::ostream& os, const OccupationTrace& trace) {
    const auto old_precision = os.precision(17);
    os << "t,p1\n";
    for (std::size_t i = 0; i < trace.grid.size(); ++i) os << trace.grid[i] << ',' << trace.p1[i] << '\n';
    os.precision(old_precision);
}

}  // namespace topowg
