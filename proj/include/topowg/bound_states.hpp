#pragma once

#include <iosfwd>

#include <Eigen/Dense>

#include "topowg/model.hpp"

namespace topowg {

/// The pair of in-gap states at +/-E_B localized around the emitter.
///
/// Amplitude vectors live in the single-excitation basis and are gauge
/// fixed so that the emitter component (index 0) is nonnegative.
struct BoundStatePair {
    double energy = 0.0;   ///< E_B > 0
    double overlap = 0.0;  ///< b = |<Phi_B|psi_0>|
    double q = 0.0;        ///< per-unit-cell amplitude factor, |q| < 1
    double d1 = 0.0;       ///< sublattice amplitudes of the Siegert ansatz
    double d2 = 0.0;
    Eigen::VectorXd plus;   ///< state at +E_B
    Eigen::VectorXd minus;  ///< state at -E_B
};

/// Throws the documented errors unless the closed forms apply: emitter at
/// the band centre, a zero mode at the coupled end, 0 < |g| < 2|delta|.
void require_analytic_regime(const ModelParams& params);

/// E_B = g sqrt(1 + J-^2 / (g^2 - J+^2)).
double analytic_bound_energy(const ModelParams& params);

/// q = J- J+ / (g^2 - J+^2).
double siegert_factor(const ModelParams& params);

/// Emitter overlap b of either bound state.
double analytic_overlap(const ModelParams& params);

enum class Branch { plus, minus };

struct SiegertWavefunction {
    Eigen::VectorXd amplitudes;
    /// |q|^(N/2): weight of the geometric tail cut off by the finite chain.
    double truncation = 0.0;
    /// Set when the truncation exceeds 1e-8 and the closed form is only approximate.
    bool finite_size_warning = false;
};

/// Closed-form wavefunction: c_1 = E b / g, c_2 = b (g^2 - E^2) / (g J-),
/// then c_{n+2} = q c_n, renormalized after truncation to N sites.
SiegertWavefunction analytic_wavefunction(const ModelParams& params, Branch branch);

/// E_B, b, q, d1, d2 and both wavefunctions.
BoundStatePair analytic_bound_states(const ModelParams& params);

/// In-gap tolerance: a state is in the gap when |E| < 2|delta| - kGapEpsilon.
inline constexpr double kGapEpsilon = 1e-6;

/// Number of eigenvalues strictly inside the middle gap.
int count_in_gap(const Eigen::VectorXd& energies, double delta);

/// Picks the +/- pair with the largest emitter components out of the
/// in-gap states. Expects 2 in-gap states, or 3 for an even chain whose
/// far end carries its own zero mode. Throws TopologyError otherwise.
BoundStatePair numeric_bound_states(const Spectrum& spectrum, const ModelParams& params);

/// CSV with columns index,label,amplitude_plus,amplitude_minus.
void write_bound_states_csv(std::ostream& os, const BoundStatePair& pair);

}  // namespace topowg
