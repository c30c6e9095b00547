#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace topowg {

/// End of the chain the emitter is attached to.
///
/// With `right`, the site basis is index-reflected: matrix index n (n >= 1)
/// refers to physical site N + 1 - n, so the coupling stays on the entry
/// (0, 1) and the matrix stays tridiagonal.
enum class CoupledEnd { left, right };

/// Emitter plus SSH chain, in units where the mean hopping J = 1.
struct ModelParams {
    int N = 201;                      ///< number of lattice sites
    double delta = 0.2;               ///< dimerization, hoppings J(1 -/+ delta)
    double g = 0.1;                   ///< emitter-chain coupling
    double emitter_frequency = 0.0;   ///< transition frequency (Delta)
    CoupledEnd end = CoupledEnd::left;

    double j_minus() const noexcept { return 1.0 - delta; }
    double j_plus() const noexcept { return 1.0 + delta; }

    /// Hopping on physical bond n (between sites n and n+1), n = 1..N-1.
    double bond_hopping(int n) const noexcept { return (n % 2 == 1) ? j_minus() : j_plus(); }

    /// Physical bond carried by matrix bond j (between matrix sites j, j+1).
    int physical_bond(int j) const noexcept { return end == CoupledEnd::left ? j : N - j; }

    /// +1 if the first bond seen from the coupled end is weak for delta > 0, else -1.
    double end_orientation() const noexcept { return physical_bond(1) % 2 == 1 ? 1.0 : -1.0; }

    /// Dimerization as seen from the coupled end: the first bond carries 1 - effective_delta().
    double effective_delta() const noexcept { return end_orientation() * delta; }

    /// Throws ParameterError unless N >= 2 and |delta| < 1 (and all values finite).
    void validate() const;
};

/// Off-diagonal (bond) disorder: w_n ~ U[-W/2, W/2], one value per physical bond.
struct DisorderSpec {
    double W = 0.0;
    std::uint64_t seed = 0;

    /// Draws the N-1 bond values in physical bond order. Deterministic in (W, seed).
    std::vector<double> draw(int n_bonds) const;
};

/// Real symmetric (N+1)x(N+1) Hamiltonian of the single-excitation sector.
///
/// Index 0 is the excited emitter with an empty chain, index n = 1..N is one
/// boson on (matrix) site n. Only the diagonal and first off-diagonal are
/// nonzero.
class SingleExcitationHamiltonian {
public:
    SingleExcitationHamiltonian(ModelParams params, Eigen::VectorXd diagonal, Eigen::VectorXd off_diagonal);

    const ModelParams& params() const noexcept { return params_; }
    Eigen::Index dim() const noexcept { return diagonal_.size(); }

    /// Entries (k, k), length dim.
    const Eigen::VectorXd& diagonal() const noexcept { return diagonal_; }
    /// Entries (k, k+1) = (k+1, k), length dim - 1. Entry 0 is the coupling g.
    const Eigen::VectorXd& off_diagonal() const noexcept { return off_diagonal_; }

    Eigen::MatrixXd dense() const;

    /// Maximum absolute row sum; bounds the spectral radius.
    double norm_inf() const;

private:
    ModelParams params_;
    Eigen::VectorXd diagonal_;
    Eigen::VectorXd off_diagonal_;
};

/// Full eigendecomposition, energies ascending, column k of `vectors` pairs with energies(k).
struct Spectrum {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;

    /// |<Phi_k|psi_0>|^2 for the excited-emitter initial state.
    Eigen::VectorXd emitter_weights() const;
};

/// Energies and emitter weights |c_k|^2 only, which is all the emitter
/// population needs.
struct EmitterSpectrum {
    Eigen::VectorXd energies;
    Eigen::VectorXd weights;
};

SingleExcitationHamiltonian build_hamiltonian(const ModelParams& params,
                                              const std::optional<DisorderSpec>& disorder = std::nullopt);

/// Diagonal of C = |1><1| + sum_n (-1)^n a_n^dag a_n in the single-excitation basis.
Eigen::VectorXd chiral_operator(int N);

/// max |(C H C + H)_ij|; zero iff the emitter sits at the band centre.
double chiral_residual(const SingleExcitationHamiltonian& H);

/// Dense symmetric eigensolver. Throws NumericalError if it does not converge.
Spectrum eigendecompose(const SingleExcitationHamiltonian& H);

/// Implicit QL on the tridiagonal matrix, rotating only the first row of
/// the eigenvector matrix. O(dim^2) instead of O(dim^3).
EmitterSpectrum emitter_spectrum(const SingleExcitationHamiltonian& H);

/// Row-major dense CSV, no header.
void write_matrix_csv(std::ostream& os, const SingleExcitationHamiltonian& H);

}  // namespace topowg
