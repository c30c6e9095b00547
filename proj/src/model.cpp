#include "topowg/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "topowg/errors.hpp"
#include "topowg/random.hpp"

namespace topowg {

void ModelParams::validate() const {
    if (N < 2) throw ParameterError("chain length N must be >= 2, got " + std::to_string(N));
    if (!std::isfinite(delta) || std::abs(delta) >= 1.0)
        throw ParameterError("dimerization must satisfy |delta| < 1, got " + std::to_string(delta));
    if (!std::isfinite(g)) throw ParameterError("coupling g must be finite");
    if (!std::isfinite(emitter_frequency)) throw ParameterError("emitter frequency must be finite");
}

std::vector<double> DisorderSpec::draw(int n_bonds) const {
    if (!(W >= 0.0) || !std::isfinite(W)) throw ParameterError("disorder strength W must be >= 0");
    std::vector<double> w(static_cast<std::size_t>(std::max(n_bonds, 0)), 0.0);
    if (W == 0.0) return w;
    Rng rng(substream_seed(seed, 0));
    for (auto& v : w) v = W * (uniform01(rng) - 0.5);
    return w;
}

SingleExcitationHamiltonian::SingleExcitationHamiltonian(ModelParams params, Eigen::VectorXd diagonal,
                                                         Eigen::VectorXd off_diagonal)
    : params_(params), diagonal_(std::move(diagonal)), off_diagonal_(std::move(off_diagonal)) {
    if (off_diagonal_.size() + 1 != diagonal_.size())
        throw ParameterError("off-diagonal length must be dim - 1");
}

Eigen::MatrixXd SingleExcitationHamiltonian::dense() const {
    const Eigen::Index n = dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m.diagonal() = diagonal_;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        m(k, k + 1) = off_diagonal_(k);
        m(k + 1, k) = off_diagonal_(k);
    }
    return m;
}

double SingleExcitationHamiltonian::norm_inf() const {
    const Eigen::Index n = dim();
    double best = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        double row = std::abs(diagonal_(k));
        if (k > 0) row += std::abs(off_diagonal_(k - 1));
        if (k + 1 < n) row += std::abs(off_diagonal_(k));
        best = std::max(best, row);
    }
    return best;
}

Eigen::VectorXd Spectrum::emitter_weights() const {
    return vectors.row(0).transpose().array().square();
}

SingleExcitationHamiltonian build_hamiltonian(const ModelParams& params,
                                              const std::optional<DisorderSpec>& disorder) {
    params.validate();
    const int N = params.N;
    std::vector<double> w;
    if (disorder) w = disorder->draw(N - 1);

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(N + 1);
    diag(0) = params.emitter_frequency;
    Eigen::VectorXd off(N);
    off(0) = params.g;
    for (int j = 1; j <= N - 1; ++j) {
        const int bond = params.physical_bond(j);
        double hop = -params.bond_hopping(bond);
        if (!w.empty()) hop += w[static_cast<std::size_t>(bond - 1)];
        off(j) = hop;
    }
    return SingleExcitationHamiltonian(params, std::move(diag), std::move(off));
}

Eigen::VectorXd chiral_operator(int N) {
    if (N < 2) throw ParameterError("chain length N must be >= 2");
    Eigen::VectorXd c(N + 1);
    c(0) = 1.0;
    for (int n = 1; n <= N; ++n) c(n) = (n % 2 == 0) ? 1.0 : -1.0;
    return c;
}

double chiral_residual(const SingleExcitationHamiltonian& H) {
    // Signs follow the matrix index; with CoupledEnd::right this is the
    // sublattice operator of the reflected chain.
    const Eigen::VectorXd c = chiral_operator(static_cast<int>(H.dim()) - 1);
    double r = 0.0;
    for (Eigen::Index k = 0; k < H.dim(); ++k)
        r = std::max(r, std::abs(c(k) * c(k) * H.diagonal()(k) + H.diagonal()(k)));
    for (Eigen::Index k = 0; k + 1 < H.dim(); ++k)
        r = std::max(r, std::abs(c(k) * c(k + 1) * H.off_diagonal()(k) + H.off_diagonal()(k)));
    return r;
}

Spectrum eigendecompose(const SingleExcitationHamiltonian& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(H.diagonal(), H.off_diagonal(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

// std::hypot is several times slower and the operands here are O(1).
inline double fast_hypot(double a, double b) {
    const double aa = std::abs(a), ab = std::abs(b);
    if (aa > 1e150 || ab > 1e150) return std::hypot(a, b);
    return std::sqrt(a * a + b * b);
}

}  // namespace

EmitterSpectrum emitter_spectrum(const SingleExcitationHamiltonian& H) {
    const Eigen::Index n = H.dim();
    std::vector<double> d(H.diagonal().data(), H.diagonal().data() + n);
    // e[i] couples d[i] and d[i+1]; e[n-1] is a zero sentinel.
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i + 1 < n; ++i) e[i] = H.off_diagonal()(i);
    // First row of the accumulated rotation matrix, starting from the identity.
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    z[0] = 1.0;

    constexpr double eps = 0x1.0p-52;
    constexpr int max_iter = 60;
    double shift_total = 0.0;
    double scale = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
        scale = std::max(scale, std::abs(d[l]) + std::abs(e[l]));
        Eigen::Index m = l;
        while (m < n && std::abs(e[m]) > eps * scale) ++m;
        if (m == n) m = n - 1;
        int iter = 0;
        while (m > l) {
            if (++iter > max_iter)
                throw NumericalError("tridiagonal QL did not converge at index " + std::to_string(l));
            double g = d[l];
            double p = (d[l + 1] - g) / (2.0 * e[l]);
            double r = fast_hypot(p, 1.0);
            if (p < 0) r = -r;
            d[l] = e[l] / (p + r);
            d[l + 1] = e[l] * (p + r);
            const double dl1 = d[l + 1];
            double h = g - d[l];
            for (Eigen::Index i = l + 2; i < n; ++i) d[i] -= h;
            shift_total += h;

            p = d[m];
            double c = 1.0, c2 = 1.0, c3 = 1.0;
            const double el1 = e[l + 1];
            double s = 0.0, s2 = 0.0;
            for (Eigen::Index i = m - 1; i >= l; --i) {
                c3 = c2;
                c2 = c;
                s2 = s;
                g = c * e[i];
                h = c * p;
                r = fast_hypot(p, e[i]);
                e[i + 1] = s * r;
                s = e[i] / r;
                c = p / r;
                p = c * d[i] - s * g;
                d[i + 1] = h + s * (c * g + s * d[i]);
                const double zi1 = z[i + 1];
                z[i + 1] = s * z[i] + c * zi1;
                z[i] = c * z[i] - s * zi1;
            }
            p = -s * s2 * c3 * el1 * e[l] / dl1;
            e[l] = s * p;
            d[l] = c * p;
            if (std::abs(e[l]) <= eps * scale) break;
        }
        d[l] += shift_total;
        e[l] = 0.0;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return d[a] < d[b]; });
    EmitterSpectrum out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.energies(k) = d[order[k]];
        out.weights(k) = z[order[k]] * z[order[k]];
    }
    return out;
}

void write_matrix_csv(std::ostream& os, const SingleExcitationHamiltonian& H) {
    const Eigen::MatrixXd m = H.dense();
    const auto old_precision = os.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j);
        }
        os << '\n';
    }
    os.precision(old_precision);
}

}  // namespace topowg
