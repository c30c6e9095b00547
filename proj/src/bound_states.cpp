#include "topowg/bound_states.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "topowg/errors.hpp"

namespace topowg {

namespace {

// Hoppings of the first two bonds seen from the coupled end.
struct EndHoppings {
    double weak;    // J-
    double strong;  // J+
};

EndHoppings end_hoppings(const ModelParams& p) {
    const double d = p.effective_delta();
    return {1.0 - d, 1.0 + d};
}

}  // namespace

void require_analytic_regime(const ModelParams& params) {
    params.validate();
    if (params.emitter_frequency != 0.0)
        throw ParameterError("closed-form bound states need the emitter at the band centre (Delta = 0)");
    const double d = params.effective_delta();
    if (!(d > 0.0))
        throw TopologyError("no zero mode at the coupled end of the chain (effective delta <= 0)", 2, 0);
    if (params.g == 0.0) throw DegenerateCouplingError("g = 0: the emitter is decoupled, bound states undefined");
    if (std::abs(params.g) >= 2.0 * d)
        throw OutOfGapError("|g| = " + std::to_string(std::abs(params.g)) + " is not inside the gap half-width 2|delta| = " +
                            std::to_string(2.0 * d));
}

double analytic_bound_energy(const ModelParams& params) {
    require_analytic_regime(params);
    const auto [jm, jp] = end_hoppings(params);
    const double g2 = params.g * params.g;
    return std::abs(params.g) * std::sqrt(1.0 + jm * jm / (g2 - jp * jp));
}

double siegert_factor(const ModelParams& params) {
    require_analytic_regime(params);
    const auto [jm, jp] = end_hoppings(params);
    return jm * jp / (params.g * params.g - jp * jp);
}

double analytic_overlap(const ModelParams& params) {
    const double e = analytic_bound_energy(params);
    const double q = siegert_factor(params);
    const double jm = end_hoppings(params).weak;
    const double g2 = params.g * params.g;
    const double tail = (g2 - e * e) / jm;
    return 1.0 / std::sqrt(1.0 + (e * e + tail * tail) / (g2 * (1.0 - q * q)));
}

SiegertWavefunction analytic_wavefunction(const ModelParams& params, Branch branch) {
    const double e_b = analytic_bound_energy(params);
    const double b = analytic_overlap(params);
    const double q = siegert_factor(params);
    const double jm = end_hoppings(params).weak;
    const double g = params.g;
    const double e = branch == Branch::plus ? e_b : -e_b;

    const int N = params.N;
    Eigen::VectorXd v(N + 1);
    v(0) = b;
    v(1) = e * b / g;
    if (N >= 2) v(2) = b * (g * g - e * e) / (g * jm);
    for (int n = 3; n <= N; ++n) v(n) = q * v(n - 2);

    SiegertWavefunction out;
    out.truncation = std::pow(std::abs(q), 0.5 * N);
    out.finite_size_warning = out.truncation >= 1e-8;
    out.amplitudes = v / v.norm();
    return out;
}

BoundStatePair analytic_bound_states(const ModelParams& params) {
    BoundStatePair pair;
    pair.energy = analytic_bound_energy(params);
    pair.overlap = analytic_overlap(params);
    pair.q = siegert_factor(params);
    pair.d1 = pair.energy * pair.overlap / (pair.q * params.g);
    pair.d2 = (params.g * params.g - pair.energy * pair.energy) / end_hoppings(params).weak * pair.overlap /
              (pair.q * params.g);
    pair.plus = analytic_wavefunction(params, Branch::plus).amplitudes;
    pair.minus = analytic_wavefunction(params, Branch::minus).amplitudes;
    return pair;
}

int count_in_gap(const Eigen::VectorXd& energies, double delta) {
    const double edge = 2.0 * std::abs(delta) - kGapEpsilon;
    return static_cast<int>((energies.array().abs() < edge).count());
}

BoundStatePair numeric_bound_states(const Spectrum& spectrum, const ModelParams& params) {
    params.validate();
    const bool even = params.N % 2 == 0;
    const int expected = even ? 3 : 2;
    if (!(params.effective_delta() > 0.0))
        throw TopologyError("no zero mode at the coupled end; no bound-state pair near the emitter", expected, 0);

    const double edge = 2.0 * std::abs(params.delta) - kGapEpsilon;
    std::vector<Eigen::Index> in_gap;
    for (Eigen::Index k = 0; k < spectrum.energies.size(); ++k)
        if (std::abs(spectrum.energies(k)) < edge) in_gap.push_back(k);
    const int found = static_cast<int>(in_gap.size());
    if (found != expected)
        throw TopologyError("expected " + std::to_string(expected) + " in-gap states, found " + std::to_string(found),
                            expected, found);

    std::sort(in_gap.begin(), in_gap.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(spectrum.vectors(0, a)) > std::abs(spectrum.vectors(0, b));
    });
    Eigen::Index hi = in_gap[0], lo = in_gap[1];
    if (spectrum.energies(hi) < spectrum.energies(lo)) std::swap(hi, lo);

    auto gauge_fixed = [&](Eigen::Index k) {
        Eigen::VectorXd v = spectrum.vectors.col(k);
        if (v(0) < 0.0) v = -v;
        return v;
    };

    BoundStatePair pair;
    pair.plus = gauge_fixed(hi);
    pair.minus = gauge_fixed(lo);
    pair.energy = 0.5 * (spectrum.energies(hi) - spectrum.energies(lo));
    pair.overlap = pair.plus(0);
    if (params.N >= 3 && pair.plus(1) != 0.0) {
        pair.q = pair.plus(3) / pair.plus(1);
        pair.d1 = pair.plus(1) / pair.q;
        pair.d2 = pair.plus(2) / pair.q;
    }
    return pair;
}

void write_bound_states_csv(std::ostream& os, const BoundStatePair& pair) {
    const auto old_precision = os.precision(17);
    os << "index,label,amplitude_plus,amplitude_minus\n";
    for (Eigen::Index k = 0; k < pair.plus.size(); ++k) {
        os << k << ',' << (k == 0 ? std::string("emitter") : "site-" + std::to_string(k)) << ',' << pair.plus(k) << ','
           << pair.minus(k) << '\n';
    }
    os.precision(old_precision);
}

}  // namespace topowg
