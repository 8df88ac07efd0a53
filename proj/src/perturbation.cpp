#include "rydsim/perturbation.hpp"

#include "rydsim/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rydsim::perturbation {

namespace {

using qkernel::AtomBasis;
using qkernel::Level;
using qkernel::Matrix;

constexpr double kOverlapThreshold = 0.8;
constexpr double kMinDelta = 2.0;

void require_dispersive(double delta, const char* context) {
    if (!(delta > kMinDelta))
        throw std::invalid_argument(std::string(context) +
                                    ": requires the dispersive regime delta > 2 (in Omega units)");
}

/// Gap of the dressed |1...1>/|r...r> pair of the full optical model at the
/// given bare Rydberg detuning; objective of the calibration search.
double full_model_gap(PhysParams params, double delta_bare) {
    params.delta = delta_bare;
    const auto [h, ops] = model::build_full_h(params);
    const AtomBasis basis = AtomBasis::four_level(params.n_atoms);
    return dressed_pair(h, basis.all_of(Level::One), basis.all_of(Level::R)).gap;
}

}  // namespace

EliminationResult eliminate_optical(const PhysParams& params) {
    params.validate();
    if (params.delta_big == 0.0)
        throw std::invalid_argument("eliminate_optical: one-photon detuning Delta must be nonzero");
    EliminationResult result;
    result.omega_eff = params.omega_r * params.omega_b / params.delta_big;
    result.shift_1 = params.omega_r * params.omega_r / params.delta_big;
    result.shift_r = params.omega_b * params.omega_b / params.delta_big;
    result.dispersive_ok =
        std::abs(params.delta_big) >= 10.0 * std::max(std::abs(params.omega_r), std::abs(params.omega_b));
    return result;
}

EffectiveModel effective_model(int n_atoms, double delta) {
    if (n_atoms < 2) throw std::invalid_argument("effective_model: need at least two atoms");
    require_dispersive(delta, "effective_model");
    if (n_atoms == 3) {
        EffectiveModel m;
        m.g_eff = 6.0 / (delta * delta);
        m.shift = 3.0 / delta;
        m.n_atoms = 3;
        m.source = ModelSource::ClosedForm;
        return m;
    }
    return effective_model_numeric(n_atoms, delta);
}

EffectiveModel effective_model_numeric(int n_atoms, double delta) {
    if (n_atoms < 2)
        throw std::invalid_argument("effective_model_numeric: need at least two atoms");
    require_dispersive(delta, "effective_model_numeric");
    const Operator ladder =
        model::build_ladder_h(n_atoms, delta, model::resonance_u(n_atoms, delta));
    const DressedPair pair = dressed_pair(ladder, 0, n_atoms);
    if (pair.overlap_a < kOverlapThreshold || pair.overlap_b < kOverlapThreshold)
        throw NumericError(
            "effective_model_numeric: dressed pair not identifiable (regime violation); "
            "increase delta/Omega");
    EffectiveModel m;
    m.g_eff = 0.5 * pair.gap;
    m.shift = pair.mean_energy;
    m.n_atoms = n_atoms;
    m.source = ModelSource::Numeric;
    return m;
}

DressedPair dressed_pair(const Operator& h, long index_a, long index_b) {
    h.validate();
    if (index_a < 0 || index_a >= h.dim() || index_b < 0 || index_b >= h.dim() ||
        index_a == index_b)
        throw std::invalid_argument("dressed_pair: invalid target indices");
    if (qkernel::hermiticity_error(h.mat) > 1e-10)
        throw std::invalid_argument("dressed_pair: non-Hermitian input");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat);
    if (es.info() != Eigen::Success) throw NumericError("dressed_pair: eigensolver failed");
    const Matrix& v = es.eigenvectors();
    // Projection of each eigenstate onto span{|a>, |b>}.
    long best = 0, second = 1;
    auto proj = [&](long j) { return std::norm(v(index_a, j)) + std::norm(v(index_b, j)); };
    if (proj(second) > proj(best)) std::swap(best, second);
    for (long j = 2; j < h.dim(); ++j) {
        const double p = proj(j);
        if (p > proj(best)) {
            second = best;
            best = j;
        } else if (p > proj(second)) {
            second = j;
        }
    }
    DressedPair pair;
    pair.gap = std::abs(es.eigenvalues()(best) - es.eigenvalues()(second));
    pair.mean_energy = 0.5 * (es.eigenvalues()(best) + es.eigenvalues()(second));
    pair.overlap_a = std::min(proj(best), proj(second));
    pair.overlap_b = std::max(proj(best), proj(second));
    return pair;
}

double ghz_time(const EffectiveModel& model, int k) {
    if (!(model.g_eff > 0.0)) throw std::invalid_argument("ghz_time: g_eff must be positive");
    if (k < 0) throw std::invalid_argument("ghz_time: k must be >= 0");
    return (k + 0.25) * std::numbers::pi / model.g_eff;
}

double gate_time(const EffectiveModel& model) {
    if (!(model.g_eff > 0.0)) throw std::invalid_argument("gate_time: g_eff must be positive");
    return std::numbers::pi / model.g_eff;
}

double predicted_alpha(double delta) {
    const double two_pi = 2.0 * std::numbers::pi;
    double alpha = std::fmod(-std::numbers::pi * delta / 6.0, two_pi);
    if (alpha < 0.0) alpha += two_pi;
    if (alpha >= two_pi) alpha -= two_pi;
    return alpha;
}

double calibrate_bare_delta(const PhysParams& params) {
    params.validate();
    if (params.delta_big == 0.0)
        throw std::invalid_argument("calibrate_bare_delta: one-photon detuning must be nonzero");
    if (params.n_atoms > 4)
        throw std::invalid_argument("calibrate_bare_delta: full-model calibration limited to 4 atoms");
    const double estimate =
        params.delta +
        (params.omega_b * params.omega_b - params.omega_r * params.omega_r) / params.delta_big;
    double lo = estimate - 3.0;
    double hi = estimate + 3.0;
    for (int iter = 0; iter < 60; ++iter) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (full_model_gap(params, m1) < full_model_gap(params, m2))
            hi = m2;
        else
            lo = m1;
    }
    return 0.5 * (lo + hi);
}

}  // namespace rydsim::perturbation
