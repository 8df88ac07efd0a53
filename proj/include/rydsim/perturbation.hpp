// Effective-model extraction: second-order optical elimination coefficients,
// the collective two-level model (closed form for three atoms, dressed-pair
// numerics for general N), timing rules, and acquired-phase prediction.
#pragma once

#include "rydsim/model.hpp"
#include "rydsim/qkernel.hpp"

namespace rydsim::perturbation {

using model::PhysParams;
using qkernel::Operator;

/// Second-order coefficients of the optical elimination: effective two-photon
/// coupling and the light shifts of |1> and |r>. dispersive_ok is false when
/// |Delta| < 10 * max(|Omega_R|, |Omega_B|), i.e. outside the regime where the
/// elimination is quantitatively reliable.
struct EliminationResult {
    double omega_eff = 0.0;  // Omega_R * Omega_B / Delta
    double shift_1 = 0.0;    // Omega_R^2 / Delta
    double shift_r = 0.0;    // Omega_B^2 / Delta
    bool dispersive_ok = true;
};

/// Throws std::invalid_argument when Delta == 0.
EliminationResult eliminate_optical(const PhysParams& params);

enum class ModelSource { ClosedForm, Numeric };

/// Collective two-level model of the resonant N-atom ladder: coupling g_eff
/// between |1...1> and |r...r> plus their common energy shift (both in units
/// of the two-photon Rabi frequency Omega).
struct EffectiveModel {
    double g_eff = 0.0;
    double shift = 0.0;
    int n_atoms = 0;
    ModelSource source = ModelSource::ClosedForm;
};

/// N=3 uses the closed form g = 6/delta^2, shift = 3/delta; other N fall back
/// to effective_model_numeric. Requires the dispersive regime delta > 2
/// (in Omega units); throws std::invalid_argument otherwise.
EffectiveModel effective_model(int n_atoms, double delta);

/// Diagonalizes the resonant excitation ladder (U = 2*delta/(N-1)) and reads
/// g_eff off the splitting of the dressed pair spanning {|N^0>, |N^N>}. Each
/// dressed state must carry combined overlap > 0.8 on that span, else a
/// NumericError (regime violation) is thrown.
EffectiveModel effective_model_numeric(int n_atoms, double delta);

/// Two eigenstates of h with the largest projection onto span{|a>, |b>}:
/// their energy splitting, mean energy, and per-state projections. No
/// thresholding; callers decide what overlap is acceptable.
struct DressedPair {
    double gap = 0.0;
    double mean_energy = 0.0;
    double overlap_a = 0.0;  // projection of the lower-overlap-ranked state
    double overlap_b = 0.0;
};
DressedPair dressed_pair(const Operator& h, long index_a, long index_b);

/// Time of the k-th GHZ-fidelity peak: t = (k + 1/4) * pi / g_eff.
double ghz_time(const EffectiveModel& model, int k = 0);

/// Full collective Rabi period for the controlled-phase gate: t = pi / g_eff.
double gate_time(const EffectiveModel& model);

/// Single-excitation phase alpha = -pi * delta / 6 for N=3, reported in
/// [0, 2*pi).
double predicted_alpha(double delta);

/// Tunes the bare Rydberg detuning of the full optical model so that the
/// dressed |1...1> and |r...r> states sit exactly on the collective resonance
/// (minimal avoided-crossing gap). The second-order estimate
/// delta + (Omega_B^2 - Omega_R^2)/Delta seeds the search bracket. Returns the
/// calibrated bare detuning in the same units as params.
double calibrate_bare_delta(const PhysParams& params);

}  // namespace rydsim::perturbation
