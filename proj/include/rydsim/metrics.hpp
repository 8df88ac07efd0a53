// Figures of merit: state and GHZ fidelities, gate extraction on the
// computational subspace, unitary and dissipative gate fidelities, and the
// acquired single-excitation phase.
#pragma once

#include "rydsim/dynamics.hpp"
#include "rydsim/model.hpp"
#include "rydsim/qkernel.hpp"

#include <vector>

namespace rydsim::metrics {

using dynamics::TimeGrid;
using qkernel::Matrix;
using qkernel::Operator;
using qkernel::QuantumState;

/// Scalar figure of merit sampled on a time grid; values stay within
/// [-1e-9, 1 + 1e-9].
struct FidelityCurve {
    TimeGrid grid;
    std::vector<double> values;

    void validate() const;
    /// Index of the global maximum (first occurrence on ties).
    int peak_index() const;
};

/// Overlap fidelity <psi|rho|psi> (or |<psi|phi>|^2 for pure states) against
/// a pure target in the same basis.
double state_fidelity(const QuantumState& state, const QuantumState& target);

/// Fidelity against (|1...1> + e^{i phi}|r...r>)/sqrt(2), maximized over
/// phi = +-pi/2 so the result is independent of time-evolution sign
/// conventions. Understands product (two-/three-/four-level), ladder, and
/// effective two-level bases.
double ghz_fidelity(const QuantumState& state, int n_atoms);

/// Propagator restricted to the computational subspace {|0>,|1>}^N of the
/// three-level product space. leakage is the largest column-norm deficit,
/// i.e. the worst-case probability amplitude lost to non-computational
/// states.
struct ExtractedGate {
    int n_qubits = 0;
    Matrix matrix;
    double leakage = 0.0;
};

/// Evolves every computational basis string for time t under h (defined on
/// the three-level product space) and assembles the 2^N x 2^N block.
ExtractedGate extract_gate(const Operator& h, int n_qubits, double t);

/// extract_gate at many times sharing a single eigendecomposition of h.
std::vector<ExtractedGate> extract_gate_curve(const Operator& h, int n_qubits,
                                              const std::vector<double>& times);

/// F = |tr(U^dag T)| / 2^N.
double unitary_gate_fidelity(const ExtractedGate& gate, const model::GateTarget& target);

/// Master-equation gate figure: evolves the equal-weight superposition of all
/// computational strings to time t and returns <Psi_ideal|rho(t)|Psi_ideal>
/// with |Psi_ideal> = T |Psi(0)>.
double dissipative_gate_fidelity(const Operator& h, const std::vector<Operator>& collapse,
                                 const model::GateTarget& target, double t);

/// Average over single-1 strings of arg(diagonal entry), reported in
/// [0, 2*pi). Requires diagonal dominance: leakage plus the largest
/// off-diagonal magnitude must stay below 0.1, else NumericError.
double extract_alpha(const ExtractedGate& gate);

/// The same single-excitation phase average without the dominance check, for
/// per-time-point phase fitting along a whole fidelity curve (where the gate
/// is legitimately leaky away from the Rabi return).
double fitted_alpha(const Matrix& gate_matrix);

}  // namespace rydsim::metrics
