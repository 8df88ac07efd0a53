// Hamiltonian and collapse-operator constructors for the Rydberg GHZ/gate
// scheme: the full four-level model, the optically eliminated three-level
// model, the symmetric Dicke ladder, the two-level effective model, gate
// targets, and the interaction law.
#pragma once

#include "rydsim/qkernel.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace rydsim::model {

using qkernel::AtomBasis;
using qkernel::Matrix;
using qkernel::Operator;

/// Physical parameters, all rates and frequencies in units of the effective
/// Rabi frequency Omega (Omega == 1); times in units of 1/Omega.
struct PhysParams {
    double omega_r = 0.0;    // red-laser Rabi frequency Omega_R
    double omega_b = 0.0;    // blue-laser Rabi frequency Omega_B
    double delta_big = 0.0;  // one-photon detuning Delta
    double delta = 0.0;      // two-photon detuning delta
    double u = 0.0;          // uniform Rydberg interaction U
    std::optional<Eigen::MatrixXd> u_pair;  // per-pair U_ij (symmetric, zero diagonal)
    double gamma_p = 0.0;    // optical-state decay rate
    double gamma_r = 0.0;    // Rydberg-state decay rate
    std::optional<double> gamma0, gamma1;  // branching rates; default gamma_r/2 each
    double p_branch_to_0 = 0.5;  // fraction of |p> decay routed to |0>
    int n_atoms = 3;

    double effective_gamma0() const { return gamma0.value_or(gamma_r / 2.0); }
    double effective_gamma1() const { return gamma1.value_or(gamma_r / 2.0); }
    /// Interaction between atoms i and j: u_pair entry when set, else u.
    double u_between(int i, int j) const;
    void validate() const;
};

/// Van der Waals / dipolar interaction law U(r) = C3 / r^3.
struct InteractionSpec {
    double c3 = 1.0;
    double r = 1.0;
};

double rydberg_u(const InteractionSpec& spec);

/// Collective resonance condition C(N,2) U = N delta, i.e. U = 2 delta/(N-1).
double resonance_u(int n_atoms, double delta);

/// Diagonal N-qubit target: e^{i m alpha} on each computational string with m
/// ones, with an extra factor -1 on the all-ones string.
struct GateTarget {
    int n_qubits = 0;
    double alpha = 0.0;
    Matrix matrix;
};

GateTarget build_gate_target(int n_qubits, double alpha);

/// Full four-level Hamiltonian on {|0>,|1>,|p>,|r>}^N: per-atom terms
/// -Delta|p><p| - delta|r><r| + Omega_R(|1><p|+h.c.) + Omega_B(|p><r|+h.c.)
/// plus pairwise U_ij |rr><rr|. Decay is returned as the matching collapse
/// list rather than embedded as a non-Hermitian -i*gamma/2 term; the Lindblad
/// form additionally includes the recycling terms.
std::pair<Operator, std::vector<Operator>> build_full_h(const PhysParams& params);

/// Three-level model on {|0>,|1>,|r>}^N after eliminating |p>: per-atom terms
/// (-delta + Omega_B^2/Delta)|r><r| + (Omega_R Omega_B/Delta)(|1><r|+h.c.) +
/// (Omega_R^2/Delta)|1><1| plus pairwise U_ij |rr><rr|. With absorb_shifts the
/// Stark terms are dropped and delta is read as the shift-corrected detuning.
Operator build_eliminated_h(const PhysParams& params, bool absorb_shifts);

/// (N+1)x(N+1) symmetric-subspace ladder in the Dicke basis |N^k>, Omega == 1:
/// diagonal d_k = C(k,2) U - k delta, couplings sqrt((k+1)(N-k)) between
/// neighbors. Under the resonance condition both the diagonal and the
/// couplings are mirror symmetric.
Operator build_ladder_h(int n_atoms, double delta, double u);

/// Two-level effective model on {|1..1>,|r..r>} for N = 3 (closed form):
/// (3 Omega^2/delta) I + (6 Omega^3/delta^2) sigma_x.
Operator build_effective_h(double delta);

/// Generic two-level effective model: shift * I + g_eff * sigma_x.
Operator build_effective_h_from(double g_eff, double shift, int n_atoms);

/// Per-atom collapse operators: sqrt(gamma0)|0>_i<r| and sqrt(gamma1)|1>_i<r|
/// when gamma_r > 0, plus the |p> branches (split by p_branch_to_0) when the
/// basis carries |p> and gamma_p > 0.
std::vector<Operator> collapse_ops(const PhysParams& params, const AtomBasis& basis);

}  // namespace rydsim::model
