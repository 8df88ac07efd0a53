// Time evolution: unitary Schrodinger propagation (fixed-substep RK4 or exact
// eigendecomposition), Lindblad master-equation propagation, and closed-form
// propagator matrices for time-independent Hamiltonians.
#pragma once

#include "rydsim/qkernel.hpp"

#include <vector>

namespace rydsim::dynamics {

using qkernel::Matrix;
using qkernel::Operator;
using qkernel::QuantumState;
using qkernel::Vector;

/// Uniform grid of n_points sample times covering [t_start, t_end].
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1.0;
    int n_points = 2;

    double dt() const { return (t_end - t_start) / (n_points - 1); }
    double t(int i) const { return t_start + i * dt(); }
    /// Requires t_end > t_start and n_points >= 2.
    void validate() const;
};

/// Evolution samples on a TimeGrid; states[i] is the state at grid.t(i).
struct Trajectory {
    TimeGrid grid;
    std::vector<QuantumState> states;
};

/// Integration backend. Rk4 is the fixed-substep default; Eigen diagonalizes
/// once and evaluates exactly, which is preferable for stiff Hamiltonians
/// whose largest energy scale far exceeds the dynamics of interest.
enum class Method { Rk4, Eigen };

/// Evolve a pure state under a (Hermitian, time-independent) Hamiltonian,
/// sampling at the grid points. Each stored state is renormalized; the raw
/// norm drift at every grid point must stay within `tol` or the integrator
/// retries with doubled substep counts (throws NumericError once the retry
/// budget is exhausted). `substeps_override` > 0 pins the number of RK4
/// substeps per grid interval and disables the drift retry loop (used for
/// convergence-order measurements).
Trajectory propagate_state(const Operator& h, const QuantumState& psi0, const TimeGrid& grid,
                           double tol = 1e-8, Method method = Method::Rk4,
                           int substeps_override = 0);

/// Evolve a pure state under an arbitrary (possibly non-Hermitian) generator,
/// i.e. d|psi>/dt = -i H |psi| with no renormalization and no drift check.
/// Stored norms may decay; used for no-jump cross-checks of the master
/// equation.
Trajectory propagate_state_nonhermitian(const Operator& h, const QuantumState& psi0,
                                        const TimeGrid& grid, int substeps_override = 0);

/// Evolve a density matrix under the Lindblad master equation
///   drho/dt = -i[H, rho] + sum_k ( O_k rho O_k^dag - {O_k^dag O_k, rho}/2 ).
/// Accepts a pure initial state (converted to |psi><psi|). Stored matrices
/// are Hermitized; the trace drift at every grid point must stay within `tol`
/// with the same retry-doubling policy as propagate_state.
Trajectory propagate_density(const Operator& h, const std::vector<Operator>& collapse,
                             const QuantumState& rho0, const TimeGrid& grid, double tol = 1e-8,
                             int substeps_override = 0);

/// U(t) = exp(-i H t) via Hermitian eigendecomposition. Throws
/// std::invalid_argument when h is not Hermitian within 1e-10.
Operator propagator_matrix(const Operator& h, double t);

}  // namespace rydsim::dynamics
