#include "rydsim/dynamics.hpp"

#include "rydsim/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace rydsim::dynamics {

namespace {

using qkernel::Complex;

constexpr double kHermTol = 1e-10;
constexpr int kMaxDoublings = 6;
// Base substep rule: at least 50 substeps per unit of (max |H| entry * time),
// so the largest phase advanced per substep stays well below one radian.
constexpr double kStepsPerEnergyTime = 50.0;

int base_substeps(double dt, double h_scale, int substeps_override) {
    if (substeps_override > 0) return substeps_override;
    const int n = static_cast<int>(std::ceil(dt * h_scale * kStepsPerEnergyTime));
    return std::max(1, n);
}

/// One classical RK4 step of d(state)/dt = rhs(state), in place.
template <typename State, typename Rhs>
void rk4_step(State& y, double dt, const Rhs& rhs, State& k1, State& k2, State& k3, State& k4,
              State& tmp) {
    rhs(y, k1);
    tmp = y + (0.5 * dt) * k1;
    rhs(tmp, k2);
    tmp = y + (0.5 * dt) * k2;
    rhs(tmp, k3);
    tmp = y + dt * k3;
    rhs(tmp, k4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct HermitianEigs {
    Matrix vectors;
    Eigen::VectorXd values;
};

HermitianEigs diagonalize(const Matrix& h, const char* context) {
    if (qkernel::hermiticity_error(h) > kHermTol)
        throw std::invalid_argument(std::string(context) + ": non-Hermitian input");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success)
        throw NumericError(std::string(context) + ": eigendecomposition failed");
    return {es.eigenvectors(), es.eigenvalues()};
}

Trajectory propagate_state_eigen(const Operator& h, const QuantumState& psi0,
                                 const TimeGrid& grid) {
    const HermitianEigs eigs = diagonalize(h.mat, "propagate_state");
    const Vector c0 = eigs.vectors.adjoint() * psi0.vec;
    Trajectory traj;
    traj.grid = grid;
    traj.states.reserve(grid.n_points);
    Vector phased(c0.size());
    for (int i = 0; i < grid.n_points; ++i) {
        const double t = grid.t(i) - grid.t_start;
        for (Eigen::Index k = 0; k < c0.size(); ++k)
            phased(k) = std::exp(Complex(0.0, -eigs.values(k) * t)) * c0(k);
        Vector psi = eigs.vectors * phased;
        psi /= psi.norm();
        traj.states.push_back(QuantumState::pure_unchecked(std::move(psi), psi0.basis));
    }
    return traj;
}

/// Precomputed sparse form of a collapse operator: list of nonzero entries,
/// used to evaluate O rho O^dag in O(nnz^2) instead of two dense products.
struct SparseCollapse {
    struct Entry {
        long row;
        long col;
        Complex val;
    };
    std::vector<Entry> entries;
};

SparseCollapse sparsify(const Matrix& op) {
    SparseCollapse s;
    for (long c = 0; c < op.cols(); ++c)
        for (long r = 0; r < op.rows(); ++r)
            if (op(r, c) != Complex(0.0, 0.0)) s.entries.push_back({r, c, op(r, c)});
    return s;
}

}  // namespace

void TimeGrid::validate() const {
    if (n_points < 2) throw std::invalid_argument("TimeGrid: n_points must be >= 2");
    if (!(t_end > t_start)) throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
    if (!std::isfinite(t_start) || !std::isfinite(t_end))
        throw std::invalid_argument("TimeGrid: non-finite endpoint");
}

Trajectory propagate_state(const Operator& h, const QuantumState& psi0, const TimeGrid& grid,
                           double tol, Method method, int substeps_override) {
    grid.validate();
    h.validate();
    qkernel::require_same_basis(h.basis, psi0.basis, "propagate_state");
    if (psi0.kind != QuantumState::Kind::Pure)
        throw std::invalid_argument("propagate_state: initial state must be pure");
    if (h.dim() != psi0.dim()) throw std::invalid_argument("propagate_state: dimension mismatch");
    if (qkernel::hermiticity_error(h.mat) > kHermTol)
        throw std::invalid_argument("propagate_state: non-Hermitian Hamiltonian");

    if (method == Method::Eigen) return propagate_state_eigen(h, psi0, grid);

    const Matrix minus_i_h = Complex(0.0, -1.0) * h.mat;
    const auto rhs = [&minus_i_h](const Vector& y, Vector& dy) { dy.noalias() = minus_i_h * y; };
    const double h_scale = h.mat.cwiseAbs().maxCoeff();
    const double dt = grid.dt();

    int n_sub = base_substeps(dt, h_scale, substeps_override);
    for (int attempt = 0;; ++attempt) {
        Trajectory traj;
        traj.grid = grid;
        traj.states.reserve(grid.n_points);
        Vector psi = psi0.vec;
        Vector k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()), tmp(psi.size());
        const double dt_sub = dt / n_sub;
        double max_drift = 0.0;
        bool ok = true;
        for (int i = 0; i < grid.n_points; ++i) {
            if (i > 0)
                for (int s = 0; s < n_sub; ++s) rk4_step(psi, dt_sub, rhs, k1, k2, k3, k4, tmp);
            const double norm = psi.norm();
            if (!std::isfinite(norm)) throw NumericError("propagate_state: non-finite state");
            max_drift = std::max(max_drift, std::abs(norm - 1.0));
            if (substeps_override == 0 && max_drift > tol) {
                ok = false;
                break;
            }
            traj.states.push_back(QuantumState::pure_unchecked(psi / norm, psi0.basis));
        }
        if (ok || substeps_override > 0) return traj;
        if (attempt >= kMaxDoublings)
            throw NumericError("propagate_state: norm drift exceeds tolerance within step budget");
        n_sub *= 2;
    }
}

Trajectory propagate_state_nonhermitian(const Operator& h, const QuantumState& psi0,
                                        const TimeGrid& grid, int substeps_override) {
    grid.validate();
    h.validate();
    qkernel::require_same_basis(h.basis, psi0.basis, "propagate_state_nonhermitian");
    if (psi0.kind != QuantumState::Kind::Pure)
        throw std::invalid_argument("propagate_state_nonhermitian: initial state must be pure");
    if (h.dim() != psi0.dim())
        throw std::invalid_argument("propagate_state_nonhermitian: dimension mismatch");

    const Matrix minus_i_h = Complex(0.0, -1.0) * h.mat;
    const auto rhs = [&minus_i_h](const Vector& y, Vector& dy) { dy.noalias() = minus_i_h * y; };
    const double dt = grid.dt();
    const int n_sub = base_substeps(dt, h.mat.cwiseAbs().maxCoeff(), substeps_override);
    const double dt_sub = dt / n_sub;

    Trajectory traj;
    traj.grid = grid;
    traj.states.reserve(grid.n_points);
    Vector psi = psi0.vec;
    Vector k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()), tmp(psi.size());
    for (int i = 0; i < grid.n_points; ++i) {
        if (i > 0)
            for (int s = 0; s < n_sub; ++s) rk4_step(psi, dt_sub, rhs, k1, k2, k3, k4, tmp);
        if (!psi.allFinite()) throw NumericError("propagate_state_nonhermitian: non-finite state");
        traj.states.push_back(QuantumState::pure_unchecked(psi, psi0.basis));
    }
    return traj;
}

Trajectory propagate_density(const Operator& h, const std::vector<Operator>& collapse,
                             const QuantumState& rho0, const TimeGrid& grid, double tol,
                             int substeps_override) {
    grid.validate();
    h.validate();
    qkernel::require_same_basis(h.basis, rho0.basis, "propagate_density");
    if (h.dim() != rho0.dim()) throw std::invalid_argument("propagate_density: dimension mismatch");
    if (qkernel::hermiticity_error(h.mat) > kHermTol)
        throw std::invalid_argument("propagate_density: non-Hermitian Hamiltonian");
    for (const Operator& op : collapse) {
        op.validate();
        qkernel::require_same_basis(h.basis, op.basis, "propagate_density collapse operator");
        if (op.dim() != h.dim())
            throw std::invalid_argument("propagate_density: collapse dimension mismatch");
    }

    // Non-Hermitian drift generator A = H - (i/2) sum O^dag O; the remaining
    // scatter term sum O rho O^dag is applied through the sparse entry lists.
    Matrix a = h.mat;
    std::vector<SparseCollapse> sparse;
    sparse.reserve(collapse.size());
    for (const Operator& op : collapse) {
        a -= Complex(0.0, 0.5) * (op.mat.adjoint() * op.mat);
        sparse.push_back(sparsify(op.mat));
    }
    // d rho = (-iA) rho + rho (-iA)^dag + scatter.
    const Matrix minus_i_a = Complex(0.0, -1.0) * a;
    const Matrix minus_i_a_dag = minus_i_a.adjoint();
    const auto rhs = [&minus_i_a, &minus_i_a_dag, &sparse](const Matrix& rho, Matrix& drho) {
        drho.noalias() = minus_i_a * rho;
        drho.noalias() += rho * minus_i_a_dag;
        for (const SparseCollapse& s : sparse)
            for (const auto& e1 : s.entries)
                for (const auto& e2 : s.entries)
                    drho(e1.row, e2.row) += e1.val * std::conj(e2.val) * rho(e1.col, e2.col);
    };

    const Matrix rho_init = rho0.density();
    const double h_scale = h.mat.cwiseAbs().maxCoeff();
    const double dt = grid.dt();

    int n_sub = base_substeps(dt, h_scale, substeps_override);
    for (int attempt = 0;; ++attempt) {
        Trajectory traj;
        traj.grid = grid;
        traj.states.reserve(grid.n_points);
        Matrix rho = rho_init;
        Matrix k1(rho.rows(), rho.cols()), k2(rho.rows(), rho.cols()), k3(rho.rows(), rho.cols()),
            k4(rho.rows(), rho.cols()), tmp(rho.rows(), rho.cols());
        const double dt_sub = dt / n_sub;
        double max_drift = 0.0;
        bool ok = true;
        for (int i = 0; i < grid.n_points; ++i) {
            if (i > 0)
                for (int s = 0; s < n_sub; ++s) rk4_step(rho, dt_sub, rhs, k1, k2, k3, k4, tmp);
            const double trace = rho.trace().real();
            if (!std::isfinite(trace)) throw NumericError("propagate_density: non-finite state");
            max_drift = std::max(max_drift, std::abs(trace - 1.0));
            if (substeps_override == 0 && max_drift > tol) {
                ok = false;
                break;
            }
            Matrix stored = 0.5 * (rho + rho.adjoint());
            traj.states.push_back(QuantumState::mixed_unchecked(std::move(stored), rho0.basis));
        }
        if (ok || substeps_override > 0) return traj;
        if (attempt >= kMaxDoublings)
            throw NumericError(
                "propagate_density: trace drift exceeds tolerance within step budget");
        n_sub *= 2;
    }
}

Operator propagator_matrix(const Operator& h, double t) {
    h.validate();
    if (!std::isfinite(t)) throw std::invalid_argument("propagator_matrix: non-finite time");
    const HermitianEigs eigs = diagonalize(h.mat, "propagator_matrix");
    Vector phases(eigs.values.size());
    for (Eigen::Index k = 0; k < eigs.values.size(); ++k)
        phases(k) = std::exp(Complex(0.0, -eigs.values(k) * t));
    Matrix u = eigs.vectors * phases.asDiagonal() * eigs.vectors.adjoint();
    return Operator{std::move(u), h.basis};
}

}  // namespace rydsim::dynamics
