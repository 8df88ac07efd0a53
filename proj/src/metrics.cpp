#include "rydsim/metrics.hpp"

#include "rydsim/errors.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rydsim::metrics {

namespace {

using qkernel::AtomBasis;
using qkernel::Complex;
using qkernel::Level;
using qkernel::Vector;

/// Indices of |1...1> and |r...r> in the basis identified by `tag`.
std::pair<long, long> ghz_component_indices(const std::string& tag, int n_atoms) {
    for (const AtomBasis& candidate : {AtomBasis::two_level(n_atoms), AtomBasis::three_level(n_atoms),
                                       AtomBasis::four_level(n_atoms)}) {
        if (candidate.tag() == tag)
            return {candidate.all_of(Level::One), candidate.all_of(Level::R)};
    }
    if (tag == qkernel::ladder_tag(n_atoms)) return {0, n_atoms};
    if (tag == qkernel::effective_tag(n_atoms)) return {0, 1};
    throw std::invalid_argument("ghz_fidelity: unrecognized basis '" + tag + "'");
}

/// Computational basis strings of the three-level product space, ordered by
/// qubit index (leftmost atom most significant).
std::vector<long> computational_indices(int n_qubits) {
    const AtomBasis basis = AtomBasis::three_level(n_qubits);
    std::vector<long> indices;
    indices.reserve(1L << n_qubits);
    for (long q = 0; q < (1L << n_qubits); ++q) {
        std::vector<Level> string(n_qubits);
        for (int a = 0; a < n_qubits; ++a)
            string[a] = ((q >> (n_qubits - 1 - a)) & 1) ? Level::One : Level::Zero;
        indices.push_back(basis.string_index(string));
    }
    return indices;
}

}  // namespace

void FidelityCurve::validate() const {
    grid.validate();
    if (static_cast<int>(values.size()) != grid.n_points)
        throw std::invalid_argument("FidelityCurve: size mismatch with grid");
    for (double v : values)
        if (!(v >= -1e-9 && v <= 1.0 + 1e-9))
            throw std::invalid_argument("FidelityCurve: value outside [0, 1]");
}

int FidelityCurve::peak_index() const {
    if (values.empty()) throw std::invalid_argument("FidelityCurve: empty");
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

double state_fidelity(const QuantumState& state, const QuantumState& target) {
    qkernel::require_same_basis(state.basis, target.basis, "state_fidelity");
    if (state.dim() != target.dim())
        throw std::invalid_argument("state_fidelity: dimension mismatch");
    if (target.kind != QuantumState::Kind::Pure)
        throw std::invalid_argument("state_fidelity: target must be pure");
    if (state.kind == QuantumState::Kind::Pure) return std::norm(target.vec.dot(state.vec));
    return (target.vec.adjoint() * state.rho * target.vec)(0, 0).real();
}

double ghz_fidelity(const QuantumState& state, int n_atoms) {
    if (n_atoms < 2) throw std::invalid_argument("ghz_fidelity: need at least two atoms");
    const auto [idx_ones, idx_rs] = ghz_component_indices(state.basis, n_atoms);
    if (idx_ones >= state.dim() || idx_rs >= state.dim())
        throw std::invalid_argument("ghz_fidelity: dimension mismatch");
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    double best = 0.0;
    for (const Complex phase : {Complex(0.0, 1.0), Complex(0.0, -1.0)}) {
        Vector ghz = Vector::Zero(state.dim());
        ghz(idx_ones) = inv_sqrt2;
        ghz(idx_rs) = phase * inv_sqrt2;
        best = std::max(best,
                        state_fidelity(state, QuantumState::pure(std::move(ghz), state.basis)));
    }
    return best;
}

ExtractedGate extract_gate(const Operator& h, int n_qubits, double t) {
    return extract_gate_curve(h, n_qubits, {t}).front();
}

std::vector<ExtractedGate> extract_gate_curve(const Operator& h, int n_qubits,
                                              const std::vector<double>& times) {
    if (n_qubits < 1) throw std::invalid_argument("extract_gate: need at least one qubit");
    if (times.empty()) throw std::invalid_argument("extract_gate: no sample times");
    const AtomBasis basis = AtomBasis::three_level(n_qubits);
    qkernel::require_same_basis(h.basis, basis.tag(), "extract_gate");
    if (qkernel::hermiticity_error(h.mat) > 1e-10)
        throw std::invalid_argument("extract_gate: non-Hermitian Hamiltonian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat);
    if (es.info() != Eigen::Success) throw NumericError("extract_gate: eigensolver failed");

    const std::vector<long> comp = computational_indices(n_qubits);
    const long dim = 1L << n_qubits;
    // Computational-row slice of the eigenvector matrix; the computational
    // block of U(t) is W e^{-i lambda t} W^dag.
    Matrix w(dim, h.dim());
    for (long i = 0; i < dim; ++i) w.row(i) = es.eigenvectors().row(comp[i]);

    std::vector<ExtractedGate> gates;
    gates.reserve(times.size());
    Matrix phased(dim, h.dim());
    for (const double t : times) {
        if (!std::isfinite(t)) throw std::invalid_argument("extract_gate: non-finite time");
        for (long k = 0; k < h.dim(); ++k)
            phased.col(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t)) * w.col(k);
        ExtractedGate gate;
        gate.n_qubits = n_qubits;
        gate.matrix = phased * w.adjoint();
        double leakage = 0.0;
        for (long j = 0; j < dim; ++j)
            leakage = std::max(leakage, 1.0 - gate.matrix.col(j).norm());
        gate.leakage = leakage;
        gates.push_back(std::move(gate));
    }
    return gates;
}

double unitary_gate_fidelity(const ExtractedGate& gate, const model::GateTarget& target) {
    if (gate.n_qubits != target.n_qubits)
        throw std::invalid_argument("unitary_gate_fidelity: qubit count mismatch");
    const long dim = 1L << gate.n_qubits;
    return std::abs((gate.matrix.adjoint() * target.matrix).trace()) / static_cast<double>(dim);
}

double dissipative_gate_fidelity(const Operator& h, const std::vector<Operator>& collapse,
                                 const model::GateTarget& target, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("dissipative_gate_fidelity: t must be positive");
    const int n = target.n_qubits;
    const AtomBasis basis = AtomBasis::three_level(n);
    qkernel::require_same_basis(h.basis, basis.tag(), "dissipative_gate_fidelity");
    const std::vector<long> comp = computational_indices(n);
    const long dim = 1L << n;
    const double amp = 1.0 / std::sqrt(static_cast<double>(dim));

    Vector input = Vector::Zero(h.dim());
    for (long q = 0; q < dim; ++q) input(comp[q]) = amp;
    Vector ideal_comp = target.matrix * (amp * Vector::Ones(dim));
    Vector ideal = Vector::Zero(h.dim());
    for (long q = 0; q < dim; ++q) ideal(comp[q]) = ideal_comp(q);

    const QuantumState rho0 = QuantumState::pure(std::move(input), h.basis);
    const dynamics::TimeGrid grid{0.0, t, 2};
    const dynamics::Trajectory traj = dynamics::propagate_density(h, collapse, rho0, grid);
    const QuantumState ideal_state = QuantumState::pure(std::move(ideal), h.basis);
    return state_fidelity(traj.states.back(), ideal_state);
}

double extract_alpha(const ExtractedGate& gate) {
    const long dim = 1L << gate.n_qubits;
    if (gate.matrix.rows() != dim || gate.matrix.cols() != dim)
        throw std::invalid_argument("extract_alpha: malformed gate matrix");
    double max_off_diag = 0.0;
    for (long j = 0; j < dim; ++j)
        for (long i = 0; i < dim; ++i)
            if (i != j) max_off_diag = std::max(max_off_diag, std::abs(gate.matrix(i, j)));
    if (gate.leakage + max_off_diag >= 0.1)
        throw NumericError("extract_alpha: gate not diagonal-dominant");
    return fitted_alpha(gate.matrix);
}

double fitted_alpha(const Matrix& gate_matrix) {
    const long dim = gate_matrix.rows();
    // Circular mean of the single-excitation phases: the wrap-safe form of
    // "average of arg(diagonal entry)", immune to the arg branch cut.
    Complex direction(0.0, 0.0);
    for (long q = 1; q < dim; ++q) {
        if (std::popcount(static_cast<unsigned long>(q)) != 1) continue;
        direction += std::exp(Complex(0.0, std::arg(gate_matrix(q, q))));
    }
    const double two_pi = 2.0 * std::numbers::pi;
    double alpha = std::arg(direction);
    if (alpha < 0.0) alpha += two_pi;
    if (alpha >= two_pi) alpha -= two_pi;
    return alpha;
}

}  // namespace rydsim::metrics
