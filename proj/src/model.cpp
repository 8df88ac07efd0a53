#include "rydsim/model.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace rydsim::model {

using qkernel::Complex;
using qkernel::Level;

double PhysParams::u_between(int i, int j) const {
    if (u_pair) return (*u_pair)(i, j);
    return u;
}

void PhysParams::validate() const {
    if (n_atoms < 1) throw std::invalid_argument("PhysParams: n_atoms must be >= 1");
    if (gamma_p < 0 || gamma_r < 0) throw std::invalid_argument("PhysParams: negative decay rate");
    if (gamma0 && *gamma0 < 0) throw std::invalid_argument("PhysParams: negative gamma0");
    if (gamma1 && *gamma1 < 0) throw std::invalid_argument("PhysParams: negative gamma1");
    if (gamma0 && gamma1 && std::abs(*gamma0 + *gamma1 - gamma_r) > 1e-12)
        throw std::invalid_argument("PhysParams: gamma0 + gamma1 != gamma_r");
    if (p_branch_to_0 < 0.0 || p_branch_to_0 > 1.0)
        throw std::invalid_argument("PhysParams: p_branch_to_0 outside [0,1]");
    if (u_pair) {
        if (u_pair->rows() != n_atoms || u_pair->cols() != n_atoms)
            throw std::invalid_argument("PhysParams: u_pair size mismatch");
        for (int i = 0; i < n_atoms; ++i) {
            if ((*u_pair)(i, i) != 0.0) throw std::invalid_argument("PhysParams: u_pair diagonal must be zero");
            for (int j = 0; j < n_atoms; ++j)
                if (std::abs((*u_pair)(i, j) - (*u_pair)(j, i)) > 1e-12)
                    throw std::invalid_argument("PhysParams: u_pair not symmetric");
        }
    }
}

double rydberg_u(const InteractionSpec& spec) {
    if (spec.r <= 0.0) throw std::invalid_argument("rydberg_u: distance must be positive");
    return spec.c3 / (spec.r * spec.r * spec.r);
}

double resonance_u(int n_atoms, double delta) {
    if (n_atoms < 2) throw std::invalid_argument("resonance_u: need at least two atoms");
    return 2.0 * delta / (n_atoms - 1);
}

GateTarget build_gate_target(int n_qubits, double alpha) {
    if (n_qubits < 2) throw std::invalid_argument("build_gate_target: need at least two qubits");
    const long dim = 1L << n_qubits;
    Matrix m = Matrix::Zero(dim, dim);
    for (long s = 0; s < dim; ++s) {
        int ones = 0;
        for (long rest = s; rest != 0; rest >>= 1) ones += static_cast<int>(rest & 1);
        Complex phase = std::polar(1.0, ones * alpha);
        if (s == dim - 1) phase = -phase;
        m(s, s) = phase;
    }
    return GateTarget{n_qubits, alpha, std::move(m)};
}

namespace {

/// |a><b| on the local level space of `basis`.
Matrix local_transfer(const AtomBasis& basis, Level a, Level b) {
    Matrix m = Matrix::Zero(basis.local_dim(), basis.local_dim());
    m(basis.level_index(a), basis.level_index(b)) = 1.0;
    return m;
}

/// Sum of pairwise U_ij n_r^i n_r^j over i < j.
Matrix interaction_term(const PhysParams& params, const AtomBasis& basis) {
    const Matrix n_r = local_transfer(basis, Level::R, Level::R);
    std::vector<Matrix> n_r_embedded;
    n_r_embedded.reserve(static_cast<std::size_t>(params.n_atoms));
    for (int i = 0; i < params.n_atoms; ++i)
        n_r_embedded.push_back(qkernel::embed(n_r, i, basis).mat);
    Matrix out = Matrix::Zero(basis.dim(), basis.dim());
    for (int i = 0; i < params.n_atoms; ++i)
        for (int j = i + 1; j < params.n_atoms; ++j)
            out += params.u_between(i, j) * (n_r_embedded[static_cast<std::size_t>(i)] *
                                             n_r_embedded[static_cast<std::size_t>(j)]);
    return out;
}

}  // namespace

std::pair<Operator, std::vector<Operator>> build_full_h(const PhysParams& params) {
    params.validate();
    const AtomBasis basis = AtomBasis::four_level(params.n_atoms);
    Matrix local = Matrix::Zero(4, 4);
    local += -params.delta_big * local_transfer(basis, Level::P, Level::P);
    local += -params.delta * local_transfer(basis, Level::R, Level::R);
    local += params.omega_r * (local_transfer(basis, Level::One, Level::P) +
                               local_transfer(basis, Level::P, Level::One));
    local += params.omega_b * (local_transfer(basis, Level::P, Level::R) +
                               local_transfer(basis, Level::R, Level::P));
    Matrix h = Matrix::Zero(basis.dim(), basis.dim());
    for (int i = 0; i < params.n_atoms; ++i) h += qkernel::embed(local, i, basis).mat;
    h += interaction_term(params, basis);
    return {Operator{std::move(h), basis.tag()}, collapse_ops(params, basis)};
}

Operator build_eliminated_h(const PhysParams& params, bool absorb_shifts) {
    params.validate();
    if (params.delta_big == 0.0)
        throw std::invalid_argument("build_eliminated_h: one-photon detuning Delta must be nonzero");
    const AtomBasis basis = AtomBasis::three_level(params.n_atoms);
    const double omega_eff = params.omega_r * params.omega_b / params.delta_big;
    const double shift_1 = params.omega_r * params.omega_r / params.delta_big;
    const double shift_r = params.omega_b * params.omega_b / params.delta_big;
    Matrix local = Matrix::Zero(3, 3);
    local += omega_eff * (local_transfer(basis, Level::One, Level::R) +
                          local_transfer(basis, Level::R, Level::One));
    if (absorb_shifts) {
        local += -params.delta * local_transfer(basis, Level::R, Level::R);
    } else {
        local += (-params.delta + shift_r) * local_transfer(basis, Level::R, Level::R);
        local += shift_1 * local_transfer(basis, Level::One, Level::One);
    }
    Matrix h = Matrix::Zero(basis.dim(), basis.dim());
    for (int i = 0; i < params.n_atoms; ++i) h += qkernel::embed(local, i, basis).mat;
    h += interaction_term(params, basis);
    return Operator{std::move(h), basis.tag()};
}

Operator build_ladder_h(int n_atoms, double delta, double u) {
    if (n_atoms < 1) throw std::invalid_argument("build_ladder_h: need at least one atom");
    const int n = n_atoms;
    Matrix h = Matrix::Zero(n + 1, n + 1);
    for (int k = 0; k <= n; ++k) h(k, k) = 0.5 * k * (k - 1) * u - k * delta;
    for (int k = 0; k < n; ++k) {
        const double g = std::sqrt(static_cast<double>((k + 1) * (n - k)));
        h(k, k + 1) = g;
        h(k + 1, k) = g;
    }
    return Operator{std::move(h), qkernel::ladder_tag(n)};
}

Operator build_effective_h(double delta) {
    if (delta == 0.0) throw std::invalid_argument("build_effective_h: delta must be nonzero");
    return build_effective_h_from(6.0 / (delta * delta), 3.0 / delta, 3);
}

Operator build_effective_h_from(double g_eff, double shift, int n_atoms) {
    Matrix h(2, 2);
    h << shift, g_eff, g_eff, shift;
    return Operator{std::move(h), qkernel::effective_tag(n_atoms)};
}

std::vector<Operator> collapse_ops(const PhysParams& params, const AtomBasis& basis) {
    params.validate();
    basis.validate();
    if (basis.n_atoms != params.n_atoms)
        throw std::invalid_argument("collapse_ops: atom count mismatch");
    std::vector<Operator> ops;
    const double g0 = params.effective_gamma0();
    const double g1 = params.effective_gamma1();
    if (params.gamma_r > 0.0 && g0 > 0.0 && !basis.has(Level::Zero))
        throw std::invalid_argument("collapse_ops: decay to |0> requires |0> in the basis");
    for (int i = 0; i < params.n_atoms; ++i) {
        if (params.gamma_r > 0.0) {
            if (g0 > 0.0)
                ops.push_back(qkernel::embed(std::sqrt(g0) * local_transfer(basis, Level::Zero, Level::R), i, basis));
            if (g1 > 0.0)
                ops.push_back(qkernel::embed(std::sqrt(g1) * local_transfer(basis, Level::One, Level::R), i, basis));
        }
        if (params.gamma_p > 0.0 && basis.has(Level::P)) {
            const double gp0 = params.gamma_p * params.p_branch_to_0;
            const double gp1 = params.gamma_p * (1.0 - params.p_branch_to_0);
            if (gp0 > 0.0)
                ops.push_back(qkernel::embed(std::sqrt(gp0) * local_transfer(basis, Level::Zero, Level::P), i, basis));
            if (gp1 > 0.0)
                ops.push_back(qkernel::embed(std::sqrt(gp1) * local_transfer(basis, Level::One, Level::P), i, basis));
        }
    }
    return ops;
}

}  // namespace rydsim::model
