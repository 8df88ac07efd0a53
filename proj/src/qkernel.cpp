#include "rydsim/qkernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rydsim::qkernel {

char level_char(Level level) {
    switch (level) {
        case Level::Zero: return '0';
        case Level::One: return '1';
        case Level::P: return 'p';
        case Level::R: return 'r';
    }
    throw std::invalid_argument("level_char: unknown level");
}

AtomBasis AtomBasis::two_level(int n_atoms) {
    AtomBasis b{{Level::One, Level::R}, n_atoms};
    b.validate();
    return b;
}

AtomBasis AtomBasis::three_level(int n_atoms) {
    AtomBasis b{{Level::Zero, Level::One, Level::R}, n_atoms};
    b.validate();
    return b;
}

AtomBasis AtomBasis::four_level(int n_atoms) {
    AtomBasis b{{Level::Zero, Level::One, Level::P, Level::R}, n_atoms};
    b.validate();
    return b;
}

void AtomBasis::validate() const {
    if (levels.empty()) throw std::invalid_argument("AtomBasis: empty level set");
    if (n_atoms < 1) throw std::invalid_argument("AtomBasis: n_atoms must be >= 1");
    if (!has(Level::One) || !has(Level::R))
        throw std::invalid_argument("AtomBasis: |1> and |r> must be present");
    for (std::size_t i = 0; i < levels.size(); ++i)
        for (std::size_t j = i + 1; j < levels.size(); ++j)
            if (levels[i] == levels[j]) throw std::invalid_argument("AtomBasis: duplicate level");
}

long AtomBasis::dim() const {
    long d = 1;
    for (int i = 0; i < n_atoms; ++i) d *= local_dim();
    return d;
}

bool AtomBasis::has(Level level) const {
    return std::find(levels.begin(), levels.end(), level) != levels.end();
}

int AtomBasis::level_index(Level level) const {
    auto it = std::find(levels.begin(), levels.end(), level);
    if (it == levels.end()) throw std::invalid_argument("AtomBasis: level not in basis");
    return static_cast<int>(it - levels.begin());
}

std::string AtomBasis::tag() const {
    std::string s = "product[";
    for (Level l : levels) s += level_char(l);
    s += "]x" + std::to_string(n_atoms);
    return s;
}

long AtomBasis::string_index(std::span<const Level> string) const {
    if (static_cast<int>(string.size()) != n_atoms)
        throw std::invalid_argument("string_index: wrong number of atoms");
    long index = 0;
    for (Level l : string) index = index * local_dim() + level_index(l);
    return index;
}

std::vector<Level> AtomBasis::string_of(long index) const {
    if (index < 0 || index >= dim()) throw std::invalid_argument("string_of: index out of range");
    std::vector<Level> string(static_cast<std::size_t>(n_atoms));
    for (int a = n_atoms - 1; a >= 0; --a) {
        string[static_cast<std::size_t>(a)] = levels[static_cast<std::size_t>(index % local_dim())];
        index /= local_dim();
    }
    return string;
}

long AtomBasis::all_of(Level level) const {
    long index = 0;
    for (int a = 0; a < n_atoms; ++a) index = index * local_dim() + level_index(level);
    return index;
}

std::string ladder_tag(int n_atoms) { return "ladder[n=" + std::to_string(n_atoms) + "]"; }

std::string effective_tag(int n_atoms) { return "effective[n=" + std::to_string(n_atoms) + "]"; }

void Operator::validate() const {
    if (mat.rows() != mat.cols()) throw std::invalid_argument("Operator: matrix not square");
    if (mat.rows() < 1) throw std::invalid_argument("Operator: empty matrix");
    require_finite(mat, "Operator");
}

QuantumState QuantumState::pure(Vector psi, std::string basis) {
    if (psi.size() < 1) throw std::invalid_argument("QuantumState::pure: empty vector");
    const double norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-9)
        throw std::invalid_argument("QuantumState::pure: state not normalized");
    QuantumState s;
    s.kind = Kind::Pure;
    s.vec = std::move(psi);
    s.basis = std::move(basis);
    return s;
}

QuantumState QuantumState::mixed(Matrix rho, std::string basis) {
    if (rho.rows() != rho.cols() || rho.rows() < 1)
        throw std::invalid_argument("QuantumState::mixed: matrix not square");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("QuantumState::mixed: density matrix not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
        throw std::invalid_argument("QuantumState::mixed: trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("QuantumState::mixed: negative eigenvalue");
    QuantumState s;
    s.kind = Kind::Mixed;
    s.rho = std::move(rho);
    s.basis = std::move(basis);
    return s;
}

QuantumState QuantumState::basis_state(long index, long dim, std::string basis) {
    if (index < 0 || index >= dim) throw std::invalid_argument("basis_state: index out of range");
    Vector psi = Vector::Zero(dim);
    psi(index) = 1.0;
    return pure(std::move(psi), std::move(basis));
}

QuantumState QuantumState::pure_unchecked(Vector psi, std::string basis) {
    QuantumState s;
    s.kind = Kind::Pure;
    s.vec = std::move(psi);
    s.basis = std::move(basis);
    return s;
}

QuantumState QuantumState::mixed_unchecked(Matrix rho, std::string basis) {
    QuantumState s;
    s.kind = Kind::Mixed;
    s.rho = std::move(rho);
    s.basis = std::move(basis);
    return s;
}

long QuantumState::dim() const { return kind == Kind::Pure ? vec.size() : rho.rows(); }

Matrix QuantumState::density() const {
    if (kind == Kind::Pure) return vec * vec.adjoint();
    return rho;
}

double QuantumState::population(long index) const {
    if (index < 0 || index >= dim()) throw std::invalid_argument("population: index out of range");
    if (kind == Kind::Pure) return std::norm(vec(index));
    return rho(index, index).real();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Operator kron(const Operator& a, const Operator& b) {
    return Operator{kron(a.mat, b.mat), "(" + a.basis + ")x(" + b.basis + ")"};
}

Operator embed(const Matrix& local_op, int atom_index, const AtomBasis& basis) {
    basis.validate();
    if (atom_index < 0 || atom_index >= basis.n_atoms)
        throw std::invalid_argument("embed: atom index out of range");
    if (local_op.rows() != basis.local_dim() || local_op.cols() != basis.local_dim())
        throw std::invalid_argument("embed: local operator dimension mismatch");
    const long d = basis.local_dim();
    Matrix out = Matrix::Identity(1, 1);
    for (int a = 0; a < basis.n_atoms; ++a)
        out = kron(out, a == atom_index ? local_op : Matrix(Matrix::Identity(d, d)));
    return Operator{std::move(out), basis.tag()};
}

std::vector<QuantumState> symmetric_projector(const AtomBasis& basis) {
    basis.validate();
    if (basis.local_dim() != 2 || !basis.has(Level::One) || !basis.has(Level::R))
        throw std::invalid_argument("symmetric_projector: basis must have levels {|1>,|r>}");
    const int n = basis.n_atoms;
    const int r_digit = basis.level_index(Level::R);
    const long dim = basis.dim();
    std::vector<Vector> dicke(static_cast<std::size_t>(n) + 1, Vector::Zero(dim));
    std::vector<long> counts(static_cast<std::size_t>(n) + 1, 0);
    for (long idx = 0; idx < dim; ++idx) {
        int k = 0;
        long rest = idx;
        for (int a = 0; a < n; ++a) {
            if (rest % 2 == r_digit) ++k;
            rest /= 2;
        }
        dicke[static_cast<std::size_t>(k)](idx) = 1.0;
        ++counts[static_cast<std::size_t>(k)];
    }
    std::vector<QuantumState> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        Vector v = dicke[static_cast<std::size_t>(k)] / std::sqrt(static_cast<double>(counts[static_cast<std::size_t>(k)]));
        out.push_back(QuantumState::pure(std::move(v), basis.tag()));
    }
    return out;
}

double hermiticity_error(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

void require_same_basis(const std::string& a, const std::string& b, const char* context) {
    if (a != b)
        throw std::invalid_argument(std::string(context) + ": basis mismatch ('" + a + "' vs '" + b + "')");
}

void require_finite(const Matrix& m, const char* context) {
    if (!m.allFinite()) throw std::runtime_error(std::string(context) + ": non-finite entries");
}

}  // namespace rydsim::qkernel
