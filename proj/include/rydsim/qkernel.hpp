// Numeric substrate: complex matrices, tensor-product embedding, and basis
// bookkeeping for multi-atom Hilbert spaces. Dense storage throughout; the
// largest in-scope dimension is 4^4 = 256, so sparsity would be wasted effort.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace rydsim::qkernel {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Single-atom levels used by the scheme. |0>,|1> form the qubit, |p> is the
/// optical intermediate state, |r> the Rydberg state.
enum class Level : int { Zero = 0, One = 1, P = 2, R = 3 };

char level_char(Level level);

/// Ordered set of local levels replicated over n_atoms. The leftmost atom is
/// the most significant digit of a product-basis index.
struct AtomBasis {
    std::vector<Level> levels;
    int n_atoms = 1;

    static AtomBasis two_level(int n_atoms);    // {|1>,|r>}
    static AtomBasis three_level(int n_atoms);  // {|0>,|1>,|r>}
    static AtomBasis four_level(int n_atoms);   // {|0>,|1>,|p>,|r>}

    int local_dim() const { return static_cast<int>(levels.size()); }
    long dim() const;
    bool has(Level level) const;
    /// Position of `level` inside `levels`; throws std::invalid_argument if absent.
    int level_index(Level level) const;
    /// Identifier such as "product[01r]x3"; basis-mismatch checks compare these.
    std::string tag() const;

    /// Index of the product state given one level per atom (leftmost first).
    long string_index(std::span<const Level> string) const;
    std::vector<Level> string_of(long index) const;
    /// Index of |l l ... l>.
    long all_of(Level level) const;

    void validate() const;
};

/// Tags for the two non-product bases used by the reduced models.
std::string ladder_tag(int n_atoms);     // symmetric Dicke ladder, dim n_atoms+1
std::string effective_tag(int n_atoms);  // {|1...1>,|r...r>} two-level space

/// Dense square complex matrix together with the basis it acts on.
struct Operator {
    Matrix mat;
    std::string basis;

    long dim() const { return mat.rows(); }
    void validate() const;
};

/// Pure state vector or density matrix, tagged with its basis.
struct QuantumState {
    enum class Kind { Pure, Mixed };

    Kind kind = Kind::Pure;
    Vector vec;   // used when kind == Pure
    Matrix rho;   // used when kind == Mixed
    std::string basis;

    /// Validating constructors: pure requires unit norm within 1e-9, mixed
    /// requires Hermiticity/unit trace within 1e-9 and eigenvalues >= -1e-8.
    static QuantumState pure(Vector psi, std::string basis);
    static QuantumState mixed(Matrix rho, std::string basis);
    /// Pure basis state |index> of dimension dim.
    static QuantumState basis_state(long index, long dim, std::string basis);

    /// Non-validating constructors for integrator output, where the invariants
    /// are enforced by the integrator's own drift checks (and norms may be < 1
    /// by design in non-Hermitian evolution). Not for external input.
    static QuantumState pure_unchecked(Vector psi, std::string basis);
    static QuantumState mixed_unchecked(Matrix rho, std::string basis);

    long dim() const;
    /// |psi><psi| for pure states, rho itself for mixed ones.
    Matrix density() const;
    /// Population of computational basis state `index` (diagonal of rho).
    double population(long index) const;
};

/// Tensor product with row-major index convention: index = i_a * dim_b + i_b.
Matrix kron(const Matrix& a, const Matrix& b);
Operator kron(const Operator& a, const Operator& b);

/// local_op on atom `atom_index`, identity elsewhere. local_op must be
/// local_dim x local_dim.
Operator embed(const Matrix& local_op, int atom_index, const AtomBasis& basis);

/// The N+1 normalized symmetric Dicke states |N^k> (k = 0..N excitations in
/// |r>) as unit vectors in the 2^N product space. Requires levels == {|1>,|r>}.
std::vector<QuantumState> symmetric_projector(const AtomBasis& basis);

/// max_ij |M - M^dagger|, used for Hermiticity checks.
double hermiticity_error(const Matrix& m);

/// Throws std::invalid_argument when the two tags differ.
void require_same_basis(const std::string& a, const std::string& b, const char* context);

/// Throws std::runtime_error if the matrix contains NaN or Inf.
void require_finite(const Matrix& m, const char* context);

}  // namespace rydsim::qkernel
