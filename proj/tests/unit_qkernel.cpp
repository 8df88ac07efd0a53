// Numeric-substrate tests: basis bookkeeping, tensor products, embedding,
// Dicke states, and state/operator validation.
#include <doctest.h>

#include "rydsim/qkernel.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <vector>

using namespace rydsim::qkernel;

namespace {

const std::complex<double> kI{0.0, 1.0};

Matrix sigma_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

}  // namespace

TEST_CASE("level characters") {
    CHECK(level_char(Level::Zero) == '0');
    CHECK(level_char(Level::One) == '1');
    CHECK(level_char(Level::P) == 'p');
    CHECK(level_char(Level::R) == 'r');
}

TEST_CASE("basis factories and tags") {
    const AtomBasis two = AtomBasis::two_level(3);
    CHECK(two.local_dim() == 2);
    CHECK(two.dim() == 8);
    CHECK(two.tag() == "product[1r]x3");

    const AtomBasis three = AtomBasis::three_level(3);
    CHECK(three.local_dim() == 3);
    CHECK(three.dim() == 27);
    CHECK(three.tag() == "product[01r]x3");

    const AtomBasis four = AtomBasis::four_level(2);
    CHECK(four.local_dim() == 4);
    CHECK(four.dim() == 16);
    CHECK(four.tag() == "product[01pr]x2");

    CHECK(ladder_tag(3) == "ladder[n=3]");
    CHECK(effective_tag(4) == "effective[n=4]");
}

TEST_CASE("basis membership and level lookup") {
    const AtomBasis three = AtomBasis::three_level(2);
    CHECK(three.has(Level::Zero));
    CHECK(three.has(Level::One));
    CHECK(three.has(Level::R));
    CHECK(!three.has(Level::P));
    CHECK(three.level_index(Level::Zero) == 0);
    CHECK(three.level_index(Level::One) == 1);
    CHECK(three.level_index(Level::R) == 2);
    CHECK_THROWS_AS(three.level_index(Level::P), std::invalid_argument);
}

TEST_CASE("basis validation rejects malformed level sets") {
    const AtomBasis empty{{}, 2};
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
    const AtomBasis zero_atoms{{Level::One, Level::R}, 0};
    CHECK_THROWS_AS(zero_atoms.validate(), std::invalid_argument);
    // |1> and |r> are the scheme's active levels and must always be present.
    const AtomBasis no_r{{Level::Zero, Level::One}, 2};
    CHECK_THROWS_AS(no_r.validate(), std::invalid_argument);
    const AtomBasis no_one{{Level::Zero, Level::R}, 2};
    CHECK_THROWS_AS(no_one.validate(), std::invalid_argument);
    const AtomBasis duplicate{{Level::One, Level::R, Level::One}, 2};
    CHECK_THROWS_AS(duplicate.validate(), std::invalid_argument);
}

TEST_CASE("string indexing: leftmost atom is most significant") {
    const AtomBasis three = AtomBasis::three_level(3);
    const std::array<Level, 3> ones{Level::One, Level::One, Level::One};
    const std::array<Level, 3> rs{Level::R, Level::R, Level::R};
    const std::array<Level, 3> zor{Level::Zero, Level::One, Level::R};
    CHECK(three.string_index(ones) == 13);  // 1*9 + 1*3 + 1
    CHECK(three.string_index(rs) == 26);    // 2*9 + 2*3 + 2
    CHECK(three.string_index(zor) == 5);    // 0*9 + 1*3 + 2
    CHECK(three.all_of(Level::One) == 13);
    CHECK(three.all_of(Level::R) == 26);

    const std::vector<Level> back = three.string_of(5);
    REQUIRE(back.size() == 3);
    CHECK(back[0] == Level::Zero);
    CHECK(back[1] == Level::One);
    CHECK(back[2] == Level::R);

    for (long idx = 0; idx < three.dim(); ++idx)
        CHECK(three.string_index(three.string_of(idx)) == idx);

    const std::array<Level, 2> too_short{Level::One, Level::One};
    CHECK_THROWS_AS(three.string_index(too_short), std::invalid_argument);
    CHECK_THROWS_AS(three.string_of(-1), std::invalid_argument);
    CHECK_THROWS_AS(three.string_of(27), std::invalid_argument);
}

TEST_CASE("kron identity and diagonal structure") {
    const Matrix i2 = Matrix::Identity(2, 2);
    CHECK((kron(i2, i2) - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

    Matrix d(2, 2);
    d << 3.0, 0, 0, -2.0;
    const Matrix out = kron(d, i2);
    Matrix expect = Matrix::Zero(4, 4);
    expect.diagonal() << 3.0, 3.0, -2.0, -2.0;
    CHECK((out - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kron mixed-product and associativity properties") {
    const Matrix a = Matrix::Random(2, 2);
    const Matrix b = Matrix::Random(2, 2);
    const Vector u = Vector::Random(2);
    const Vector v = Vector::Random(2);

    // (A (x) B)(u (x) v) = (A u) (x) (B v) with index = i_a * dim_b + i_b.
    const Vector lhs = kron(a, b) * kron(Matrix(u), Matrix(v));
    const Vector rhs = kron(Matrix(a * u), Matrix(b * v));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

    const Matrix c = Matrix::Random(3, 3);
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).cwiseAbs().maxCoeff() < 1e-12);

    const Operator oa{a, "A"};
    const Operator ob{b, "B"};
    const Operator prod = kron(oa, ob);
    CHECK(prod.dim() == 4);
    CHECK(prod.basis == "(A)x(B)");
}

TEST_CASE("embed places a local operator on one atom") {
    const AtomBasis two = AtomBasis::two_level(3);
    Matrix rr = Matrix::Zero(2, 2);
    rr(1, 1) = 1.0;  // |r><r| in the {|1>,|r>} local ordering

    const Operator mid = embed(rr, 1, two);
    CHECK(mid.basis == two.tag());
    for (long idx = 0; idx < 8; ++idx) {
        const double expect = ((idx / 2) % 2 == 1) ? 1.0 : 0.0;
        CHECK(std::abs(mid.mat(idx, idx).real() - expect) == 0.0);
    }
    CHECK(mid.mat.cwiseAbs().sum() == doctest::Approx(4.0));  // diagonal projector

    const AtomBasis one_atom = AtomBasis::two_level(1);
    const Operator same = embed(sigma_x(), 0, one_atom);
    CHECK((same.mat - sigma_x()).cwiseAbs().maxCoeff() == 0.0);

    // Counting operator: sum_i |r><r|_i has eigenvalue 3 on |rrr>.
    Matrix count = Matrix::Zero(8, 8);
    for (int atom = 0; atom < 3; ++atom) count += embed(rr, atom, two).mat;
    Vector rrr = Vector::Zero(8);
    rrr(two.all_of(Level::R)) = 1.0;
    CHECK(((count * rrr) - 3.0 * rrr).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(embed(rr, 3, two), std::invalid_argument);
    CHECK_THROWS_AS(embed(rr, -1, two), std::invalid_argument);
    CHECK_THROWS_AS(embed(Matrix::Identity(3, 3), 0, two), std::invalid_argument);
}

TEST_CASE("embeds on distinct atoms commute") {
    const AtomBasis two = AtomBasis::two_level(3);
    const Matrix a = Matrix::Random(2, 2);
    const Matrix b = Matrix::Random(2, 2);
    const Matrix ea = embed(a, 0, two).mat;
    const Matrix eb = embed(b, 2, two).mat;
    CHECK((ea * eb - eb * ea).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("symmetric Dicke states") {
    const AtomBasis two3 = AtomBasis::two_level(3);
    const std::vector<QuantumState> dicke3 = symmetric_projector(two3);
    REQUIRE(dicke3.size() == 4);

    // k = 0 is |111>, which is product index 0 in the {|1>,|r>} ordering.
    CHECK(std::abs(dicke3[0].vec(0) - 1.0) == 0.0);
    CHECK(dicke3[0].vec.tail(7).cwiseAbs().maxCoeff() == 0.0);

    // k = 1 is (|r11> + |1r1> + |11r>)/sqrt(3): product indices 4, 2, 1.
    const double amp = 1.0 / std::sqrt(3.0);
    for (long idx : {4L, 2L, 1L}) CHECK(dicke3[1].vec(idx).real() == doctest::Approx(amp));
    CHECK(std::abs(dicke3[1].vec(0)) == 0.0);
    CHECK(std::abs(dicke3[1].vec(7)) == 0.0);

    // k = 3 is |rrr>.
    CHECK(std::abs(dicke3[3].vec(7) - 1.0) == 0.0);

    // N=4, k=2: equal superposition of the C(4,2)=6 two-r strings.
    const AtomBasis two4 = AtomBasis::two_level(4);
    const std::vector<QuantumState> dicke4 = symmetric_projector(two4);
    REQUIRE(dicke4.size() == 5);
    int nonzero = 0;
    for (long idx = 0; idx < 16; ++idx) {
        const double a = std::abs(dicke4[2].vec(idx));
        if (a > 0.0) {
            ++nonzero;
            CHECK(a == doctest::Approx(1.0 / std::sqrt(6.0)));
        }
    }
    CHECK(nonzero == 6);
    CHECK(dicke4[2].vec.norm() == doctest::Approx(1.0));

    // Mutual orthonormality within 1e-12.
    for (std::size_t i = 0; i < dicke4.size(); ++i)
        for (std::size_t j = 0; j < dicke4.size(); ++j) {
            const std::complex<double> overlap = dicke4[i].vec.dot(dicke4[j].vec);
            const double expect = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(overlap - expect) < 1e-12);
        }

    CHECK_THROWS_AS(symmetric_projector(AtomBasis::three_level(2)), std::invalid_argument);
}

TEST_CASE("pure-state validation") {
    Vector good(2);
    good << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
    const QuantumState s = QuantumState::pure(good, "b");
    CHECK(s.kind == QuantumState::Kind::Pure);
    CHECK(s.dim() == 2);
    CHECK(s.population(0) == doctest::Approx(0.5));
    CHECK(s.population(1) == doctest::Approx(0.5));

    Vector bad(2);
    bad << 1.0, 1.0;
    CHECK_THROWS_AS(QuantumState::pure(bad, "b"), std::invalid_argument);
    CHECK_THROWS_AS(QuantumState::pure(Vector{}, "b"), std::invalid_argument);

    const QuantumState e2 = QuantumState::basis_state(2, 4, "b");
    CHECK(std::abs(e2.vec(2) - 1.0) == 0.0);
    CHECK(e2.population(2) == 1.0);
    CHECK_THROWS_AS(QuantumState::basis_state(4, 4, "b"), std::invalid_argument);
    CHECK_THROWS_AS(QuantumState::basis_state(-1, 4, "b"), std::invalid_argument);

    const Matrix rho = e2.density();
    CHECK(std::abs(rho(2, 2) - 1.0) == 0.0);
    CHECK(rho.cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("mixed-state validation") {
    const Matrix max_mixed = Matrix::Identity(2, 2) / 2.0;
    const QuantumState s = QuantumState::mixed(max_mixed, "b");
    CHECK(s.kind == QuantumState::Kind::Mixed);
    CHECK(s.population(0) == doctest::Approx(0.5));
    CHECK((s.density() - max_mixed).cwiseAbs().maxCoeff() == 0.0);

    Matrix not_herm(2, 2);
    not_herm << 0.5, 1.0, 0.0, 0.5;
    CHECK_THROWS_AS(QuantumState::mixed(not_herm, "b"), std::invalid_argument);

    CHECK_THROWS_AS(QuantumState::mixed(Matrix(Matrix::Identity(2, 2)), "b"),
                    std::invalid_argument);  // trace 2

    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS_AS(QuantumState::mixed(neg, "b"), std::invalid_argument);

    CHECK_THROWS_AS(s.population(2), std::invalid_argument);
}

TEST_CASE("operator validation and helper checks") {
    const Operator not_square{Matrix::Zero(2, 3), "b"};
    CHECK_THROWS_AS(not_square.validate(), std::invalid_argument);
    const Operator empty_op{Matrix{}, "b"};
    CHECK_THROWS_AS(empty_op.validate(), std::invalid_argument);
    Matrix nan_mat = Matrix::Zero(2, 2);
    nan_mat(0, 0) = std::nan("");
    const Operator nan_op{nan_mat, "b"};
    CHECK_THROWS_AS(nan_op.validate(), std::runtime_error);
    CHECK_THROWS_AS(require_finite(nan_mat, "ctx"), std::runtime_error);

    Matrix herm(2, 2);
    herm << 1.0, kI, -kI, 2.0;
    CHECK(hermiticity_error(herm) == 0.0);
    Matrix upper = Matrix::Zero(2, 2);
    upper(0, 1) = 1.0;
    CHECK(hermiticity_error(upper) == doctest::Approx(1.0));

    CHECK_NOTHROW(require_same_basis("a", "a", "ctx"));
    CHECK_THROWS_AS(require_same_basis("a", "b", "ctx"), std::invalid_argument);
}
