#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "cxmat.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace rhmc;
using namespace rhmc::fixtures;

namespace {
const double kKappa = 0.5;
}

TEST_CASE("numeric_rank on pinned matrices") {
    CHECK(numeric_rank(CMatrix::Zero(3, 3)) == 0);
    CHECK(numeric_rank(CMatrix::Identity(3, 3)) == 3);
    CMatrix M = first_example_G1() - CMatrix::Identity(3, 3);
    CHECK(numeric_rank(M) == 1);
}

TEST_CASE("kernel_basis size and determinism") {
    CHECK(kernel_basis(CMatrix::Identity(3, 3)).empty());
    auto z = kernel_basis(CMatrix::Zero(2, 2));
    REQUIRE(z.size() == 2);
    CHECK(std::abs((z[0].adjoint() * z[1])(0)) < 1e-12);

    CMatrix M = first_example_G2() - CMatrix::Identity(3, 3);
    auto k = kernel_basis(M);
    REQUIRE(k.size() == 1);
    CHECK((M * k[0]).norm() < 1e-10);

    auto k2 = kernel_basis(M);
    CHECK((k[0] - k2[0]).norm() == 0.0);

    std::mt19937 rng(7);
    for (int t = 0; t < 20; ++t) {
        CMatrix R = random_matrix(rng, 4);
        R.col(3) = R.col(0) + R.col(1);  // force a null direction
        CHECK(numeric_rank(R) + (int)kernel_basis(R).size() == 4);
    }
}

TEST_CASE("jordan_structure on pinned matrices") {
    CMatrix D = CMatrix::Zero(3, 3);
    D.diagonal() << 2, 2, 3;
    JordanStructure expect{{cplx(3, 0), {1}}, {cplx(2, 0), {1, 1}}};
    CHECK(jordan_equal(jordan_structure(D), expect, 1e-8));

    CMatrix J = CMatrix::Identity(3, 3);
    J(0, 1) = 1;  // J(1,2) + J(1,1)
    JordanStructure expect2{{cplx(1, 0), {2, 1}}};
    CHECK(jordan_equal(jordan_structure(J), expect2, 1e-8));

    JordanStructure expect3{{cplx(1, 0), {1}}, {cplx(-1, 0), {1}}};
    CHECK(jordan_equal(jordan_structure(first_example_Gt1()), expect3, 1e-8));
}

TEST_CASE("jordan_structure is conjugation-invariant") {
    std::mt19937 rng(11);
    CMatrix J = CMatrix::Zero(4, 4);
    J.diagonal() << cplx(0.5, 0.25), cplx(0.5, 0.25), cplx(-1, 0), cplx(-1, 0);
    J(0, 1) = 1;
    JordanStructure expect{{cplx(0.5, 0.25), {2}}, {cplx(-1, 0), {1, 1}}};
    // a defective eigenvalue splits by ~sqrt(eps) under conjugation round-off,
    // so the cluster tolerance must sit above that scale
    ToleranceConfig loose;
    loose.eig_cluster_tol = 1e-6;
    for (int t = 0; t < 10; ++t) {
        CMatrix C = random_invertible(rng, 4);
        CMatrix M = C * J * C.inverse();
        CHECK(jordan_equal(jordan_structure(M, loose), expect, 1e-5));
    }
}

TEST_CASE("matrix_log_normalized on pinned matrices") {
    CHECK(matrix_log_normalized(CMatrix::Identity(3, 3)).norm() < 1e-12);

    CMatrix G(2, 2);
    G << 1, 0, -two_pi_i * kKappa, 1;
    CMatrix W(2, 2);
    W << 0, 0, -kKappa, 0;
    CHECK((matrix_log_normalized(G) - W).norm() < 1e-12);

    CMatrix D = CMatrix::Zero(2, 2);
    D.diagonal() << -2, 2;
    cplx w = std::log(2.0) / two_pi_i;
    CMatrix L = matrix_log_normalized(D);
    CHECK(std::abs(L(0, 0) - (0.5 + w)) < 1e-12);
    CHECK(std::abs(L(1, 1) - w) < 1e-12);
    CHECK(std::abs(L(0, 1)) + std::abs(L(1, 0)) < 1e-12);
}

TEST_CASE("matrix_exp_2pii on pinned matrices") {
    CHECK((matrix_exp_2pii(CMatrix::Zero(2, 2)) - CMatrix::Identity(2, 2)).norm() < 1e-14);

    CMatrix A = CMatrix::Zero(2, 2);
    A.diagonal() << 0.5, 0.0;
    CMatrix E = matrix_exp_2pii(A);
    CHECK(std::abs(E(0, 0) + 1.0) < 1e-13);
    CHECK(std::abs(E(1, 1) - 1.0) < 1e-13);

    CMatrix W(2, 2);
    W << 0, 0, -kKappa, 0;
    CMatrix G(2, 2);
    G << 1, 0, -two_pi_i * kKappa, 1;
    CHECK((matrix_exp_2pii(W) - G).norm() < 1e-12);
}

TEST_CASE("exp-log round trip on random invertible matrices") {
    std::mt19937 rng(23);
    for (int t = 0; t < 25; ++t) {
        int p = 2 + (t % 3);
        CMatrix G = random_offcut_invertible(rng, p);
        CMatrix W = matrix_log_normalized(G);
        CHECK((matrix_exp_2pii(W) - G).norm() <= 1e-8 * G.norm());
        for (auto ev : W.eigenvalues()) {
            CHECK(ev.real() >= -1e-10);
            CHECK(ev.real() < 1.0 - 1e-10);
        }
    }
}

TEST_CASE("matrix_log_normalized handles nontrivial Jordan blocks") {
    CMatrix G(3, 3);
    G << -1, 1, 0, 0, -1, 0, 0, 0, 2;  // J(-1,2) + J(2,1)
    CMatrix W = matrix_log_normalized(G);
    CHECK((matrix_exp_2pii(W) - G).norm() < 1e-10);
    for (auto ev : W.eigenvalues()) {
        CHECK(ev.real() >= -1e-10);
        CHECK(ev.real() < 1.0 - 1e-10);
    }
}

TEST_CASE("matrix_log_normalized rejects singular input") {
    CMatrix S = CMatrix::Zero(2, 2);
    S(0, 0) = 1;
    CHECK_THROWS_AS(matrix_log_normalized(S), rhmc_error);
}

TEST_CASE("is_irreducible_tuple on pinned tuples") {
    MatrixTuple second(TupleRole::monodromy,
                       {second_example_G1(), second_example_G2(), second_example_G3()});
    CHECK(is_irreducible_tuple(second));

    CMatrix D1 = CMatrix::Zero(3, 3), D2 = CMatrix::Zero(3, 3);
    D1.diagonal() << 1, 2, 3;
    D2.diagonal() << 4, 5, 6;
    CHECK_FALSE(is_irreducible_tuple({TupleRole::monodromy, {D1, D2}}));

    MatrixTuple reduced(TupleRole::monodromy, {first_example_Gt1(), first_example_Gt2()});
    CHECK(is_irreducible_tuple(reduced));
}

TEST_CASE("is_irreducible_tuple: common invariant subspace means reducible") {
    std::mt19937 rng(31);
    for (int t = 0; t < 10; ++t) {
        // block upper triangular tuples share the subspace spanned by e1
        CMatrix X = random_matrix(rng, 3), Y = random_matrix(rng, 3);
        X(1, 0) = X(2, 0) = Y(1, 0) = Y(2, 0) = 0;
        MatrixTuple T(TupleRole::residue, {X, Y});
        CHECK_FALSE(is_irreducible_tuple(T));
        CMatrix C = random_invertible(rng, 3);
        CMatrix Ci = C.inverse();
        MatrixTuple Tc(TupleRole::residue, {C * X * Ci, C * Y * Ci});
        CHECK_FALSE(is_irreducible_tuple(Tc));
    }
}

TEST_CASE("simultaneous_conjugator finds a witness") {
    MatrixTuple T1(TupleRole::monodromy, {first_example_G1(), first_example_G2()});
    auto self = simultaneous_conjugator(T1, T1);
    REQUIRE(self.has_value());
    CHECK(tuple_conjugation_residual(T1, T1, *self) < 1e-8);

    std::mt19937 rng(41);
    for (int t = 0; t < 10; ++t) {
        CMatrix C0 = random_invertible(rng, 3);
        CMatrix C0i = C0.inverse();
        MatrixTuple T2(TupleRole::monodromy,
                       {C0 * first_example_G1() * C0i, C0 * first_example_G2() * C0i});
        auto C = simultaneous_conjugator(T1, T2);
        REQUIRE(C.has_value());
        CHECK(tuple_conjugation_residual(T1, T2, *C) <= 1e-8);
    }
}

TEST_CASE("simultaneous_conjugator rejects non-conjugate tuples") {
    MatrixTuple T1(TupleRole::monodromy, {first_example_Gt1(), first_example_Gt2()});
    CMatrix S = first_example_Gt1();
    S(0, 0) += 0.5;  // trace no longer matches
    MatrixTuple T2(TupleRole::monodromy, {S, first_example_Gt2()});
    CHECK_FALSE(simultaneous_conjugator(T1, T2).has_value());

    // same traces of single letters, different word traces
    CMatrix A1(2, 2), A2(2, 2), B1(2, 2), B2(2, 2);
    A1 << 1, 1, 0, 2;
    A2 << 3, 0, 0, 4;
    B1 << 2, 0, 0, 1;
    B2 << 4, 1, 0, 3;
    CHECK_FALSE(simultaneous_conjugator({TupleRole::monodromy, {A1, A2}},
                                        {TupleRole::monodromy, {B1, B2}})
                    .has_value());
}

TEST_CASE("shape mismatch is a precondition error") {
    MatrixTuple T2(TupleRole::monodromy, {first_example_Gt1(), first_example_Gt2()});
    MatrixTuple T3(TupleRole::monodromy, {first_example_G1(), first_example_G2()});
    CHECK_THROWS_AS(simultaneous_conjugator(T2, T3), rhmc_error);
    CHECK_THROWS_AS(tuple_conjugation_residual(T2, T3, CMatrix::Identity(2, 2)), rhmc_error);
}
