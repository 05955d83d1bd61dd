#pragma once

#include <random>

#include "types.hpp"

namespace rhmc::fixtures {

inline const cplx I1 = iunit;

/* eigenvalue exponent shared by both reference systems */
inline const cplx kW = std::log(2.0) / two_pi_i;

/* ---- first worked example: 3x3 monodromy reducing to 2x2 under lambda = i ---- */

inline CMatrix first_example_G1() {
    CMatrix G(3, 3);
    G << I1, 1, 1, 0, 1, 0, 0, 0, 1;
    return G;
}
inline CMatrix first_example_G2() {
    CMatrix G(3, 3);
    G << 1, 0, 0, -2.0 * I1, 2.0 * I1, 0, 2.0 * I1, -I1, -2.0 * I1;
    return G;
}
inline MatrixTuple first_example_G() {
    return {TupleRole::monodromy, {first_example_G1(), first_example_G2()}};
}

inline CMatrix first_example_Gt1() {
    CMatrix G(2, 2);
    G << 1, 2, 0, -1;
    return G;
}
inline CMatrix first_example_Gt2() {
    CMatrix G(2, 2);
    G << -2, 0, 1, 2;
    return G;
}
inline MatrixTuple first_example_reduced_G() {
    return {TupleRole::monodromy, {first_example_Gt1(), first_example_Gt2()}};
}

inline CMatrix first_example_At1() {
    CMatrix A(2, 2);
    A << -0.5, 0, 1, 0;
    return A;
}
inline CMatrix first_example_At2() {
    CMatrix A(2, 2);
    A << 0.5 + kW, 1.0 / 9.0, 0, kW;
    return A;
}
inline MatrixTuple first_example_reduced_A() {
    return {TupleRole::residue, {first_example_At1(), first_example_At2()}};
}

inline CMatrix first_example_A1() {
    CMatrix A(3, 3);
    A << 0.25, 0.5 + kW, 1.0 / 9.0, 0, 0, 0, 0, 0, 0;
    return A;
}
inline CMatrix first_example_A2() {
    CMatrix A(3, 3);
    A << 0, 0, 0, -0.5, 1.25 + kW, 1.0 / 9.0, 1, 0, 0.75 + kW;
    return A;
}
inline MatrixTuple first_example_lifted_A() {
    return {TupleRole::residue, {first_example_A1(), first_example_A2()}};
}

/* ---- second worked example: 3x3 tuple with parameters a, tau, kappa ---- */

inline CMatrix second_example_G1(cplx a = 2.0, cplx tau = 1.0 / 3.0, cplx kappa = 0.5) {
    CMatrix G(3, 3);
    G << a, -two_pi_i * tau, two_pi_i * tau, 0, 1, 0, 0, 0, 1;
    return G;
}
inline CMatrix second_example_G2(cplx a = 2.0, cplx tau = 1.0 / 3.0, cplx kappa = 0.5) {
    CMatrix G(3, 3);
    G << 1, 0, 0, -two_pi_i * kappa, a, 0, 0, 0, 1;
    return G;
}
inline CMatrix second_example_G3(cplx a = 2.0, cplx tau = 1.0 / 3.0, cplx kappa = 0.5) {
    CMatrix G(3, 3);
    G << 1, 0, 0, 0, 1, 0, -two_pi_i * kappa, 0, a;
    return G;
}
inline MatrixTuple second_example_G(cplx a = 2.0, cplx tau = 1.0 / 3.0, cplx kappa = 0.5) {
    return {TupleRole::monodromy,
            {second_example_G1(a, tau, kappa), second_example_G2(a, tau, kappa),
             second_example_G3(a, tau, kappa)}};
}

/* reduction of the second example under lambda = 1/a; shear entries carry tau/a */
inline MatrixTuple second_example_reduced_G(cplx a = 2.0, cplx tau = 1.0 / 3.0, cplx kappa = 0.5) {
    CMatrix G1(2, 2), G2(2, 2), G3(2, 2);
    G1 << 1, 0, -two_pi_i * kappa, 1;
    G2 << 1, -two_pi_i * tau / a, 0, 1;
    G3 << 1, two_pi_i * tau / a, 0, 1;
    return {TupleRole::monodromy, {G1, G2, G3}};
}

/* ---- seeded random material ---- */

inline CMatrix random_matrix(std::mt19937& rng, int p) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMatrix M(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) M(i, j) = cplx(nd(rng), nd(rng));
    return M;
}

inline CMatrix random_invertible(std::mt19937& rng, int p) {
    for (;;) {
        CMatrix M = random_matrix(rng, p);
        Eigen::JacobiSVD<CMatrix> svd(M);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) > 1e-3 * sv(0)) return M;
    }
}

/* invertible matrix whose eigenvalues stay away from the positive real axis */
inline CMatrix random_offcut_invertible(std::mt19937& rng, int p) {
    std::uniform_real_distribution<double> mod(0.5, 2.0), arg(0.3, 2.0 * pi - 0.3);
    CMatrix V = random_invertible(rng, p);
    CMatrix D = CMatrix::Zero(p, p);
    for (int i = 0; i < p; ++i) D(i, i) = std::polar(mod(rng), arg(rng));
    return V * D * V.inverse();
}

/* diagonalizable with prescribed eigenvalues, conjugated by a random frame */
inline CMatrix with_eigenvalues(std::mt19937& rng, const std::vector<cplx>& evs) {
    int p = (int)evs.size();
    CMatrix V = random_invertible(rng, p);
    CMatrix D = CMatrix::Zero(p, p);
    for (int i = 0; i < p; ++i) D(i, i) = evs[i];
    return V * D * V.inverse();
}

}  // namespace rhmc::fixtures
