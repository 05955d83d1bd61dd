#pragma once

#include <optional>

#include "types.hpp"

namespace rhmc {

/* singular values above rank_rel_tol * sigma_max * dim */
int numeric_rank(const CMatrix& M, const ToleranceConfig& cfg = {});

/* orthonormal basis of the numerical null space, deterministic ordering and phase */
std::vector<CVector> kernel_basis(const CMatrix& M, const ToleranceConfig& cfg = {});

/* eigenvalue clusters with Jordan block sizes, recovered per cluster from the
   rank sequence of powers of the deflated Schur block */
JordanStructure jordan_structure(const CMatrix& M, const ToleranceConfig& cfg = {});

/* compare structures up to eigenvalue tolerance; block size multisets must match */
bool jordan_equal(const JordanStructure& a, const JordanStructure& b, double eig_tol);

/* W with exp(2*pi*i*W) = G and all eigenvalues of W having real part in [0,1);
   branch chosen per eigenvalue cluster (positive reals land on Re = 0, G = I gives 0) */
CMatrix matrix_log_normalized(const CMatrix& G, const ToleranceConfig& cfg = {});

/* exp(2*pi*i*A) via scaling-and-squaring */
CMatrix matrix_exp_2pii(const CMatrix& A);

/* Burnside criterion: the unital algebra generated by the tuple spans all of C^{p x p} */
bool is_irreducible_tuple(const MatrixTuple& T, const ToleranceConfig& cfg = {});

/* max_i ||C T1_i C^{-1} - T2_i||_F / max(1, ||T2_i||_F) */
double tuple_conjugation_residual(const MatrixTuple& T1, const MatrixTuple& T2, const CMatrix& C);

/* invertible C with C T1_i = T2_i C for all i, if one exists within conj_tol;
   trace words up to length 3 serve as a fast reject */
std::optional<CMatrix> simultaneous_conjugator(const MatrixTuple& T1, const MatrixTuple& T2,
                                               const ToleranceConfig& cfg = {});

}  // namespace rhmc
