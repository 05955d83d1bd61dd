#pragma once

#include "types.hpp"

namespace rhmc {

enum class ConvolutionKind { multiplicative, additive };

/* the n big matrices acting on C^{np}: M_k (identity off its k-th block row)
   or B_k (zero off its k-th block row) */
struct ConvolutionBlocks {
    ConvolutionKind kind = ConvolutionKind::multiplicative;
    cplx parameter;  // lambda (multiplicative) or nu (additive)
    std::vector<CMatrix> blocks;
    MatrixTuple source;

    int n() const { return (int)blocks.size(); }
    int p() const { return source.p(); }
};

/* orthonormal frames for the invariant subspaces and a pinned complement;
   the quotient C^{np}/(K+L) is identified with the span of complement_basis */
struct QuotientFrame {
    std::vector<CVector> K_basis;
    std::vector<CVector> L_basis;      // re-orthonormalized against K
    std::vector<CVector> complement_basis;
    int m = 0;

    CMatrix complement_matrix() const;  // np x m, orthonormal columns
};

struct ConditionReport {
    bool star_ok = true;
    bool star_star_ok = true;
    std::vector<std::pair<int, cplx>> star_witnesses;       // (index i, failing tau)
    std::vector<std::pair<int, cplx>> star_star_witnesses;
};

struct TheoremConditionReport {
    bool star_ok = false;           // condition 1 on the monodromy tuple
    bool star_star_ok = false;      // condition 2
    bool rank_match_ok = false;     // condition 3: rk(A_i) = rk(G_i - I) for all i
    bool infinity_rank_ok = false;  // condition 4: rk(sum A_i + nu I) = rk(lambda G_1...G_n - I)
    std::vector<int> rank_mismatch;

    bool all_ok() const { return star_ok && star_star_ok && rank_match_ok && infinity_rank_ok; }
};

/* M_k = identity except block row k = (lambda(G_1-I) ... lambda G_k, G_{k+1}-I ... G_n-I) */
ConvolutionBlocks build_mult_blocks(const MatrixTuple& G, cplx lambda);

/* B_k = zero except block row k = (A_1 ... A_k + nu I ... A_n) */
ConvolutionBlocks build_add_blocks(const MatrixTuple& A, cplx nu);

/* K = (+)_k ker(G_k-I) blockwise (resp. ker A_k), L = ker(M_1...M_n - I) (resp. ker sum B_k),
   complement by pivoted orthogonalization of the standard basis against K and L */
QuotientFrame quotient_frame(const ConvolutionBlocks& blocks, const ToleranceConfig& cfg = {});

/* induced action of the blocks on the pinned complement; empty tuple when m = 0 */
MatrixTuple middle_convolve_mult(const MatrixTuple& G, cplx lambda, const ToleranceConfig& cfg = {});
MatrixTuple middle_convolve_add(const MatrixTuple& A, cplx nu, const ToleranceConfig& cfg = {});

/* sum_k rk(G_k - I) - p + rk(lambda G_1...G_n - I); needs lambda outside {0,1} */
int predicted_dim(const MatrixTuple& G, cplx lambda, const ToleranceConfig& cfg = {});

/* the two kernel/image conditions quantified over all nonzero tau, reduced to
   eigenspace intersections (star) and the same test on transposes (star star) */
ConditionReport check_conditions(const MatrixTuple& G, const ToleranceConfig& cfg = {});

/* Jordan data of one matrix after multiplicative middle convolution:
   J(alpha,l) -> J(alpha lambda, l') with l' from the finite/infinity table,
   then padding to total size m with J(1,1) (finite) or J(lambda,1) (infinity) */
enum class JordanPosition { finite, infinity };
JordanStructure predict_jordan_mc(const JordanStructure& J, cplx lambda, JordanPosition position,
                                  int m, const ToleranceConfig& cfg = {});

/* conditions 1-4 for transporting the additive operation to the multiplicative one;
   lambda = exp(2 pi i nu) is derived internally */
TheoremConditionReport check_mc_theorem_conditions(const MatrixTuple& A, const MatrixTuple& G,
                                                   cplx nu, const ToleranceConfig& cfg = {});

}  // namespace rhmc
