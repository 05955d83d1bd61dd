#pragma once

#include <utility>

#include "convolution.hpp"
#include "types.hpp"

namespace rhmc {

/* exponent table chi[i][k] (point i = 1..n then infinity, slot k) with the
   monodromy eigenvalues eta[i][k] they lift and the integer downshifts applied
   to make the full sum vanish */
struct SpectralData {
    std::vector<std::vector<cplx>> chi;
    std::vector<std::vector<cplx>> eta;
    std::vector<std::vector<int>> shifts;

    int n() const { return (int)chi.size() - 1; }  // finite points
    int p() const { return chi.empty() ? 0 : (int)chi[0].size(); }
};

/* record of one reduce -> solve -> lift run; lambda = 1 marks the degenerate
   path where the input was already 2x2 and no reduction happened */
struct SchemeTrace {
    cplx lambda = 1.0;
    bool reduced = false;
    std::vector<cplx> candidates;  // lambdas with predicted quotient dimension 2
    MatrixTuple reduced_tuple;
    FuchsianSystem reduced_system;
    cplx nu = 0.0;  // lift parameter, exp(2 pi i nu) = 1/lambda
    FuchsianSystem final_system;
    ConditionReport input_conditions;
    TheoremConditionReport lift_conditions;
    double verify_residual = 0.0;
    double relation_defect = 0.0;
    std::vector<std::string> notes;
};

/* branch-normalized logs of the monodromy eigenvalues, Re in [0,1), equal
   eigenvalues shifted together; greedy unit downshifts (largest real part
   first, infinity matrix breaking ties) until the total is zero */
SpectralData choose_exponents(const MatrixTuple& G, const ToleranceConfig& cfg = {});

/* (chi_1^(1)+chi_2^(1))(chi_1^(2)+chi_2^(2)) - chi_3^(1) chi_3^(2) for 2x2
   three-point spectral data */
cplx nabla(const SpectralData& sd);

/* closed-form 2x2 system with two finite points: A_1 lower-triangular with
   subdiagonal 1, A_2 upper-triangular with nabla in the corner */
FuchsianSystem build_2x2_three_point(const MatrixTuple& Gt, const std::vector<cplx>& points,
                                     const ToleranceConfig& cfg = {});

/* 2x2 system with three finite points found by damped least squares on
   eigenvalue-pinned residue charts; objective matches pair/triple trace
   invariants of the transported loops plus the determinant at infinity */
FuchsianSystem solve_2x2_numeric(const MatrixTuple& Gt, const std::vector<cplx>& points,
                                 const ToleranceConfig& cfg = {}, unsigned seed = 0,
                                 int restarts = 24);

/* reciprocals of the eigenvalues of each G_i and of their product, without 0
   and 1, ordered by predicted quotient dimension then |lambda-1| descending;
   user extras appended */
std::vector<cplx> lambda_candidates(const MatrixTuple& G, const ToleranceConfig& cfg = {},
                                    const std::vector<cplx>& extras = {});

/* full pipeline: pick lambda with quotient dimension 2, reduce, solve the
   2x2 problem, check the transport conditions, lift with exp(2 pi i nu) =
   1/lambda, verify the final monodromy against the input */
std::pair<FuchsianSystem, SchemeTrace> general_scheme_solve(const MatrixTuple& G,
                                                            const std::vector<cplx>& points,
                                                            const ToleranceConfig& cfg = {},
                                                            unsigned seed = 0,
                                                            const std::vector<cplx>& extras = {},
                                                            int restarts = 24);

}  // namespace rhmc
