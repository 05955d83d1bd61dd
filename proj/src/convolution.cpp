#include "convolution.hpp"

#include <algorithm>
#include <cmath>

#include "cxmat.hpp"

namespace rhmc {

namespace {

/* eigenspace extraction must survive the sqrt(eps) splitting of defective
   eigenvalues, so it ranks with the cluster tolerance when that is looser */
ToleranceConfig eig_loosened(const ToleranceConfig& cfg) {
    ToleranceConfig out = cfg;
    out.rank_rel_tol = std::max(cfg.rank_rel_tol, cfg.eig_cluster_tol);
    return out;
}

std::vector<cplx> distinct_eigenvalues(const CMatrix& M, const ToleranceConfig& cfg) {
    CVector ev = M.eigenvalues();
    double scale = 1.0;
    for (int i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
    const double tol = cfg.eig_cluster_tol * scale;
    std::vector<cplx> out;
    std::vector<bool> used(ev.size(), false);
    for (int i = 0; i < ev.size(); ++i) {
        if (used[i]) continue;
        std::vector<int> cluster{i};
        used[i] = true;
        for (size_t c = 0; c < cluster.size(); ++c)
            for (int j = 0; j < ev.size(); ++j)
                if (!used[j] && std::abs(ev(j) - ev(cluster[c])) <= tol) {
                    used[j] = true;
                    cluster.push_back(j);
                }
        cplx center = 0;
        for (int j : cluster) center += ev(j);
        out.push_back(center / static_cast<double>(cluster.size()));
    }
    return out;
}

/* nontrivial intersection of two orthonormal column spans */
bool spans_intersect(const std::vector<CVector>& U, const std::vector<CVector>& W,
                     const ToleranceConfig& cfg) {
    if (U.empty() || W.empty()) return false;
    const int p = static_cast<int>(U[0].size());
    CMatrix S(p, U.size() + W.size());
    for (size_t j = 0; j < U.size(); ++j) S.col(j) = U[j];
    for (size_t j = 0; j < W.size(); ++j) S.col(U.size() + j) = W[j];
    return numeric_rank(S, eig_loosened(cfg)) < static_cast<int>(U.size() + W.size());
}

/* common fixed space of all G_j - I (resp. null space of all A_j), j != i */
std::vector<CVector> common_kernel_excluding(const MatrixTuple& T, int skip,
                                             const ToleranceConfig& cfg) {
    const int p = T.p();
    std::vector<const CMatrix*> rows;
    for (int j = 0; j < T.n(); ++j)
        if (j != skip) rows.push_back(&T.matrices[j]);
    if (rows.empty()) {
        std::vector<CVector> full;
        for (int j = 0; j < p; ++j) {
            CVector e = CVector::Zero(p);
            e(j) = 1;
            full.push_back(e);
        }
        return full;
    }
    CMatrix S(static_cast<int>(rows.size()) * p, p);
    for (size_t r = 0; r < rows.size(); ++r)
        S.block(static_cast<int>(r) * p, 0, p, p) =
            T.role == TupleRole::monodromy ? CMatrix(*rows[r] - CMatrix::Identity(p, p))
                                           : *rows[r];
    return kernel_basis(S, cfg);
}

MatrixTuple transposed(const MatrixTuple& T) {
    MatrixTuple out;
    out.role = T.role;
    for (const auto& M : T.matrices) out.matrices.push_back(M.transpose());
    return out;
}

/* one-sided star check; fills witnesses with (i, tau = 1/eigenvalue) */
void star_scan(const MatrixTuple& G, const ToleranceConfig& cfg, bool& ok,
               std::vector<std::pair<int, cplx>>& witnesses) {
    ok = true;
    const ToleranceConfig loose = eig_loosened(cfg);
    for (int i = 0; i < G.n(); ++i) {
        auto Vi = common_kernel_excluding(G, i, cfg);
        if (Vi.empty()) continue;
        const CMatrix& Gi = G.matrices[i];
        for (cplx beta : distinct_eigenvalues(Gi, cfg)) {
            if (std::abs(beta) < 1e-14) continue;  // tau = 1/beta must be finite
            auto E = kernel_basis(Gi - beta * CMatrix::Identity(G.p(), G.p()), loose);
            if (E.empty()) continue;
            if (spans_intersect(Vi, E, cfg)) {
                ok = false;
                witnesses.emplace_back(i, 1.0 / beta);
            }
        }
    }
}

void orthogonalize_against(CVector& v, const std::vector<CVector>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) v -= (b.adjoint() * v)(0) * b;
}

}  // namespace

CMatrix QuotientFrame::complement_matrix() const {
    if (complement_basis.empty()) return CMatrix(0, 0);
    CMatrix C(complement_basis[0].size(), complement_basis.size());
    for (size_t j = 0; j < complement_basis.size(); ++j) C.col(j) = complement_basis[j];
    return C;
}

ConvolutionBlocks build_mult_blocks(const MatrixTuple& G, cplx lambda) {
    G.validate();
    if (G.role != TupleRole::monodromy)
        throw rhmc_error(status::precondition, "build_mult_blocks needs a monodromy tuple");
    if (lambda == cplx(0))
        throw rhmc_error(status::precondition, "BadParameter: lambda must be nonzero");
    const int n = G.n(), p = G.p();
    for (int i = 0; i < n; ++i)
        if (numeric_rank(G.matrices[i]) < p)
            throw rhmc_error(status::precondition, "Singular: monodromy matrices must be invertible");

    ConvolutionBlocks out;
    out.kind = ConvolutionKind::multiplicative;
    out.parameter = lambda;
    out.source = G;
    const CMatrix Ip = CMatrix::Identity(p, p);
    for (int k = 0; k < n; ++k) {
        CMatrix M = CMatrix::Identity(n * p, n * p);
        for (int j = 0; j < n; ++j) {
            CMatrix cell;
            if (j < k)
                cell = lambda * (G.matrices[j] - Ip);
            else if (j == k)
                cell = lambda * G.matrices[j];
            else
                cell = G.matrices[j] - Ip;
            M.block(k * p, j * p, p, p) = cell;
        }
        out.blocks.push_back(std::move(M));
    }
    return out;
}

ConvolutionBlocks build_add_blocks(const MatrixTuple& A, cplx nu) {
    A.validate();
    if (A.role != TupleRole::residue)
        throw rhmc_error(status::precondition, "build_add_blocks needs a residue tuple");
    const int n = A.n(), p = A.p();

    ConvolutionBlocks out;
    out.kind = ConvolutionKind::additive;
    out.parameter = nu;
    out.source = A;
    const CMatrix Ip = CMatrix::Identity(p, p);
    for (int k = 0; k < n; ++k) {
        CMatrix B = CMatrix::Zero(n * p, n * p);
        for (int j = 0; j < n; ++j)
            B.block(k * p, j * p, p, p) = j == k ? CMatrix(A.matrices[j] + nu * Ip) : A.matrices[j];
        out.blocks.push_back(std::move(B));
    }
    return out;
}

QuotientFrame quotient_frame(const ConvolutionBlocks& blocks, const ToleranceConfig& cfg) {
    const int n = blocks.n(), p = blocks.p();
    const int np = n * p;
    const bool mult = blocks.kind == ConvolutionKind::multiplicative;
    const CMatrix Ip = CMatrix::Identity(p, p);

    QuotientFrame frame;
    for (int k = 0; k < n; ++k) {
        CMatrix M = mult ? CMatrix(blocks.source.matrices[k] - Ip) : blocks.source.matrices[k];
        for (const auto& u : kernel_basis(M, cfg)) {
            CVector v = CVector::Zero(np);
            v.segment(k * p, p) = u;
            frame.K_basis.push_back(std::move(v));
        }
    }

    CMatrix big;
    if (mult) {
        big = CMatrix::Identity(np, np);
        for (const auto& M : blocks.blocks) big = big * M;
        big -= CMatrix::Identity(np, np);
    } else {
        big = CMatrix::Zero(np, np);
        for (const auto& B : blocks.blocks) big += B;
    }

    // the K+L sum is direct away from the degenerate parameter; a collapse there
    // means the input is numerically broken rather than merely degenerate
    const bool degenerate_param = mult ? blocks.parameter == cplx(1) : blocks.parameter == cplx(0);
    const double dep_tol = std::sqrt(cfg.rank_rel_tol);
    for (CVector v : kernel_basis(big, cfg)) {
        orthogonalize_against(v, frame.K_basis);
        orthogonalize_against(v, frame.L_basis);
        double nv = v.norm();
        if (nv <= dep_tol) {
            if (!degenerate_param)
                throw rhmc_error(status::precondition,
                                 "DependentSubspaces: kernel sum K+L fails to be direct");
            continue;
        }
        frame.L_basis.push_back(v / nv);
    }

    // pivoted complement: repeatedly take the standard basis vector with the
    // largest residual against everything accepted so far
    std::vector<CVector> all = frame.K_basis;
    all.insert(all.end(), frame.L_basis.begin(), frame.L_basis.end());
    const int target = np - static_cast<int>(all.size());
    for (int round = 0; round < target; ++round) {
        double best = -1.0;
        CVector keep;
        for (int j = 0; j < np; ++j) {
            CVector e = CVector::Zero(np);
            e(j) = 1;
            orthogonalize_against(e, all);
            orthogonalize_against(e, frame.complement_basis);
            double nr = e.norm();
            if (nr > best + 1e-14) {
                best = nr;
                keep = e;
            }
        }
        frame.complement_basis.push_back(keep / best);
    }
    frame.m = static_cast<int>(frame.complement_basis.size());
    return frame;
}

namespace {

MatrixTuple convolve_common(const ConvolutionBlocks& blocks, TupleRole out_role,
                            const ToleranceConfig& cfg) {
    QuotientFrame frame = quotient_frame(blocks, cfg);
    MatrixTuple out;
    out.role = out_role;
    if (frame.m == 0) {
        out.matrices.assign(blocks.n(), CMatrix(0, 0));
        return out;
    }
    CMatrix C = frame.complement_matrix();
    for (const auto& M : blocks.blocks) out.matrices.push_back(C.adjoint() * M * C);
    return out;
}

}  // namespace

MatrixTuple middle_convolve_mult(const MatrixTuple& G, cplx lambda, const ToleranceConfig& cfg) {
    return convolve_common(build_mult_blocks(G, lambda), TupleRole::monodromy, cfg);
}

MatrixTuple middle_convolve_add(const MatrixTuple& A, cplx nu, const ToleranceConfig& cfg) {
    return convolve_common(build_add_blocks(A, nu), TupleRole::residue, cfg);
}

int predicted_dim(const MatrixTuple& G, cplx lambda, const ToleranceConfig& cfg) {
    G.validate();
    if (lambda == cplx(0) || lambda == cplx(1))
        throw rhmc_error(status::precondition, "BadParameter: dimension formula needs lambda outside {0,1}");
    const int p = G.p();
    const CMatrix Ip = CMatrix::Identity(p, p);
    int acc = -p;
    for (const auto& Gk : G.matrices) acc += numeric_rank(Gk - Ip, cfg);
    acc += numeric_rank(lambda * G.combined() - Ip, cfg);
    return acc;
}

ConditionReport check_conditions(const MatrixTuple& G, const ToleranceConfig& cfg) {
    G.validate();
    if (G.role != TupleRole::monodromy)
        throw rhmc_error(status::precondition, "check_conditions needs a monodromy tuple");
    ConditionReport report;
    star_scan(G, cfg, report.star_ok, report.star_witnesses);
    star_scan(transposed(G), cfg, report.star_star_ok, report.star_star_witnesses);
    return report;
}

JordanStructure predict_jordan_mc(const JordanStructure& J, cplx lambda, JordanPosition position,
                                  int m, const ToleranceConfig& cfg) {
    if (lambda == cplx(0) || lambda == cplx(1))
        throw rhmc_error(status::precondition, "BadParameter: prediction needs lambda outside {0,1}");
    const double tol = cfg.eig_cluster_tol * std::max(1.0, std::abs(lambda));
    const cplx lam_inv = 1.0 / lambda;

    JordanStructure out;
    auto bucket = [&](cplx ev) -> JordanGroup& {
        for (auto& g : out)
            if (std::abs(g.eigenvalue - ev) <= tol) return g;
        out.push_back({ev, {}});
        return out.back();
    };

    int total = 0;
    for (const auto& g : J) {
        int shift = 0;
        if (std::abs(g.eigenvalue - 1.0) <= tol)
            shift = position == JordanPosition::finite ? -1 : +1;
        else if (std::abs(g.eigenvalue - lam_inv) <= tol)
            shift = position == JordanPosition::finite ? +1 : -1;
        for (int l : g.block_sizes) {
            int lp = l + shift;
            if (lp <= 0) continue;
            bucket(g.eigenvalue * lambda).block_sizes.push_back(lp);
            total += lp;
        }
    }

    const cplx pad_ev = position == JordanPosition::finite ? cplx(1) : lambda;
    if (total > m)
        throw rhmc_error(status::precondition,
                         "Inconsistent: predicted blocks exceed the target dimension");
    for (int c = 0; c < m - total; ++c) bucket(pad_ev).block_sizes.push_back(1);

    for (auto& g : out) std::sort(g.block_sizes.begin(), g.block_sizes.end(), std::greater<int>());
    std::sort(out.begin(), out.end(), [](const JordanGroup& a, const JordanGroup& b) {
        if (a.eigenvalue.real() != b.eigenvalue.real()) return a.eigenvalue.real() > b.eigenvalue.real();
        return a.eigenvalue.imag() > b.eigenvalue.imag();
    });
    return out;
}

TheoremConditionReport check_mc_theorem_conditions(const MatrixTuple& A, const MatrixTuple& G,
                                                   cplx nu, const ToleranceConfig& cfg) {
    A.validate();
    G.validate();
    if (A.n() != G.n())
        throw rhmc_error(status::precondition, "tuples must have the same length");
    const cplx lambda = std::exp(two_pi_i * nu);
    const int p = G.p();
    const CMatrix Ip = CMatrix::Identity(p, p);
    const CMatrix Ipa = CMatrix::Identity(A.p(), A.p());

    TheoremConditionReport rep;
    ConditionReport cond = check_conditions(G, cfg);
    rep.star_ok = cond.star_ok;
    rep.star_star_ok = cond.star_star_ok;

    rep.rank_match_ok = true;
    for (int i = 0; i < A.n(); ++i)
        if (numeric_rank(A.matrices[i], cfg) != numeric_rank(G.matrices[i] - Ip, cfg)) {
            rep.rank_match_ok = false;
            rep.rank_mismatch.push_back(i);
        }

    int ra = numeric_rank(A.combined() + nu * Ipa, cfg);
    int rg = numeric_rank(lambda * G.combined() - Ip, cfg);
    rep.infinity_rank_ok = ra == rg;
    return rep;
}

}  // namespace rhmc
