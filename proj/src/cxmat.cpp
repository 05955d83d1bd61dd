#include "cxmat.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

namespace rhmc {

namespace {

double rank_threshold(const Eigen::VectorXd& sv, const CMatrix& M, const ToleranceConfig& cfg) {
    // floor the scale so a difference that cancelled to round-off reads as
    // the zero matrix instead of a full-rank speck
    double smax = sv.size() ? sv(0) : 0.0;
    return cfg.rank_rel_tol * std::max(smax, 1.0) * static_cast<double>(std::max(M.rows(), M.cols()));
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
    CMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

struct SchurCluster {
    int start = 0;
    int size = 0;
    cplx center;
};

struct ClusteredSchur {
    CMatrix Q;  // unitary
    CMatrix T;  // upper triangular, clusters contiguous on the diagonal
    std::vector<SchurCluster> clusters;
};

/* swap diagonal positions k,k+1 of upper triangular T by a unitary similarity */
void swap_adjacent(CMatrix& T, CMatrix& Q, int k) {
    const int N = static_cast<int>(T.rows());
    cplx a = T(k, k), b = T(k, k + 1), c = T(k + 1, k + 1);
    Eigen::Matrix2cd g;
    cplx x0 = b, x1 = c - a;
    double nrm = std::sqrt(std::norm(x0) + std::norm(x1));
    if (nrm < 1e-300) {
        g << 0, 1, 1, 0;
    } else {
        g << x0 / nrm, -std::conj(x1) / nrm, x1 / nrm, std::conj(x0) / nrm;
    }
    T.block(k, k, 2, N - k) = g.adjoint() * T.block(k, k, 2, N - k);
    T.block(0, k, k + 2, 2) = T.block(0, k, k + 2, 2) * g;
    T(k + 1, k) = 0;
    Q.block(0, k, N, 2) = Q.block(0, k, N, 2) * g;
}

/* Schur form with eigenvalue clusters made contiguous, ordered by first appearance */
ClusteredSchur schur_clustered(const CMatrix& M, const ToleranceConfig& cfg) {
    const int N = static_cast<int>(M.rows());
    Eigen::ComplexSchur<CMatrix> schur(M, true);
    if (schur.info() != Eigen::Success)
        throw rhmc_error(status::precondition, "Schur decomposition failed");
    CMatrix T = schur.matrixT();
    CMatrix Q = schur.matrixU();

    std::vector<cplx> d(N);
    double scale = 1.0;
    for (int i = 0; i < N; ++i) {
        d[i] = T(i, i);
        scale = std::max(scale, std::abs(d[i]));
    }
    const double tol = cfg.eig_cluster_tol * scale;

    // transitive chaining: same label iff connected by steps of size <= tol
    std::vector<int> lab(N, -1);
    int nlab = 0;
    for (int i = 0; i < N; ++i) {
        if (lab[i] >= 0) continue;
        lab[i] = nlab;
        bool grew = true;
        while (grew) {
            grew = false;
            for (int j = 0; j < N; ++j) {
                if (lab[j] >= 0) continue;
                for (int k = 0; k < N; ++k)
                    if (lab[k] == nlab && std::abs(d[j] - d[k]) <= tol) {
                        lab[j] = nlab;
                        grew = true;
                        break;
                    }
            }
        }
        ++nlab;
    }

    // bubble clusters into contiguous runs with unitary adjacent swaps
    bool moved = true;
    while (moved) {
        moved = false;
        for (int i = 0; i + 1 < N; ++i) {
            if (lab[i] > lab[i + 1]) {
                swap_adjacent(T, Q, i);
                std::swap(lab[i], lab[i + 1]);
                moved = true;
            }
        }
    }

    ClusteredSchur out;
    out.Q = std::move(Q);
    out.T = std::move(T);
    for (int i = 0; i < N;) {
        int j = i;
        while (j < N && lab[j] == lab[i]) ++j;
        cplx c = 0;
        for (int k = i; k < j; ++k) c += out.T(k, k);
        out.clusters.push_back({i, j - i, c / static_cast<double>(j - i)});
        i = j;
    }

    for (size_t a = 0; a < out.clusters.size(); ++a)
        for (size_t b = a + 1; b < out.clusters.size(); ++b)
            if (std::abs(out.clusters[a].center - out.clusters[b].center) <= 2.0 * tol)
                throw rhmc_error(status::precondition,
                                 "ClusterAmbiguous: eigenvalue cluster separation below 2x cluster tolerance");
    return out;
}

/* principal square root of an upper triangular matrix with diagonal near 1 */
CMatrix tri_sqrt(const CMatrix& B) {
    const int m = static_cast<int>(B.rows());
    CMatrix R = CMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i) R(i, i) = std::sqrt(B(i, i));
    for (int off = 1; off < m; ++off)
        for (int i = 0; i + off < m; ++i) {
            int j = i + off;
            cplx s = B(i, j);
            for (int k = i + 1; k < j; ++k) s -= R(i, k) * R(k, j);
            R(i, j) = s / (R(i, i) + R(j, j));
        }
    return R;
}

/* log of a triangular block with a tight eigenvalue cluster around sigma,
   with the branch fixed so Re(log(sigma)/(2 pi i)) lands in [0,1) */
CMatrix atomic_log(const CMatrix& Tkk, cplx sigma) {
    const int m = static_cast<int>(Tkk.rows());
    if (std::abs(sigma) < 1e-300)
        throw rhmc_error(status::precondition, "Singular: zero eigenvalue has no logarithm");
    double theta = std::arg(sigma);
    if (theta < 0) theta += 2.0 * pi;
    cplx lsig(std::log(std::abs(sigma)), theta);

    CMatrix B = Tkk / sigma;
    int s = 0;
    while ((B - CMatrix::Identity(m, m)).norm() > 0.3 && s < 60) {
        B = tri_sqrt(B);
        ++s;
    }
    CMatrix X = B - CMatrix::Identity(m, m);
    CMatrix L = CMatrix::Zero(m, m);
    CMatrix P = CMatrix::Identity(m, m);
    for (int j = 1; j <= 80; ++j) {
        P = P * X;
        double pn = P.norm();
        L += (j % 2 ? 1.0 : -1.0) / static_cast<double>(j) * P;
        if (pn < 1e-18 * std::max(1.0, L.norm())) break;
    }
    return lsig * CMatrix::Identity(m, m) + std::ldexp(1.0, s) * L;
}

/* solve A X - X B = C for blocks with disjoint spectra */
CMatrix sylvester_solve(const CMatrix& A, const CMatrix& B, const CMatrix& C) {
    const int ra = static_cast<int>(A.rows()), rb = static_cast<int>(B.rows());
    CMatrix Ia = CMatrix::Identity(ra, ra), Ib = CMatrix::Identity(rb, rb);
    CMatrix K = kron(Ib, A) - kron(B.transpose(), Ia);
    CVector rhs(ra * rb);
    for (int j = 0; j < rb; ++j) rhs.segment(j * ra, ra) = C.col(j);
    CVector x = K.fullPivLu().solve(rhs);
    CMatrix X(ra, rb);
    for (int j = 0; j < rb; ++j) X.col(j) = x.segment(j * ra, ra);
    return X;
}

void phase_fix(CVector& v) {
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > best + 1e-14) {
            best = std::abs(v(i));
            imax = i;
        }
    if (best > 0) v *= std::conj(v(imax)) / std::abs(v(imax));
}

}  // namespace

int numeric_rank(const CMatrix& M, const ToleranceConfig& cfg) {
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& sv = svd.singularValues();
    double thr = rank_threshold(sv, M, cfg);
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > thr) ++r;
    return r;
}

std::vector<CVector> kernel_basis(const CMatrix& M, const ToleranceConfig& cfg) {
    if (M.cols() == 0) return {};
    if (M.rows() == 0) {
        std::vector<CVector> out;
        for (int j = 0; j < M.cols(); ++j) {
            CVector e = CVector::Zero(M.cols());
            e(j) = 1;
            out.push_back(e);
        }
        return out;
    }
    Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double thr = rank_threshold(sv, M, cfg);
    std::vector<CVector> out;
    for (int j = 0; j < M.cols(); ++j) {
        double s = j < sv.size() ? sv(j) : 0.0;
        if (s <= thr) {
            CVector v = svd.matrixV().col(j);
            phase_fix(v);
            out.push_back(std::move(v));
        }
    }
    return out;
}

JordanStructure jordan_structure(const CMatrix& M, const ToleranceConfig& cfg) {
    if (M.rows() != M.cols())
        throw rhmc_error(status::precondition, "jordan_structure needs a square matrix");
    const int N = static_cast<int>(M.rows());
    if (N == 0) return {};
    ClusteredSchur cs = schur_clustered(M, cfg);

    const double mscale = std::max(1.0, M.norm());
    JordanStructure out;
    for (const auto& cl : cs.clusters) {
        const int m = cl.size;
        CMatrix Nm = cs.T.block(cl.start, cl.start, m, m) - cl.center * CMatrix::Identity(m, m);
        Eigen::JacobiSVD<CMatrix> svd0(Nm);
        double s1 = svd0.singularValues().size() ? svd0.singularValues()(0) : 0.0;
        if (s1 <= cfg.rank_rel_tol * mscale * m) {
            // nilpotent part indistinguishable from Schur round-off: semisimple cluster
            JordanGroup g;
            g.eigenvalue = cl.center;
            g.block_sizes.assign(m, 1);
            out.push_back(std::move(g));
            continue;
        }

        std::vector<int> rk(m + 1);
        rk[0] = m;
        CMatrix P = CMatrix::Identity(m, m);
        double powthr = 1.0;
        for (int k = 1; k <= m; ++k) {
            P = P * Nm;
            powthr *= s1;
            Eigen::JacobiSVD<CMatrix> svd(P);
            const auto& sv = svd.singularValues();
            double thr = cfg.rank_rel_tol * powthr * m;
            int r = 0;
            for (int i = 0; i < sv.size(); ++i)
                if (sv(i) > thr) ++r;
            rk[k] = std::min(r, rk[k - 1]);
            if (rk[k] == 0) {
                for (int k2 = k + 1; k2 <= m; ++k2) rk[k2] = 0;
                break;
            }
        }

        // b_k = #blocks of size >= k; force monotone so sizes stay consistent
        std::vector<int> bk(m + 2, 0);
        for (int k = 1; k <= m; ++k) bk[k] = rk[k - 1] - rk[k];
        for (int k = 2; k <= m; ++k) bk[k] = std::min(bk[k], bk[k - 1]);
        JordanGroup g;
        g.eigenvalue = cl.center;
        for (int k = m; k >= 1; --k)
            for (int c = 0; c < bk[k] - bk[k + 1]; ++c) g.block_sizes.push_back(k);
        std::sort(g.block_sizes.begin(), g.block_sizes.end(), std::greater<int>());
        out.push_back(std::move(g));
    }

    std::sort(out.begin(), out.end(), [](const JordanGroup& a, const JordanGroup& b) {
        if (a.eigenvalue.real() != b.eigenvalue.real()) return a.eigenvalue.real() > b.eigenvalue.real();
        return a.eigenvalue.imag() > b.eigenvalue.imag();
    });
    return out;
}

bool jordan_equal(const JordanStructure& a, const JordanStructure& b, double eig_tol) {
    if (a.size() != b.size()) return false;
    std::vector<bool> used(b.size(), false);
    for (const auto& ga : a) {
        int pick = -1;
        double best = eig_tol;
        for (size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            double d = std::abs(ga.eigenvalue - b[j].eigenvalue);
            if (d <= best) {
                best = d;
                pick = static_cast<int>(j);
            }
        }
        if (pick < 0) return false;
        used[pick] = true;
        auto sa = ga.block_sizes, sb = b[pick].block_sizes;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) return false;
    }
    return true;
}

CMatrix matrix_log_normalized(const CMatrix& G, const ToleranceConfig& cfg) {
    if (G.rows() != G.cols())
        throw rhmc_error(status::precondition, "matrix_log_normalized needs a square matrix");
    const int N = static_cast<int>(G.rows());
    if (N == 0) return CMatrix(0, 0);
    ClusteredSchur cs = schur_clustered(G, cfg);

    const size_t nc = cs.clusters.size();
    CMatrix F = CMatrix::Zero(N, N);
    for (const auto& cl : cs.clusters)
        F.block(cl.start, cl.start, cl.size, cl.size) =
            atomic_log(cs.T.block(cl.start, cl.start, cl.size, cl.size), cl.center);

    // Parlett recurrence over block superdiagonals
    for (size_t off = 1; off < nc; ++off)
        for (size_t i = 0; i + off < nc; ++i) {
            size_t j = i + off;
            const auto &ci = cs.clusters[i], &cj = cs.clusters[j];
            auto blk = [&](const CMatrix& M, const SchurCluster& r, const SchurCluster& c) {
                return M.block(r.start, c.start, r.size, c.size);
            };
            CMatrix C = blk(F, ci, ci) * blk(cs.T, ci, cj) - blk(cs.T, ci, cj) * blk(F, cj, cj);
            for (size_t k = i + 1; k < j; ++k) {
                const auto& ck = cs.clusters[k];
                C += blk(F, ci, ck) * blk(cs.T, ck, cj) - blk(cs.T, ci, ck) * blk(F, ck, cj);
            }
            F.block(ci.start, cj.start, ci.size, cj.size) =
                sylvester_solve(blk(cs.T, ci, ci), blk(cs.T, cj, cj), C);
        }

    CMatrix W = cs.Q * (F / two_pi_i) * cs.Q.adjoint();
    return W;
}

CMatrix matrix_exp_2pii(const CMatrix& A) {
    if (A.rows() != A.cols())
        throw rhmc_error(status::precondition, "matrix_exp_2pii needs a square matrix");
    CMatrix B = two_pi_i * A;
    return B.exp();
}

bool is_irreducible_tuple(const MatrixTuple& T, const ToleranceConfig& cfg) {
    T.validate();
    const int p = T.p();
    const int target = p * p;
    std::vector<CMatrix> basis;
    std::deque<size_t> todo;

    auto try_add = [&](const CMatrix& X) {
        CMatrix r = X;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                cplx c = (b.adjoint() * r).trace();
                r -= c * b;
            }
        double nr = r.norm();
        if (nr > cfg.rank_rel_tol * p * std::max(1.0, X.norm())) {
            basis.push_back(r / nr);
            todo.push_back(basis.size() - 1);
        }
    };

    try_add(CMatrix::Identity(p, p));
    while (!todo.empty() && static_cast<int>(basis.size()) < target) {
        CMatrix cur = basis[todo.front()];
        todo.pop_front();
        for (const auto& X : T.matrices) {
            try_add(cur * X);
            if (static_cast<int>(basis.size()) >= target) return true;
        }
    }
    return static_cast<int>(basis.size()) == target;
}

double tuple_conjugation_residual(const MatrixTuple& T1, const MatrixTuple& T2, const CMatrix& C) {
    if (T1.n() != T2.n() || T1.p() != T2.p())
        throw rhmc_error(status::precondition, "conjugation residual needs tuples of equal shape");
    CMatrix Cinv = C.fullPivLu().inverse();
    double worst = 0.0;
    for (int i = 0; i < T1.n(); ++i) {
        double num = (C * T1.matrices[i] * Cinv - T2.matrices[i]).norm();
        worst = std::max(worst, num / std::max(1.0, T2.matrices[i].norm()));
    }
    return worst;
}

std::optional<CMatrix> simultaneous_conjugator(const MatrixTuple& T1, const MatrixTuple& T2,
                                               const ToleranceConfig& cfg) {
    if (T1.n() != T2.n() || T1.p() != T2.p())
        throw rhmc_error(status::precondition, "simultaneous_conjugator needs tuples of equal shape");
    const int n = T1.n(), p = T1.p();
    if (p == 0) return CMatrix(0, 0);

    // fast reject on trace words up to length 3
    for (int a = 0; a < n; ++a)
        for (int b = -1; b < n; ++b)
            for (int c = -1; c < n; ++c) {
                if (b < 0 && c >= 0) continue;
                CMatrix W1 = T1.matrices[a], W2 = T2.matrices[a];
                if (b >= 0) {
                    W1 = W1 * T1.matrices[b];
                    W2 = W2 * T2.matrices[b];
                }
                if (c >= 0) {
                    W1 = W1 * T1.matrices[c];
                    W2 = W2 * T2.matrices[c];
                }
                cplx t1 = W1.trace(), t2 = W2.trace();
                double scale = std::max({1.0, std::abs(t1), std::abs(t2)});
                if (std::abs(t1 - t2) > 50.0 * p * cfg.conj_tol * scale) return std::nullopt;
            }

    CMatrix S(n * p * p, p * p);
    CMatrix Ip = CMatrix::Identity(p, p);
    for (int k = 0; k < n; ++k)
        S.block(k * p * p, 0, p * p, p * p) =
            kron(T1.matrices[k].transpose(), Ip) - kron(Ip, T2.matrices[k]);

    Eigen::JacobiSVD<CMatrix> svd(S, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double smax = sv(0), smin = sv(sv.size() - 1);
    double thr = std::max(cfg.conj_tol * smax * p, 100.0 * smin);
    std::vector<int> cand;
    for (int j = static_cast<int>(sv.size()) - 1; j >= 0 && static_cast<int>(cand.size()) < 6; --j)
        if (sv(j) <= thr) cand.push_back(j);

    auto unvec = [&](const CVector& x) {
        CMatrix C(p, p);
        for (int j = 0; j < p; ++j) C.col(j) = x.segment(j * p, p);
        return C;
    };
    auto finish = [&](CMatrix C) -> std::optional<CMatrix> {
        Eigen::JacobiSVD<CMatrix> cs(C);
        const auto& csv = cs.singularValues();
        if (csv(csv.size() - 1) <= 1e-10 * csv(0) * p) return std::nullopt;
        if (tuple_conjugation_residual(T1, T2, C) > cfg.conj_tol) return std::nullopt;
        C *= std::sqrt(static_cast<double>(p)) / C.norm();
        int bi = 0, bj = 0;
        double best = -1;
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                if (std::abs(C(i, j)) > best + 1e-14) {
                    best = std::abs(C(i, j));
                    bi = i;
                    bj = j;
                }
        if (best > 0) C *= std::conj(C(bi, bj)) / best;
        return C;
    };

    for (int j : cand)
        if (auto r = finish(unvec(svd.matrixV().col(j)))) return r;

    if (cand.size() > 1) {
        std::mt19937 rng(12345);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int trial = 0; trial < 64; ++trial) {
            CVector x = CVector::Zero(p * p);
            for (int j : cand) x += cplx(nd(rng), nd(rng)) * svd.matrixV().col(j);
            if (auto r = finish(unvec(x))) return r;
        }
    }
    return std::nullopt;
}

}  // namespace rhmc
