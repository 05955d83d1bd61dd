#include "rhsolve.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "cxmat.hpp"
#include "monodromy.hpp"

namespace rhmc {

namespace {

/* log(eta)/(2 pi i) with the argument taken in [0, 2 pi), so Re lands in [0,1) */
cplx branch_log(cplx eta) {
    double theta = std::arg(eta);
    if (theta < 0) theta += 2.0 * pi;
    return cplx(theta, -std::log(std::abs(eta))) / (2.0 * pi);
}

/* one eigenvalue cluster of one matrix: all its slots carry the same exponent
   and shift together */
struct exp_cluster {
    int point = 0;  // 0..n-1 finite, n = infinity
    cplx chi;
    cplx eta;
    int mult = 1;
    int slot0 = 0;
    int shift = 0;
};

struct cluster_table {
    std::vector<exp_cluster> clusters;
    int n = 0, p = 0;
    int total_shift = 0;  // units of sum decrease still to apply
};

cluster_table collect_clusters(const MatrixTuple& G, const ToleranceConfig& cfg) {
    G.validate();
    if (G.role != TupleRole::monodromy)
        throw rhmc_error(status::precondition, "exponents are chosen from a monodromy tuple");

    cluster_table tab;
    tab.n = G.n();
    tab.p = G.p();
    for (int i = 0; i <= tab.n; ++i) {
        CMatrix M = i < tab.n ? G.matrices[i] : G.at_infinity();
        std::vector<exp_cluster> at_point;
        int total = 0;
        for (const auto& grp : jordan_structure(M, cfg)) {
            if (std::abs(grp.eigenvalue) < 1e-300)
                throw rhmc_error(status::precondition, "Singular: monodromy eigenvalue at zero");
            exp_cluster c;
            c.point = i;
            c.eta = grp.eigenvalue;
            c.chi = branch_log(grp.eigenvalue);
            c.mult = 0;
            for (int s : grp.block_sizes) c.mult += s;
            total += c.mult;
            at_point.push_back(c);
        }
        if (total != tab.p)
            throw rhmc_error(status::precondition, "eigenvalue multiplicities do not sum to p");
        std::sort(at_point.begin(), at_point.end(), [](const exp_cluster& a, const exp_cluster& b) {
            if (a.chi.real() != b.chi.real()) return a.chi.real() > b.chi.real();
            return a.chi.imag() > b.chi.imag();
        });
        int slot = 0;
        for (auto& c : at_point) {
            c.slot0 = slot;
            slot += c.mult;
            tab.clusters.push_back(c);
        }
    }

    cplx sum = 0;
    for (const auto& c : tab.clusters) sum += c.chi * (double)c.mult;
    double s_round = std::round(sum.real());
    if (std::abs(sum - s_round) > 1e-8 || s_round < -0.5)
        throw rhmc_error(status::precondition,
                         "Inconsistent: exponent sum is not a nonnegative integer");
    tab.total_shift = (int)s_round;
    return tab;
}

/* which remainders are reachable by whole-cluster unit downshifts */
std::vector<char> shift_feasibility(const cluster_table& tab) {
    std::vector<char> ok(tab.total_shift + 1, 0);
    ok[0] = 1;
    for (int s = 1; s <= tab.total_shift; ++s)
        for (const auto& c : tab.clusters)
            if (c.mult <= s && ok[s - c.mult]) {
                ok[s] = 1;
                break;
            }
    return ok;
}

/* largest current real part first; ties prefer the infinity matrix, then the
   lower point index, then the earlier slot */
bool shift_priority(const cluster_table& tab, const exp_cluster& a, const exp_cluster& b) {
    if (std::abs(a.chi.real() - b.chi.real()) > 1e-12) return a.chi.real() > b.chi.real();
    bool ai = a.point == tab.n, bi = b.point == tab.n;
    if (ai != bi) return ai;
    if (a.point != b.point) return a.point < b.point;
    return a.slot0 < b.slot0;
}

void apply_greedy_shifts(cluster_table& tab) {
    auto ok = shift_feasibility(tab);
    if (!ok[tab.total_shift])
        throw rhmc_error(status::precondition,
                         "ResonantChoice: the exponent sum cannot be met without splitting an "
                         "eigenvalue cluster");
    int left = tab.total_shift;
    while (left > 0) {
        exp_cluster* best = nullptr;
        for (auto& c : tab.clusters) {
            if (c.mult > left || !ok[left - c.mult]) continue;
            if (!best || shift_priority(tab, c, *best)) best = &c;
        }
        best->chi -= 1.0;
        best->shift += 1;
        left -= best->mult;
    }
}

void check_nonresonant(const cluster_table& tab) {
    for (const auto& a : tab.clusters)
        for (const auto& b : tab.clusters) {
            if (&a == &b || a.point != b.point) continue;
            cplx d = a.chi - b.chi;
            double k = std::round(d.real());
            if (k != 0.0 && std::abs(d - k) < 1e-9)
                throw rhmc_error(status::precondition,
                                 "ResonantChoice: two exponents of one matrix differ by a "
                                 "nonzero integer");
        }
}

SpectralData assemble(const cluster_table& tab) {
    SpectralData sd;
    sd.chi.assign(tab.n + 1, std::vector<cplx>(tab.p, 0));
    sd.eta.assign(tab.n + 1, std::vector<cplx>(tab.p, 0));
    sd.shifts.assign(tab.n + 1, std::vector<int>(tab.p, 0));
    for (const auto& c : tab.clusters)
        for (int s = 0; s < c.mult; ++s) {
            sd.chi[c.point][c.slot0 + s] = c.chi;
            sd.eta[c.point][c.slot0 + s] = c.eta;
            sd.shifts[c.point][c.slot0 + s] = c.shift;
        }
    return sd;
}

/* all ways to spend the shift budget on whole clusters, greedy-independent */
void enumerate_shift_vectors(const cluster_table& tab, size_t idx, int left,
                             std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (out.size() >= 4096) return;
    if (idx == tab.clusters.size()) {
        if (left == 0) out.push_back(current);
        return;
    }
    int mult = tab.clusters[idx].mult;
    for (int k = 0; k * mult <= left; ++k) {
        current[idx] = k;
        enumerate_shift_vectors(tab, idx + 1, left - k * mult, current, out);
    }
    current[idx] = 0;
}

/* 2x2 residue with prescribed eigenvalues: eigenvector frame [[1,u],[v,1]]
   for a split pair, chi I plus a rank-one nilpotent for a repeated one */
bool chart_residue(cplx c1, cplx c2, bool equal_pair, cplx u, cplx v, CMatrix& A) {
    A.resize(2, 2);
    if (equal_pair) {
        A << c1 - u * v, u * u, -v * v, c1 + u * v;
        return true;
    }
    cplx det = 1.0 - u * v;
    if (std::abs(det) < 1e-8) return false;
    A << c1 - c2 * u * v, (c2 - c1) * u, (c1 - c2) * v, c2 - c1 * u * v;
    A /= det;
    return true;
}

constexpr double kDegenerateTol = 1e-10;

}  // namespace

SpectralData choose_exponents(const MatrixTuple& G, const ToleranceConfig& cfg) {
    cluster_table tab = collect_clusters(G, cfg);
    apply_greedy_shifts(tab);
    check_nonresonant(tab);
    return assemble(tab);
}

cplx nabla(const SpectralData& sd) {
    if (sd.p() != 2 || sd.n() != 2)
        throw rhmc_error(status::precondition, "nabla needs 2x2 three-point spectral data");
    cplx sum = 0;
    for (const auto& row : sd.chi)
        for (cplx c : row) sum += c;
    if (std::abs(sum) > 1e-8)
        throw rhmc_error(status::precondition, "nabla needs a zero exponent sum");
    return (sd.chi[0][0] + sd.chi[1][0]) * (sd.chi[0][1] + sd.chi[1][1]) -
           sd.chi[2][0] * sd.chi[2][1];
}

FuchsianSystem build_2x2_three_point(const MatrixTuple& Gt, const std::vector<cplx>& points,
                                     const ToleranceConfig& cfg) {
    Gt.validate();
    if (Gt.role != TupleRole::monodromy || Gt.p() != 2 || Gt.n() != 2)
        throw rhmc_error(status::precondition, "three-point builder needs a 2x2 monodromy pair");
    if (points.size() != 2)
        throw rhmc_error(status::precondition, "three-point builder needs two finite points");
    if (!is_irreducible_tuple(Gt, cfg))
        throw rhmc_error(status::precondition,
                         "Reducible: triangular normal form needs an irreducible pair");

    cluster_table base = collect_clusters(Gt, cfg);

    // shift distributions to try: the greedy one first, then every other way
    // of spending the budget on whole clusters
    std::vector<std::vector<int>> shift_vectors;
    {
        cluster_table greedy = base;
        apply_greedy_shifts(greedy);
        std::vector<int> gv;
        for (const auto& c : greedy.clusters) gv.push_back(c.shift);
        shift_vectors.push_back(gv);
        std::vector<int> cur(base.clusters.size(), 0);
        std::vector<std::vector<int>> all;
        enumerate_shift_vectors(base, 0, base.total_shift, cur, all);
        for (auto& v : all)
            if (v != gv) shift_vectors.push_back(std::move(v));
    }

    for (const auto& sv : shift_vectors) {
        cluster_table tab = base;
        for (size_t i = 0; i < sv.size(); ++i) {
            tab.clusters[i].chi -= (double)sv[i];
            tab.clusters[i].shift = sv[i];
        }
        try {
            check_nonresonant(tab);
        } catch (const rhmc_error&) {
            continue;
        }
        SpectralData sd = assemble(tab);
        cplx del = nabla(sd);
        cplx other = del + (sd.chi[0][0] - sd.chi[0][1]) * (sd.chi[1][0] - sd.chi[1][1]);
        if (std::abs(del) <= kDegenerateTol || std::abs(other) <= kDegenerateTol) continue;

        CMatrix A1(2, 2), A2(2, 2);
        A1 << sd.chi[0][0], 0, 1, sd.chi[0][1];
        A2 << sd.chi[1][0], del, 0, sd.chi[1][1];
        FuchsianSystem sys;
        sys.points = points;
        sys.residues = MatrixTuple(TupleRole::residue, {A1, A2});
        sys.validate();
        return sys;
    }
    throw rhmc_error(status::precondition,
                     "DegenerateNabla: every admissible branch shift gives a degenerate "
                     "triangular form");
}

FuchsianSystem solve_2x2_numeric(const MatrixTuple& Gt, const std::vector<cplx>& points,
                                 const ToleranceConfig& cfg, unsigned seed, int restarts) {
    Gt.validate();
    if (Gt.role != TupleRole::monodromy || Gt.p() != 2 || Gt.n() != 3)
        throw rhmc_error(status::precondition, "numeric solver needs a 2x2 tuple of three matrices");
    if (points.size() != 3)
        throw rhmc_error(status::precondition, "numeric solver needs three finite points");
    if (!is_irreducible_tuple(Gt, cfg))
        throw rhmc_error(status::precondition, "Reducible: numeric solver needs an irreducible tuple");

    SpectralData sd = choose_exponents(Gt, cfg);
    bool equal_pair[3];
    for (int i = 0; i < 3; ++i) equal_pair[i] = std::abs(sd.chi[i][0] - sd.chi[i][1]) < 1e-13;

    const CMatrix &G1 = Gt.matrices[0], &G2 = Gt.matrices[1], &G3 = Gt.matrices[2];
    const cplx t12 = (G1 * G2).trace(), t13 = (G1 * G3).trace(), t23 = (G2 * G3).trace();
    const cplx t123 = (G1 * G2 * G3).trace();
    const cplx det_inf = sd.chi[3][0] * sd.chi[3][1];

    const auto loops = default_loops(points);
    IntegrationConfig fast;
    fast.rel_tol = 1e-9;
    fast.abs_tol = 1e-11;

    auto residues_at = [&](const Eigen::VectorXd& x, MatrixTuple& T) {
        T.role = TupleRole::residue;
        T.matrices.assign(3, CMatrix());
        for (int i = 0; i < 3; ++i) {
            cplx u(x[4 * i], x[4 * i + 1]), v(x[4 * i + 2], x[4 * i + 3]);
            if (!chart_residue(sd.chi[i][0], sd.chi[i][1], equal_pair[i], u, v, T.matrices[i]))
                return false;
        }
        return true;
    };

    auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& F) {
        F.setConstant(10, 1e6);
        MatrixTuple T;
        if (!residues_at(x, T)) return;
        for (const auto& M : T.matrices)
            if (!M.allFinite() || M.norm() > 1e8) return;
        FuchsianSystem sys;
        sys.points = points;
        sys.residues = T;
        CMatrix M1, M2, M3;
        try {
            M1 = transport(sys, loops[0], fast);
            M2 = transport(sys, loops[1], fast);
            M3 = transport(sys, loops[2], fast);
        } catch (const rhmc_error&) {
            return;
        }
        cplx r[5] = {(M1 * M2).trace() - t12, (M1 * M3).trace() - t13, (M2 * M3).trace() - t23,
                     (M1 * M2 * M3).trace() - t123,
                     CMatrix(-(T.matrices[0] + T.matrices[1] + T.matrices[2])).determinant() -
                         det_inf};
        for (int k = 0; k < 5; ++k) {
            F[2 * k] = r[k].real();
            F[2 * k + 1] = r[k].imag();
        }
    };

    std::mt19937 rng(seed ? seed : 0x5eedu);
    std::normal_distribution<double> gauss(0.0, 0.7);
    double best_residual = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt < restarts; ++attempt) {
        Eigen::VectorXd x(12);
        for (int k = 0; k < 12; ++k) x[k] = gauss(rng);
        Eigen::VectorXd F(10), Ft(10);
        objective(x, F);
        double cost = F.squaredNorm();
        double mu = 1e-3;
        int stale = 0;

        for (int iter = 0; iter < 120 && cost > 1e-26 && mu < 1e12 && stale < 10; ++iter) {
            Eigen::MatrixXd J(10, 12);
            const double h = 1e-6;
            for (int k = 0; k < 12; ++k) {
                Eigen::VectorXd xh = x;
                xh[k] += h;
                objective(xh, Ft);
                J.col(k) = (Ft - F) / h;
            }
            Eigen::MatrixXd JtJ = J.transpose() * J;
            Eigen::VectorXd g = J.transpose() * F;
            bool improved = false;
            for (int tries = 0; tries < 8; ++tries) {
                Eigen::MatrixXd H = JtJ + mu * Eigen::MatrixXd::Identity(12, 12);
                Eigen::VectorXd step = H.ldlt().solve(-g);
                Eigen::VectorXd xt = x + step;
                objective(xt, Ft);
                double ct = Ft.squaredNorm();
                if (ct < cost) {
                    x = xt;
                    F = Ft;
                    cost = ct;
                    mu = std::max(mu * 0.35, 1e-12);
                    improved = true;
                    break;
                }
                mu *= 3.0;
                if (mu >= 1e12) break;
            }
            stale = improved ? 0 : stale + 1;
        }

        if (F.lpNorm<Eigen::Infinity>() < 1e-8) {
            MatrixTuple T;
            if (!residues_at(x, T)) continue;
            FuchsianSystem sys;
            sys.points = points;
            sys.residues = T;
            VerifyReport rep = verify_rh_solution(sys, Gt, cfg);
            best_residual = std::min(best_residual, rep.residual);
            if (rep.success) return sys;
        }
    }
    throw rhmc_error(status::verification,
                     "NoConvergence: best conjugation residual " + std::to_string(best_residual));
}

std::vector<cplx> lambda_candidates(const MatrixTuple& G, const ToleranceConfig& cfg,
                                    const std::vector<cplx>& extras) {
    G.validate();
    if (G.role != TupleRole::monodromy)
        throw rhmc_error(status::precondition, "lambda candidates come from a monodromy tuple");

    std::vector<cplx> pool;
    auto add_reciprocals = [&](const CMatrix& M) {
        CVector ev = M.eigenvalues();
        for (int k = 0; k < ev.size(); ++k)
            if (std::abs(ev[k]) > 1e-12) pool.push_back(1.0 / ev[k]);
    };
    for (const auto& M : G.matrices) add_reciprocals(M);
    add_reciprocals(G.combined());

    std::vector<cplx> kept;
    auto known = [&](cplx v) {
        for (cplx w : kept)
            if (std::abs(v - w) <= 1e-9 * std::max(1.0, std::abs(v))) return true;
        return false;
    };
    for (cplx v : pool) {
        if (std::abs(v) < 1e-12 || std::abs(v - 1.0) < 1e-12 || known(v)) continue;
        kept.push_back(v);
    }

    std::vector<std::pair<int, cplx>> ranked;
    for (cplx v : kept) {
        int dim = std::numeric_limits<int>::max();
        try {
            dim = predicted_dim(G, v, cfg);
        } catch (const rhmc_error&) {
        }
        ranked.push_back({dim, v});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        double da = std::abs(a.second - 1.0), db = std::abs(b.second - 1.0);
        if (std::abs(da - db) > 1e-12) return da > db;
        if (a.second.real() != b.second.real()) return a.second.real() < b.second.real();
        return a.second.imag() < b.second.imag();
    });

    std::vector<cplx> out;
    for (const auto& [dim, v] : ranked) out.push_back(v);
    kept = out;
    for (cplx v : extras) {
        if (std::abs(v) < 1e-12 || std::abs(v - 1.0) < 1e-12 || known(v)) continue;
        kept.push_back(v);
        out.push_back(v);
    }
    return out;
}

std::pair<FuchsianSystem, SchemeTrace> general_scheme_solve(const MatrixTuple& G,
                                                            const std::vector<cplx>& points,
                                                            const ToleranceConfig& cfg,
                                                            unsigned seed,
                                                            const std::vector<cplx>& extras,
                                                            int restarts) {
    G.validate();
    if (G.role != TupleRole::monodromy)
        throw rhmc_error(status::precondition, "scheme input must be a monodromy tuple");
    if ((int)points.size() != G.n())
        throw rhmc_error(status::precondition, "one finite point per matrix is required");
    if (G.n() != 2 && G.n() != 3)
        throw rhmc_error(status::precondition,
                         "only three- and four-point problems are supported");
    if (G.p() < 2) throw rhmc_error(status::precondition, "matrix size must be at least 2");
    if (!is_irreducible_tuple(G, cfg))
        throw rhmc_error(status::precondition, "Reducible: scheme needs an irreducible tuple");

    SchemeTrace trace;
    trace.input_conditions = check_conditions(G, cfg);

    auto finish = [&](FuchsianSystem sys) {
        VerifyReport rep = verify_rh_solution(sys, G, cfg);
        trace.verify_residual = rep.residual;
        trace.relation_defect = rep.relation_defect;
        if (!rep.success)
            throw rhmc_error(status::verification,
                             "VerificationFail: conjugation residual " +
                                 std::to_string(rep.residual));
        trace.final_system = sys;
        return std::make_pair(std::move(sys), trace);
    };

    if (G.p() == 2) {  // already the reduced shape; solve directly
        trace.notes.push_back("input already 2x2, reduction skipped");
        FuchsianSystem sys = G.n() == 2 ? build_2x2_three_point(G, points, cfg)
                                        : solve_2x2_numeric(G, points, cfg, seed, restarts);
        return finish(std::move(sys));
    }

    if (!trace.input_conditions.star_ok || !trace.input_conditions.star_star_ok)
        throw rhmc_error(status::precondition,
                         "kernel intersection conditions fail for the input tuple");

    std::vector<cplx> viable;
    for (cplx lam : lambda_candidates(G, cfg, extras)) {
        try {
            if (predicted_dim(G, lam, cfg) == 2) viable.push_back(lam);
        } catch (const rhmc_error&) {
        }
    }
    trace.candidates = viable;
    if (viable.empty())
        throw rhmc_error(status::no_lambda,
                         "NoLambda: no spectral parameter reduces the tuple to dimension 2");

    // quotient arithmetic splits defective eigenvalues by about the square
    // root of the entry noise, so the reduced stage clusters more coarsely
    ToleranceConfig cfg_red = cfg;
    cfg_red.eig_cluster_tol = std::max(cfg.eig_cluster_tol, 1e-6);

    std::optional<rhmc_error> saved;
    int theorem_fail = 0;
    double best_residual = std::numeric_limits<double>::infinity();

    for (cplx lam : viable) {
        try {
            MatrixTuple reduced = middle_convolve_mult(G, lam, cfg);
            if (reduced.p() != 2) {
                trace.notes.push_back("quotient dimension surprise, candidate skipped");
                continue;
            }
            cplx mu = std::log(lam) / two_pi_i;
            cplx nu = 1.0 - mu;  // exp(2 pi i nu) = 1/lambda

            FuchsianSystem reduced_sys = G.n() == 2
                                             ? build_2x2_three_point(reduced, points, cfg_red)
                                             : solve_2x2_numeric(reduced, points, cfg_red, seed, restarts);

            TheoremConditionReport rep =
                check_mc_theorem_conditions(reduced_sys.residues, reduced, nu, cfg_red);
            trace.lift_conditions = rep;
            if (!rep.all_ok()) {
                theorem_fail = !rep.star_ok          ? 1
                               : !rep.star_star_ok   ? 2
                               : !rep.rank_match_ok  ? 3
                                                     : 4;
                trace.notes.push_back("transport conditions fail, candidate skipped");
                continue;
            }

            MatrixTuple lifted = middle_convolve_add(reduced_sys.residues, nu, cfg);
            FuchsianSystem final_sys;
            final_sys.points = points;
            final_sys.residues = lifted;
            final_sys.validate();

            VerifyReport vrep = verify_rh_solution(final_sys, G, cfg);
            best_residual = std::min(best_residual, vrep.residual);
            if (!vrep.success) {
                trace.notes.push_back("final verification miss, candidate skipped");
                continue;
            }
            trace.lambda = lam;
            trace.reduced = true;
            trace.reduced_tuple = reduced;
            trace.reduced_system = reduced_sys;
            trace.nu = nu;
            trace.final_system = final_sys;
            trace.verify_residual = vrep.residual;
            trace.relation_defect = vrep.relation_defect;
            return {std::move(final_sys), trace};
        } catch (const rhmc_error& e) {
            saved = e;
            trace.notes.push_back(e.what());
        }
    }

    if (std::isfinite(best_residual))
        throw rhmc_error(status::verification, "VerificationFail: best conjugation residual " +
                                                   std::to_string(best_residual));
    if (theorem_fail)
        throw rhmc_error(status::theorem_conditions,
                         "TheoremConditionsFail: condition " + std::to_string(theorem_fail) +
                             " fails for every viable candidate");
    if (saved) throw *saved;
    throw rhmc_error(status::no_lambda, "NoLambda: every candidate was rejected");
}

}  // namespace rhmc
