#include "monodromy.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numeric>

#include "cxmat.hpp"

namespace rhmc {

namespace {

using state_type = std::vector<cplx>;

double wrap_angle(double a) {
    while (a > pi) a -= 2.0 * pi;
    while (a <= -pi) a += 2.0 * pi;
    return a;
}

/* distance from a point to one path piece */
double piece_distance(const PathPiece& piece, cplx q) {
    if (piece.kind == PathPiece::Kind::segment) {
        cplx d = piece.b - piece.a;
        double len2 = std::norm(d);
        if (len2 == 0.0) return std::abs(q - piece.a);
        double t = std::clamp(((q - piece.a) * std::conj(d)).real() / len2, 0.0, 1.0);
        return std::abs(q - (piece.a + t * d));
    }
    double dc = std::abs(q - piece.center);
    double span = std::abs(piece.ang1 - piece.ang0);
    if (span >= 2.0 * pi - 1e-12) return std::abs(dc - piece.radius);
    double phi = std::arg(q - piece.center);
    double lo = std::min(piece.ang0, piece.ang1), hi = std::max(piece.ang0, piece.ang1);
    for (int k = -2; k <= 2; ++k) {
        double cand = phi + 2.0 * pi * k;
        if (cand >= lo && cand <= hi) return std::abs(dc - piece.radius);
    }
    return std::min(std::abs(q - piece.at(0.0)), std::abs(q - piece.at(1.0)));
}

struct TransportOut {
    CMatrix U;
    double det_err = 0.0;
};

/* integrate Y' = A(z)Y along the path together with the trace of A, which
   predicts det Y and gives an independent error estimate */
TransportOut transport_raw(const FuchsianSystem& system, const std::vector<PathPiece>& path,
                           const IntegrationConfig& cfg) {
    namespace ode = boost::numeric::odeint;
    const int p = system.p();

    for (const auto& piece : path)
        for (cplx a : system.points)
            if (piece_distance(piece, a) < cfg.safety_margin)
                throw rhmc_error(status::integration,
                                 "SingularityTooClose: path passes within the safety margin");

    state_type x(p * p + 1, cplx(0));
    for (int i = 0; i < p; ++i) x[i * p + i] = 1;  // Y = I, trace integral = 0

    auto stepper = ode::make_controlled(cfg.abs_tol, cfg.rel_tol,
                                        ode::runge_kutta_fehlberg78<state_type>());
    long attempts = 0;
    for (const auto& piece : path) {
        auto rhs = [&](const state_type& s, state_type& dsdt, double t) {
            cplx z = piece.at(t), dz = piece.derivative(t);
            CMatrix A = system.coeff(z);
            Eigen::Map<const CMatrix> Y(s.data(), p, p);
            Eigen::Map<CMatrix> dY(dsdt.data(), p, p);
            dY = dz * (A * Y);
            dsdt[p * p] = dz * A.trace();
        };
        double t = 0.0, dt = cfg.max_step_frac;
        while (1.0 - t > 1e-12) {
            dt = std::min({dt, cfg.max_step_frac, 1.0 - t});
            if (dt < 1e-13 || ++attempts > 5'000'000)
                throw rhmc_error(status::integration,
                                 "ToleranceNotMet: step control failed to advance the path");
            stepper.try_step(rhs, x, t, dt);
        }
    }

    TransportOut out;
    out.U.resize(p, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) out.U(i, j) = x[j * p + i];
    cplx det_pred = std::exp(x[p * p]);
    out.det_err = std::abs(out.U.determinant() - det_pred) / std::max(1.0, std::abs(det_pred));
    return out;
}

}  // namespace

PathPiece PathPiece::make_segment(cplx from, cplx to) {
    PathPiece p;
    p.kind = Kind::segment;
    p.a = from;
    p.b = to;
    return p;
}

PathPiece PathPiece::make_arc(cplx center, double radius, double ang0, double ang1) {
    PathPiece p;
    p.kind = Kind::arc;
    p.center = center;
    p.radius = radius;
    p.ang0 = ang0;
    p.ang1 = ang1;
    return p;
}

cplx PathPiece::at(double t) const {
    if (kind == Kind::segment) return a + t * (b - a);
    return center + radius * std::exp(iunit * (ang0 + t * (ang1 - ang0)));
}

cplx PathPiece::derivative(double t) const {
    if (kind == Kind::segment) return b - a;
    return radius * iunit * (ang1 - ang0) * std::exp(iunit * (ang0 + t * (ang1 - ang0)));
}

double winding_number(const std::vector<PathPiece>& path, cplx point) {
    double acc = 0.0;
    const int K = 256;
    for (const auto& piece : path) {
        cplx prev = piece.at(0.0);
        for (int k = 1; k <= K; ++k) {
            cplx cur = piece.at(static_cast<double>(k) / K);
            acc += std::arg((cur - point) / (prev - point));
            prev = cur;
        }
    }
    return acc / (2.0 * pi);
}

std::vector<Loop> default_loops(const std::vector<cplx>& points, std::optional<cplx> base) {
    const int n = static_cast<int>(points.size());
    if (n < 1) throw rhmc_error(status::precondition, "DegeneratePoints: no singular points");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (points[i] == points[j])
                throw rhmc_error(status::precondition, "DegeneratePoints: coincident singular points");

    cplx centroid = std::accumulate(points.begin(), points.end(), cplx(0)) / double(n);
    double spread = 0.0;
    for (cplx a : points) spread = std::max(spread, std::abs(a - centroid));
    if (spread == 0.0) spread = std::max(1.0, std::abs(points[0]));

    auto radii_for = [&](cplx b) {
        std::vector<double> r(n);
        for (int i = 0; i < n; ++i) {
            double d = std::abs(points[i] - b);
            for (int j = 0; j < n; ++j)
                if (j != i) d = std::min(d, std::abs(points[i] - points[j]));
            r[i] = 0.2 * d;
        }
        return r;
    };

    cplx b;
    if (base) {
        b = *base;
    } else {
        // sweep candidate directions; reject bases nearly aligned with a pair of
        // points, since a stem would then cut through another loop's circle
        double best_score = -1e18;
        cplx best_b = centroid - 2.2 * spread * iunit;
        for (int k = 0; k < 32; ++k) {
            double off = 0.25 * ((k + 1) / 2) * (k % 2 ? 1.0 : -1.0);
            cplx cand = centroid + 2.2 * spread * std::exp(iunit * (-pi / 2.0 + off));
            auto r = radii_for(cand);
            double score = 1e18;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    double sep = std::abs(wrap_angle(std::arg(points[i] - cand) - std::arg(points[j] - cand)));
                    double need = 1.3 * (r[i] + r[j]) /
                                  std::min(std::abs(points[i] - cand), std::abs(points[j] - cand));
                    score = std::min(score, sep - need);
                }
            if (score > best_score) {
                best_score = score;
                best_b = cand;
            }
            if (score > 0.0) break;
        }
        b = best_b;
    }

    auto r = radii_for(b);
    std::vector<Loop> loops;
    for (int i = 0; i < n; ++i) {
        cplx dir = (b - points[i]) / std::abs(b - points[i]);
        cplx s = points[i] + r[i] * dir;
        double phi = std::arg(dir);
        Loop L;
        L.base = b;
        L.index = i;
        L.segments.push_back(PathPiece::make_segment(b, s));
        L.segments.push_back(PathPiece::make_arc(points[i], r[i], phi, phi + 2.0 * pi));
        L.segments.push_back(PathPiece::make_segment(s, b));
        loops.push_back(std::move(L));
    }

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double w = winding_number(loops[i].segments, points[j]);
            if (std::abs(w - (i == j ? 1.0 : 0.0)) > 0.1)
                throw rhmc_error(status::precondition,
                                 "loop winding check failed for the chosen base");
        }
    return loops;
}

CMatrix transport(const FuchsianSystem& system, const std::vector<PathPiece>& path,
                  const IntegrationConfig& cfg) {
    system.validate();
    return transport_raw(system, path, cfg).U;
}

CMatrix transport(const FuchsianSystem& system, const Loop& loop, const IntegrationConfig& cfg) {
    return transport(system, loop.segments, cfg);
}

MonodromyResult compute_monodromy(const FuchsianSystem& system, const IntegrationConfig& cfg,
                                  std::optional<cplx> base) {
    system.validate();
    const int n = system.n();
    MonodromyResult result;
    result.loops = default_loops(system.points, base);
    const cplx b = result.loops[0].base;

    std::vector<CMatrix> T(n);
    for (int i = 0; i < n; ++i) {
        TransportOut out = transport_raw(system, result.loops[i].segments, cfg);
        T[i] = std::move(out.U);
        result.loop_errors.push_back(out.det_err);
    }

    // big counterclockwise circle through the base; the loop product must match it
    cplx centroid = std::accumulate(system.points.begin(), system.points.end(), cplx(0)) / double(n);
    double R = std::abs(b - centroid);
    double beta = std::arg(b - centroid);
    std::vector<PathPiece> big{PathPiece::make_arc(centroid, R, beta, beta + 2.0 * pi)};
    CMatrix B = transport_raw(system, big, cfg).U;

    // composition order = descending angle seen from the base
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return std::arg(system.points[i] - b) > std::arg(system.points[j] - b);
    });

    CMatrix P = CMatrix::Identity(system.p(), system.p());
    for (int k = 0; k < n; ++k) P = P * T[order[k]];
    result.relation_defect = (P * B.inverse() - CMatrix::Identity(system.p(), system.p())).norm();
    result.defect_flagged = result.relation_defect > 100.0 * cfg.rel_tol;

    // braid the factors into index order without changing the product
    std::vector<std::pair<int, CMatrix>> seq;
    for (int k = 0; k < n; ++k) seq.emplace_back(order[k], T[order[k]]);
    bool moved = true;
    while (moved) {
        moved = false;
        for (int k = 0; k + 1 < n; ++k)
            if (seq[k].first > seq[k + 1].first) {
                auto [i, X] = seq[k];
                auto [j, Y] = seq[k + 1];
                seq[k] = {j, X * Y * X.inverse()};
                seq[k + 1] = {i, std::move(X)};
                moved = true;
            }
    }

    result.tuple.role = TupleRole::monodromy;
    result.tuple.matrices.resize(n);
    for (auto& [idx, M] : seq) result.tuple.matrices[idx] = std::move(M);
    return result;
}

VerifyReport verify_rh_solution(const FuchsianSystem& system, const MatrixTuple& target,
                                const ToleranceConfig& tol, const IntegrationConfig& cfg) {
    target.validate();
    VerifyReport report;
    report.monodromy = compute_monodromy(system, cfg);
    report.relation_defect = report.monodromy.relation_defect;
    if (report.monodromy.tuple.n() != target.n() || report.monodromy.tuple.p() != target.p())
        return report;  // shape mismatch: failure with infinite residual

    if (auto C = simultaneous_conjugator(report.monodromy.tuple, target, tol)) {
        report.success = true;
        report.conjugator = *C;
        report.residual = tuple_conjugation_residual(report.monodromy.tuple, target, *C);
        return report;
    }
    ToleranceConfig loose = tol;
    loose.conj_tol = 1e6;  // recover a best-effort residual for the failure report
    if (auto C = simultaneous_conjugator(report.monodromy.tuple, target, loose)) {
        report.conjugator = *C;
        report.residual = tuple_conjugation_residual(report.monodromy.tuple, target, *C);
    }
    return report;
}

}  // namespace rhmc
