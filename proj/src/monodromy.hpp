#pragma once

#include <limits>
#include <optional>

#include "types.hpp"

namespace rhmc {

/* one smooth piece of an integration path */
struct PathPiece {
    enum class Kind { segment, arc };
    Kind kind = Kind::segment;
    cplx a, b;         // segment endpoints
    cplx center;       // arc data; counterclockwise iff ang1 > ang0
    double radius = 0, ang0 = 0, ang1 = 0;

    static PathPiece make_segment(cplx from, cplx to);
    static PathPiece make_arc(cplx center, double radius, double ang0, double ang1);

    cplx at(double t) const;          // t in [0,1]
    cplx derivative(double t) const;  // dz/dt
};

/* lollipop path around one singular point, based at `base` */
struct Loop {
    cplx base;
    std::vector<PathPiece> segments;
    int index = 0;  // which point it encircles
};

struct IntegrationConfig {
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    double max_step_frac = 0.1;   // cap on the parameter step per piece
    double safety_margin = 1e-8;  // minimum allowed distance to any singularity
};

struct MonodromyResult {
    MatrixTuple tuple;  // index-ordered; member at infinity derived via the relation
    std::vector<Loop> loops;
    std::vector<double> loop_errors;  // determinant drift per loop
    double relation_defect = 0.0;     // product vs an independently integrated big circle
    bool defect_flagged = false;
};

struct VerifyReport {
    bool success = false;
    double residual = std::numeric_limits<double>::infinity();
    CMatrix conjugator;
    double relation_defect = 0.0;
    MonodromyResult monodromy;
};

/* winding of a closed path around a point, by summed argument increments */
double winding_number(const std::vector<PathPiece>& path, cplx point);

/* standard loops: far base (>= 2x spread from the centroid, avoiding alignment
   with any pair of points), stem toward each point, full counterclockwise circle
   of radius 0.2 x (distance to the nearest other point or the base), stem back */
std::vector<Loop> default_loops(const std::vector<cplx>& points, std::optional<cplx> base = {});

/* fundamental-solution transport along a path, normalized to I at the start */
CMatrix transport(const FuchsianSystem& system, const std::vector<PathPiece>& path,
                  const IntegrationConfig& cfg = {});
CMatrix transport(const FuchsianSystem& system, const Loop& loop,
                  const IntegrationConfig& cfg = {});

/* per-loop transports reordered (by braid moves on the matrices) so that the
   index-ordered product equals the transport along one big counterclockwise circle */
MonodromyResult compute_monodromy(const FuchsianSystem& system, const IntegrationConfig& cfg = {},
                                  std::optional<cplx> base = {});

/* monodromy of the system compared against a target tuple up to one conjugation */
VerifyReport verify_rh_solution(const FuchsianSystem& system, const MatrixTuple& target,
                                const ToleranceConfig& tol = {}, const IntegrationConfig& cfg = {});

}  // namespace rhmc
