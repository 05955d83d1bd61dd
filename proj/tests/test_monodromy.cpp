#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "cxmat.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "monodromy.hpp"

using namespace rhmc;
using namespace rhmc::fixtures;

namespace {

FuchsianSystem first_example_reduced_system() {
    FuchsianSystem sys;
    sys.points = {cplx(0), cplx(1)};
    sys.residues = first_example_reduced_A();
    return sys;
}

FuchsianSystem first_example_lifted_system() {
    FuchsianSystem sys;
    sys.points = {cplx(0), cplx(1)};
    sys.residues = first_example_lifted_A();
    return sys;
}

/* lollipop with an explicit radius, for the radius-independence check */
std::vector<PathPiece> lollipop(cplx base, cplx a, double r) {
    cplx dir = (base - a) / std::abs(base - a);
    cplx s = a + r * dir;
    double phi = std::arg(dir);
    return {PathPiece::make_segment(base, s), PathPiece::make_arc(a, r, phi, phi + 2.0 * pi),
            PathPiece::make_segment(s, base)};
}

std::vector<cplx> eigen_sorted(const CMatrix& M) {
    CVector ev = M.eigenvalues();
    std::vector<cplx> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](cplx x, cplx y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return out;
}

}  // namespace

TEST_CASE("default loops: geometry and winding") {
    auto single = default_loops({cplx(0)}, cplx(1));
    REQUIRE(single.size() == 1);
    CHECK(single[0].segments[1].radius == doctest::Approx(0.2));
    CHECK(winding_number(single[0].segments, cplx(0)) == doctest::Approx(1.0).epsilon(1e-6));

    auto two = default_loops({cplx(0), cplx(1)});
    REQUIRE(two.size() == 2);
    CHECK(winding_number(two[0].segments, cplx(0)) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(winding_number(two[0].segments, cplx(1)) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(winding_number(two[1].segments, cplx(1)) == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(default_loops({cplx(0), cplx(0)}), rhmc_error);
    CHECK_THROWS_AS(default_loops({}), rhmc_error);
}

TEST_CASE("one-point transport equals the matrix exponential exactly in the base frame") {
    FuchsianSystem sys;
    sys.points = {cplx(0)};
    CMatrix A = CMatrix::Zero(2, 2);
    A.diagonal() << cplx(1.0 / 3.0), cplx(0.25);
    sys.residues = MatrixTuple(TupleRole::residue, {A});

    auto loops = default_loops(sys.points, cplx(1));
    CMatrix T = transport(sys, loops[0]);
    CHECK((T - matrix_exp_2pii(A)).norm() <= 1e-9);
}

TEST_CASE("contractible path transports to the identity") {
    FuchsianSystem sys = first_example_reduced_system();
    // square well away from both singular points
    std::vector<PathPiece> box{
        PathPiece::make_segment(cplx(3, -1), cplx(4, -1)),
        PathPiece::make_segment(cplx(4, -1), cplx(4, 1)),
        PathPiece::make_segment(cplx(4, 1), cplx(3, 1)),
        PathPiece::make_segment(cplx(3, 1), cplx(3, -1)),
    };
    CHECK((transport(sys, box) - CMatrix::Identity(2, 2)).norm() <= 1e-10);
}

TEST_CASE("loop transports around the reduced system carry the expected eigenvalues") {
    FuchsianSystem sys = first_example_reduced_system();
    auto loops = default_loops(sys.points);
    CMatrix T1 = transport(sys, loops[0]);
    CMatrix T2 = transport(sys, loops[1]);

    auto e1 = eigen_sorted(T1);
    CHECK(std::abs(e1[0] - cplx(-1)) < 1e-8);
    CHECK(std::abs(e1[1] - cplx(1)) < 1e-8);
    auto e2 = eigen_sorted(T2);
    CHECK(std::abs(e2[0] - cplx(-2)) < 1e-8);
    CHECK(std::abs(e2[1] - cplx(2)) < 1e-8);
}

TEST_CASE("transport refuses paths through the safety margin") {
    FuchsianSystem sys = first_example_reduced_system();
    std::vector<PathPiece> bad{PathPiece::make_segment(cplx(-1, 0), cplx(2, 0))};
    IntegrationConfig cfg;
    cfg.safety_margin = 1e-3;
    CHECK_THROWS_AS(transport(sys, bad, cfg), rhmc_error);
}

TEST_CASE("computed monodromy of the reduced system matches its target tuple") {
    FuchsianSystem sys = first_example_reduced_system();
    MonodromyResult mon = compute_monodromy(sys);
    REQUIRE(mon.tuple.n() == 2);
    CHECK(mon.relation_defect <= 1e-8);
    for (double e : mon.loop_errors) CHECK(e <= 1e-9);

    ToleranceConfig tol;
    tol.conj_tol = 1e-6;
    auto C = simultaneous_conjugator(mon.tuple, first_example_reduced_G(), tol);
    REQUIRE(C.has_value());
    CHECK(tuple_conjugation_residual(mon.tuple, first_example_reduced_G(), *C) <= 1e-6);
}

TEST_CASE("computed monodromy of the lifted system matches the original tuple") {
    FuchsianSystem sys = first_example_lifted_system();
    MonodromyResult mon = compute_monodromy(sys);
    CHECK(mon.relation_defect <= 1e-8);

    ToleranceConfig tol;
    tol.conj_tol = 1e-6;
    auto C = simultaneous_conjugator(mon.tuple, first_example_G(), tol);
    REQUIRE(C.has_value());
    CHECK(tuple_conjugation_residual(mon.tuple, first_example_G(), *C) <= 1e-6);
}

TEST_CASE("local monodromy matches the residue exponential class on random systems") {
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> re(0.05, 0.85), im(-0.2, 0.2);
    ToleranceConfig loose;
    loose.eig_cluster_tol = 1e-6;
    for (int t = 0; t < 4; ++t) {
        FuchsianSystem sys;
        sys.points = {cplx(0), cplx(1.2), cplx(-0.4, 1.0)};
        sys.residues.role = TupleRole::residue;
        for (int i = 0; i < 3; ++i)
            sys.residues.matrices.push_back(
                with_eigenvalues(rng, {cplx(re(rng), im(rng)), cplx(re(rng), im(rng))}));
        MonodromyResult mon = compute_monodromy(sys);
        for (int i = 0; i < 3; ++i) {
            auto left = jordan_structure(mon.tuple.matrices[i], loose);
            auto right = jordan_structure(matrix_exp_2pii(sys.residues.matrices[i]), loose);
            CHECK(jordan_equal(left, right, 1e-5));
        }
    }
}

TEST_CASE("base-point independence up to conjugation") {
    FuchsianSystem sys = first_example_reduced_system();
    MonodromyResult m1 = compute_monodromy(sys, {}, cplx(0.5, -2.0));
    MonodromyResult m2 = compute_monodromy(sys, {}, cplx(3.0, -2.5));
    ToleranceConfig tol;
    tol.conj_tol = 1e-8;
    auto C = simultaneous_conjugator(m1.tuple, m2.tuple, tol);
    REQUIRE(C.has_value());
    CHECK(tuple_conjugation_residual(m1.tuple, m2.tuple, *C) <= 1e-8);
}

TEST_CASE("radius independence of individual transports") {
    FuchsianSystem sys = first_example_reduced_system();
    cplx base(0.5, -2.0);
    for (int i = 0; i < 2; ++i) {
        CMatrix big = transport(sys, lollipop(base, sys.points[i], 0.2));
        CMatrix small = transport(sys, lollipop(base, sys.points[i], 0.1));
        CHECK((big - small).norm() <= 1e-8);
    }
}

TEST_CASE("verification report for matching and perturbed targets") {
    FuchsianSystem sys = first_example_reduced_system();
    ToleranceConfig tol;
    tol.conj_tol = 1e-6;
    VerifyReport good = verify_rh_solution(sys, first_example_reduced_G(), tol);
    CHECK(good.success);
    CHECK(good.residual <= 1e-6);
    CHECK(good.relation_defect <= 1e-8);

    MatrixTuple off = first_example_reduced_G();
    off.matrices[0](0, 0) += 0.3;
    VerifyReport bad = verify_rh_solution(sys, off, tol);
    CHECK_FALSE(bad.success);
    CHECK(bad.residual > 1e-6);
}
