#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace rhmc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline const cplx iunit{0.0, 1.0};
inline const cplx two_pi_i{0.0, 2.0 * pi};

/* status values double as process exit codes */
enum class status {
    ok = 0,
    parse = 2,
    precondition = 3,
    no_lambda = 4,
    theorem_conditions = 5,
    verification = 6,
    integration = 7,
};

class rhmc_error : public std::runtime_error {
public:
    status code;
    rhmc_error(status c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct ToleranceConfig {
    double rank_rel_tol = 1e-10;
    double eig_cluster_tol = 1e-8;
    double conj_tol = 1e-8;
};

enum class TupleRole { monodromy, residue };

/* ordered tuple (T_1..T_n) of same-size square matrices; the member at infinity
   (product inverse resp. negated sum) is always derived, never stored */
struct MatrixTuple {
    TupleRole role = TupleRole::monodromy;
    std::vector<CMatrix> matrices;

    MatrixTuple() = default;
    MatrixTuple(TupleRole r, std::vector<CMatrix> ms) : role(r), matrices(std::move(ms)) {}

    int n() const { return (int)matrices.size(); }
    int p() const { return matrices.empty() ? 0 : (int)matrices[0].rows(); }
    bool empty() const { return matrices.empty() || p() == 0; }

    /* G_1*...*G_n resp. A_1+...+A_n */
    CMatrix combined() const {
        CMatrix acc = role == TupleRole::monodromy ? CMatrix(CMatrix::Identity(p(), p()))
                                                   : CMatrix(CMatrix::Zero(p(), p()));
        for (const auto& m : matrices) acc = role == TupleRole::monodromy ? CMatrix(acc * m) : CMatrix(acc + m);
        return acc;
    }
    /* G_{n+1} = (G_1*...*G_n)^{-1} resp. A_{n+1} = -(A_1+...+A_n) */
    CMatrix at_infinity() const {
        return role == TupleRole::monodromy ? CMatrix(combined().inverse()) : CMatrix(-combined());
    }

    void validate() const {
        if (matrices.empty()) throw rhmc_error(status::precondition, "empty tuple");
        int d = p();
        for (const auto& m : matrices) {
            if (m.rows() != d || m.cols() != d)
                throw rhmc_error(status::precondition, "tuple matrices must be square and equally sized");
            if (!m.allFinite())
                throw rhmc_error(status::precondition, "tuple contains non-finite entries");
        }
    }
};

/* one eigenvalue with its Jordan block sizes, largest first */
struct JordanGroup {
    cplx eigenvalue;
    std::vector<int> block_sizes;
};
using JordanStructure = std::vector<JordanGroup>;

/* dy/dz = sum_i A_i/(z - a_i) y; residue at infinity derived from the sum */
struct FuchsianSystem {
    std::vector<cplx> points;
    MatrixTuple residues;  // role == residue, count == points.size()

    int p() const { return residues.p(); }
    int n() const { return (int)points.size(); }

    CMatrix coeff(cplx z) const {
        CMatrix a = CMatrix::Zero(p(), p());
        for (int i = 0; i < n(); i++) a += residues.matrices[i] / (z - points[i]);
        return a;
    }

    void validate() const {
        residues.validate();
        if ((int)points.size() != residues.n())
            throw rhmc_error(status::precondition, "point count does not match residue count");
        for (size_t i = 0; i < points.size(); i++)
            for (size_t j = i + 1; j < points.size(); j++)
                if (std::abs(points[i] - points[j]) == 0.0)
                    throw rhmc_error(status::precondition, "singular points must be pairwise distinct");
    }
};

}  // namespace rhmc
