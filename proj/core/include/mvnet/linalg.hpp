#pragma once

#include <Eigen/Dense>

namespace mvnet {

/// Eigen-decomposition of a symmetric matrix. Eigenvalues ascending;
/// column k of `vectors` pairs with values(k).
struct SymmetricEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // empty unless requested
    int sweeps = 0;
};

struct JacobiOptions {
    double tolerance = 1e-12;  // off-diagonal Frobenius norm relative to ||M||_F
    int max_sweeps = 100;
    bool vectors = true;
};

/// Cyclic Jacobi rotations. Throws NotSymmetric when |M - M^T| exceeds
/// 1e-12 (relative to max(1, max|M|)), NotConverged after max_sweeps.
SymmetricEigen eig_sym(const Eigen::MatrixXd& m, const JacobiOptions& opts = {});

/// Warm start: diagonalizes basis^T M basis, where `basis` is orthogonal
/// (typically eigenvectors of a nearby matrix). Vectors are returned in the
/// original coordinates.
SymmetricEigen eig_sym(const Eigen::MatrixXd& m, const Eigen::MatrixXd& basis, const JacobiOptions& opts = {});

double max_eigenvalue(const Eigen::MatrixXd& m);
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Solves A^T P + P A = C by complex Schur reduction (Bartels-Stewart).
/// Throws SingularLyapunov when A and -A^T share an eigenvalue, which
/// includes any eigenvalue on the imaginary axis.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c);

/// Cholesky succeeds on the symmetric part and the matrix is symmetric.
bool is_positive_definite(const Eigen::MatrixXd& p, double symmetry_tol = 1e-8);

/// True iff A^T P + P A = -I has a symmetric positive definite solution.
/// Throws SingularLyapunov when the equation is singular (inconclusive).
bool hurwitz(const Eigen::MatrixXd& a);

}  // namespace mvnet
