#include "mvnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mvnet/error.hpp"

namespace mvnet {
namespace {

void check_symmetric(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw NotSymmetric("matrix is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale) throw NotSymmetric("matrix is not symmetric");
        }
    }
}

double off_diagonal_norm2(const Eigen::MatrixXd& a) {
    double s = 0.0;
    const Eigen::Index n = a.rows();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = j + 1; i < n; ++i) s += a(i, j) * a(i, j);
    return 2.0 * s;
}

// In-place cyclic Jacobi on a symmetric matrix (column-major); accumulates
// rotations into v when non-null.
int jacobi_sweeps(Eigen::MatrixXd& a, Eigen::MatrixXd* v, double target_norm2, int max_sweeps) {
    const Eigen::Index n = a.rows();
    int sweep = 0;
    while (off_diagonal_norm2(a) > target_norm2) {
        if (sweep == max_sweeps) throw NotConverged("Jacobi did not converge in " + std::to_string(max_sweeps) + " sweeps");
        ++sweep;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                // Rotation angle that annihilates a(p,q) (Golub & Van Loan, sym.schur2).
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                double* colp = a.col(p).data();
                double* colq = a.col(q).data();
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = colp[k];
                    const double akq = colq[k];
                    colp[k] = c * akp - s * akq;
                    colq[k] = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    a(p, k) = colp[k];
                    a(q, k) = colq[k];
                }
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;

                if (v != nullptr) {
                    double* vp = v->col(p).data();
                    double* vq = v->col(q).data();
                    for (Eigen::Index k = 0; k < n; ++k) {
                        const double x = vp[k];
                        const double y = vq[k];
                        vp[k] = c * x - s * y;
                        vq[k] = s * x + c * y;
                    }
                }
            }
        }
    }
    return sweep;
}

SymmetricEigen finish(Eigen::MatrixXd& a, Eigen::MatrixXd* v, int sweeps) {
    const Eigen::Index n = a.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
    SymmetricEigen out;
    out.sweeps = sweeps;
    out.values.resize(n);
    if (v != nullptr) out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values(k) = a(src, src);
        if (v != nullptr) out.vectors.col(k) = v->col(src);
    }
    return out;
}

}  // namespace

SymmetricEigen eig_sym(const Eigen::MatrixXd& m, const JacobiOptions& opts) {
    check_symmetric(m);
    Eigen::MatrixXd a = 0.5 * (m + m.transpose());
    const double target = opts.tolerance * opts.tolerance * a.squaredNorm();
    Eigen::MatrixXd v;
    if (opts.vectors) v = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    const int sweeps = jacobi_sweeps(a, opts.vectors ? &v : nullptr, target, opts.max_sweeps);
    return finish(a, opts.vectors ? &v : nullptr, sweeps);
}

SymmetricEigen eig_sym(const Eigen::MatrixXd& m, const Eigen::MatrixXd& basis, const JacobiOptions& opts) {
    check_symmetric(m);
    if (basis.rows() != m.rows() || basis.cols() != m.cols()) throw NotSymmetric("warm-start basis has wrong shape");
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::MatrixXd a = basis.transpose() * sym * basis;
    a = 0.5 * (a + a.transpose()).eval();
    const double target = opts.tolerance * opts.tolerance * sym.squaredNorm();
    Eigen::MatrixXd v = basis;
    const int sweeps = jacobi_sweeps(a, &v, target, opts.max_sweeps);
    return finish(a, &v, sweeps);
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return eig_sym(m, JacobiOptions{.vectors = false}).values.maxCoeff();
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return eig_sym(m, JacobiOptions{.vectors = false}).values.minCoeff();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
    using Complex = std::complex<double>;
    const Eigen::Index n = a.rows();
    if (a.cols() != n || c.rows() != n || c.cols() != n) throw Error("solve_lyapunov: shape mismatch");
    if (n == 0) return Eigen::MatrixXd();

    // A = U T U^*, so A^T = A^* = U T^* U^* and with Y = U^* P U:
    // T^* Y + Y T = U^* C U.
    Eigen::ComplexSchur<Eigen::MatrixXd> schur(a);
    if (schur.info() != Eigen::Success) throw SingularLyapunov("Schur decomposition failed");
    const Eigen::MatrixXcd& t = schur.matrixT();
    const Eigen::MatrixXcd& u = schur.matrixU();
    const Eigen::MatrixXcd rhs = u.adjoint() * c.cast<Complex>() * u;

    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Complex acc = rhs(i, j);
            for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(t(k, i)) * y(k, j);
            for (Eigen::Index k = 0; k < j; ++k) acc -= y(i, k) * t(k, j);
            const Complex pivot = std::conj(t(i, i)) + t(j, j);
            if (std::abs(pivot) <= 1e-10 * scale) {
                throw SingularLyapunov("Lyapunov equation is singular (eigenvalue pair symmetric about the imaginary axis)");
            }
            y(i, j) = acc / pivot;
        }
    }
    const Eigen::MatrixXcd p = u * y * u.adjoint();
    return p.real();
}

bool is_positive_definite(const Eigen::MatrixXd& p, double symmetry_tol) {
    if (p.rows() != p.cols()) return false;
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) return false;
    const Eigen::MatrixXd sym = 0.5 * (p + p.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    return llt.info() == Eigen::Success;
}

bool hurwitz(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd p = solve_lyapunov(a, -Eigen::MatrixXd::Identity(n, n));
    return is_positive_definite(p);
}

}  // namespace mvnet
