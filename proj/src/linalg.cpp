#include "gffperc/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "gffperc/error.hpp"
#include "gffperc/rng.hpp"

namespace gffperc::linalg {

namespace {

void run_dsyevd(char jobz, Eigen::MatrixXd& a, Eigen::VectorXd& w) {
    const auto n = static_cast<lapack_int>(a.rows());
    w.resize(n);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, jobz, 'L', n, a.data(), n, w.data());
    if (info != 0) throw Error(ErrorCode::SolverFailure, "dsyevd failed with info=" + std::to_string(info));
}

// Some OpenBLAS builds pick kernels the host cannot run correctly and return
// garbage without an error code, so every LAPACK result is checked with cheap
// identities computed by Eigen alone: sum w = tr A, sum w^2 = |A|_F^2, and
// for vectors, residual and orthonormality of a spread of columns.
bool plausible(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd* v) {
    const Eigen::Index n = a.rows();
    const double fro = a.norm();
    const double tol = 1e-10 * (fro + 1.0) * std::sqrt(static_cast<double>(n));
    if (!w.allFinite()) return false;
    if (std::abs(w.sum() - a.trace()) > tol) return false;
    if (std::abs(w.squaredNorm() - fro * fro) > tol * (fro + 1.0)) return false;
    for (Eigen::Index i = 1; i < n; ++i)
        if (w[i] < w[i - 1]) return false;
    if (v == nullptr) return true;
    const Eigen::Index stride = std::max<Eigen::Index>(1, n / 16);
    for (Eigen::Index k = 0; k < n; k += stride) {
        const Eigen::VectorXd col = v->col(k);
        if (std::abs(col.norm() - 1.0) > 1e-10) return false;
        if ((a * col - w[k] * col).norm() > tol) return false;
        if (k > 0 && std::abs(col.dot(v->col(k - 1))) > 1e-10) return false;
    }
    return true;
}

}  // namespace

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a) {
    Eigen::MatrixXd work = a;
    Eigen::VectorXd w;
    run_dsyevd('N', work, w);
    if (plausible(a, w, nullptr)) return w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "dense eigensolve failed");
    return es.eigenvalues();
}

void symmetric_eigen(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    vectors = a;
    run_dsyevd('V', vectors, values);
    if (plausible(a, values, &vectors)) return;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "dense eigensolve failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
}

EigenPair smallest_nonzero_eigenpair(const Eigen::SparseMatrix<double>& lap,
                                     const Eigen::VectorXd& b_diag,
                                     double tol,
                                     int max_iter) {
    const Eigen::Index n = lap.rows();
    if (n < 2) throw Error(ErrorCode::PreconditionError, "eigenproblem needs n >= 2");
    const double shift = 1e-6;

    Eigen::SparseMatrix<double> shifted = lap;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * b_diag[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "sparse LDL^T factorization failed");

    auto dot_b = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x.dot(b_diag.cwiseProduct(y)); };
    const Eigen::VectorXd kernel = Eigen::VectorXd::Ones(n) / std::sqrt(b_diag.sum());
    auto deflate = [&](Eigen::VectorXd& x) { x -= kernel * dot_b(kernel, x); };

    const int steps = static_cast<int>(std::min<Eigen::Index>(max_iter, n - 1));
    Eigen::MatrixXd basis(n, steps + 1);
    std::vector<double> alpha, beta;

    Rng rng = make_rng(0x5eed);
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i) q[i] = uniform01(rng) - 0.5;
    deflate(q);
    q /= std::sqrt(dot_b(q, q));
    basis.col(0) = q;

    EigenPair result;
    Eigen::VectorXd ritz_coeffs;
    double theta = 1.0;
    int k = 0;
    for (; k < steps; ++k) {
        Eigen::VectorXd w = ldlt.solve(b_diag.cwiseProduct(basis.col(k)));
        deflate(w);
        const double a = dot_b(basis.col(k), w);
        alpha.push_back(a);
        // Full reorthogonalization, applied twice.
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd coeffs = basis.leftCols(k + 1).transpose() * b_diag.cwiseProduct(w);
            w -= basis.leftCols(k + 1) * coeffs;
            deflate(w);
        }
        const double b = std::sqrt(std::max(dot_b(w, w), 0.0));

        const int m = k + 1;
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tri(i, i) = alpha[i];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        theta = es.eigenvalues()[m - 1];
        ritz_coeffs = es.eigenvectors().col(m - 1);
        const double estimate = b * std::abs(ritz_coeffs[m - 1]);
        result.iterations = m;
        if (estimate <= tol * std::abs(theta) || b <= 1e-14 * std::abs(theta) || m == steps) {
            result.converged = estimate <= tol * std::abs(theta) || b <= 1e-14 * std::abs(theta);
            break;
        }
        beta.push_back(b);
        basis.col(k + 1) = w / b;
    }

    Eigen::VectorXd psi = basis.leftCols(result.iterations) * ritz_coeffs;
    psi /= std::sqrt(dot_b(psi, psi));
    // Rayleigh quotient instead of 1/theta - shift: error is quadratic in the vector error.
    result.value = psi.dot(lap * psi) / dot_b(psi, psi);
    result.vector = psi;
    result.residual = (lap * psi - result.value * b_diag.cwiseProduct(psi)).norm();
    return result;
}

Eigen::VectorXd solve_refined(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double& rel_residual) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::VectorXd x = lu.solve(b);
    for (int round = 0; round < 3; ++round) {
        Eigen::VectorXd r = b - a * x;
        x += lu.solve(r);
    }
    const double scale = a.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();
    rel_residual = (b - a * x).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
    return x;
}

Eigen::MatrixXd solve_refined(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double& rel_residual) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    Eigen::MatrixXd x = lu.solve(b);
    for (int round = 0; round < 3; ++round) {
        Eigen::MatrixXd r = b - a * x;
        x += lu.solve(r);
    }
    const double scale = a.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff();
    rel_residual = (b - a * x).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
    return x;
}

}  // namespace gffperc::linalg
