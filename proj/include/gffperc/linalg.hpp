#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gffperc::linalg {

// Dense symmetric eigensolve, eigenvalues ascending. LAPACK dsyevd, falling
// back to Eigen when the LAPACK result fails a consistency check.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a);
void symmetric_eigen(const Eigen::MatrixXd& a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors);

struct EigenPair {
    double value = 0.0;
    Eigen::VectorXd vector;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Smallest eigenvalue of L x = lambda B x on the B-orthogonal complement of
// the constant vector, where L is a connected-graph Laplacian and B a positive
// diagonal. Shift-invert Lanczos with full reorthogonalization in the B inner
// product; the operator is (L + shift B)^{-1} B with a sparse LDL^T factor.
EigenPair smallest_nonzero_eigenpair(const Eigen::SparseMatrix<double>& lap,
                                     const Eigen::VectorXd& b_diag,
                                     double tol = 1e-11,
                                     int max_iter = 400);

// Solves the (possibly indefinite) square system with LU and a few rounds of
// iterative refinement. Returns the final relative residual through `rel_residual`.
Eigen::VectorXd solve_refined(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double& rel_residual);
Eigen::MatrixXd solve_refined(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double& rel_residual);

}  // namespace gffperc::linalg
