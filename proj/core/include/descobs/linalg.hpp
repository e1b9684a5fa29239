#pragma once

#include "descobs/types.hpp"

namespace descobs {

// ---------------------------------------------------------------------------
// Rank-revealing SVD
// ---------------------------------------------------------------------------

struct RankedFactorization {
    Matrix left;             // orthogonal, rows x rows
    Matrix right;            // orthogonal, cols x cols
    Vector singular_values;  // nonincreasing, nonnegative
    Index numerical_rank = 0;
};

// Full SVD of m with the rank decision rank = #{sigma_k > tol * sigma_max}.
RankedFactorization ranked_svd(const Matrix& m, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Spectral splitting (zero cluster vs. rest)
// ---------------------------------------------------------------------------

struct SpectralSplit {
    Matrix transform;         // invertible; transform^-1 M transform = diag(blocks)
    Matrix block_invertible;  // no eigenvalue near zero
    Matrix block_nilpotent;   // every eigenvalue within tol*||M|| of zero
};

// Ordered real Schur decomposition with eigenvalue clustering followed by a
// Sylvester block-diagonalization. Eigenvalues with |lambda| <= tol*||M|| land
// in the nilpotent block; an eigenvalue falling in the ambiguity band
// (tol*||M||, 10*tol*||M||) raises IllConditionedSplitError.
SpectralSplit split_zero_cluster(const Matrix& m, double tol = kDefaultTol);

struct NilpotencyTest {
    bool nilpotent = false;
    Index index = 0;  // smallest k with ||M^k|| ~ 0, valid when nilpotent
};

NilpotencyTest is_nilpotent(const Matrix& m, double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Matrix equations
// ---------------------------------------------------------------------------

// Solves A X + X B = Q. Requires spec(A) and spec(-B) disjoint.
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& q);

// Solves W A_cl + A_cl^T W = -Q_rhs for symmetric positive definite W.
// Requires A_cl Hurwitz and Q_rhs symmetric positive definite.
Matrix solve_lyapunov_standard(const Matrix& a_cl, const Matrix& q_rhs);

// Solves E^T X A + A^T X E = -E^T Y E for symmetric positive definite X.
// Requires the pair (E, A) admissible and Y symmetric positive definite.
Matrix solve_lyapunov_descriptor(const Matrix& e, const Matrix& a, const Matrix& y,
                                 double tol = kDefaultTol);

// ---------------------------------------------------------------------------
// Pencil spectra
// ---------------------------------------------------------------------------

// All finite generalized eigenvalues lambda with det(lambda E - A) = 0, each
// with multiplicity; infinite eigenvalues are excluded. Raises
// DegeneratePencilError when the pencil looks singular.
ComplexVector pencil_finite_eigenvalues(const Matrix& e, const Matrix& a,
                                        double tol = kDefaultTol);

// Eigenvalues of a square matrix (convenience wrapper).
ComplexVector dense_eigenvalues(const Matrix& m);

// sigma_min(m) > tol * max(scale, sigma_max(m)): invertibility judged at the
// scale of the parent problem, not of the block itself.
bool invertible_at_scale(const Matrix& m, double scale, double tol = kDefaultTol);

// max Re(lambda) over dense eigenvalues; -inf for empty.
double spectral_abscissa(const Matrix& m);

}  // namespace descobs
