#pragma once

#include <deig/types.hpp>

namespace deig {

class Rng;

// Eigenvalues descending; eigenvectors are the matching columns, each with its
// largest-magnitude entry made positive.
struct EigenDecomposition {
    Vector values;
    Matrix vectors;
};

// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Converges when the off-diagonal Frobenius mass drops below 1e-12 times the
// Frobenius norm of the input; throws NoConvergenceError after 100 sweeps.
// Throws NonSquareError / NotSymmetricError on malformed input (symmetry is
// checked entrywise against 1e-10 times the max absolute entry).
EigenDecomposition sym_eigendecompose(const Matrix& m);

// Canonical sign: flip each column so its largest-|entry| coordinate is
// positive, breaking magnitude ties toward the lowest index.
void canonicalize_signs(Matrix& m);

// Modified Gram-Schmidt with one re-orthogonalization pass. Throws
// RankDeficientError if any column's residual norm falls below 1e-10 times its
// original norm.
Matrix gram_schmidt(const Matrix& m);

// Haar-ish random orthogonal matrix: i.i.d. standard normal entries pushed
// through gram_schmidt, then sign-canonicalized.
Matrix random_orthogonal(Index d, Rng& rng);

// Cholesky factor of a symmetric positive definite matrix. Throws
// NotPositiveDefiniteError when any pivot is <= 1e-12.
class SpdFactor {
public:
    explicit SpdFactor(const Matrix& m);

    Vector solve(const Vector& b) const;
    Matrix solve(const Matrix& b) const;

    const Matrix& lower() const { return l_; }

private:
    Matrix l_;  // lower triangular, m = l_ * l_^T
};

// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double sym_spectral_norm(const Matrix& m);

// Largest eigenvalue of a symmetric matrix (signed).
double sym_top_eigenvalue(const Matrix& m);

}  // namespace deig
