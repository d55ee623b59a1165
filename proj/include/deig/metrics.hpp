#pragma once

#include <deig/linalg.hpp>
#include <deig/types.hpp>

namespace deig {

// Reference eigenframe the errors are measured against: either the pooled
// empirical decomposition or the population truth.  Values descend and the
// vector columns are orthonormal, exactly as in EigenDecomposition.
using SpectrumReference = EigenDecomposition;

// Projection mass of the unit vector w on reference directions whose values
// lie at or below (1 - delta) times the top value.  Zero means w lives
// entirely in the near-top subspace; one means it missed it completely.
// The boundary comparison is a literal <= on the stored doubles.
double gapfree_error_top1(const SpectrumReference& ref, const Vector& w, double delta);

// Squared spectral norm of U_lowᵀ V where U_low stacks the reference vectors
// with values at or below (1 - delta) times the L-th value and V is an
// orthonormal basis of the estimated subspace.
double gapfree_error_topL(const SpectrumReference& ref, const Matrix& v, Index l_count,
                          double delta);

// Variance of the data along the unit direction w: wᵀ sigma_hat w.
double variance_captured(const Matrix& sigma_hat, const Vector& w);

// Predicate from the capture guarantee: a direction with gap-free error eps
// captures more than (1 - delta)(1 - eps) of the top variance.  When eps >= 1
// the bound is vacuous and only nonnegativity of the capture is required.
bool capture_bound_holds(double lambda1, double delta, double eps, double captured);

// Vector distance up to a global sign flip: min over t in {-1, +1} of
// the Euclidean norm of t*b_hat - b_true.
double sign_corrected_l2(const Vector& b_hat, const Vector& b_true);

// Mean squared in-sample prediction gap: (1/n) * squared norm of A(b_hat - b_true).
double pcr_prediction_error(const Matrix& a, const Vector& b_hat, const Vector& b_true);

}  // namespace deig
