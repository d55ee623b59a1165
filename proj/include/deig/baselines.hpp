#pragma once

#include <deig/types.hpp>

#include <vector>

namespace deig {

// Result of a one-shot PCA estimator: an orthonormal basis of the estimated
// top-L subspace plus the matching eigenvalue estimates, descending.
struct BaselineResult {
    Matrix u_hat;                 // d x L, orthonormal columns
    std::vector<double> lambdas;  // length L, descending
};

// PCA on the pooled covariance AᵀA/n: the single-machine gold standard.
BaselineResult oracle_pca(const Matrix& a_pooled, Index l_count);

// Average of the shards' rank-L local projectors: sigma_tilde =
// (1/K) sum_k U_k U_kᵀ where U_k holds the top-L eigenvectors of the k-th
// local covariance.  The average is unweighted even for unbalanced shards.
Matrix dc_aggregate(const std::vector<Matrix>& shards, Index l_count);

// Divide-and-conquer estimator: top-L eigenpairs of dc_aggregate(...).
BaselineResult dc_pca(const std::vector<Matrix>& shards, Index l_count);

}  // namespace deig
