#pragma once

#include <deig/cluster.hpp>
#include <deig/solver.hpp>
#include <deig/types.hpp>

namespace deig {

// Principal component regression coefficients restricted to a basis.
struct PcrFit {
    Vector gamma;  // length S: coefficients in the basis coordinates
    Vector beta;   // length d: basis * gamma
    Index s;       // number of basis columns used
};

// One centering round: workers report their local means, the coordinator
// broadcasts the weighted global mean back, and every worker subtracts it
// from each of its rows.  Returns the global mean.
Vector distributed_center(Cluster& cluster);

// Least squares on the projected features A_k * basis, solved from the sum
// of worker-local normal equations.  Every worker uses its original rows, so
// the fit is unaffected by deflation or centering done for the eigensolve.
PcrFit pcr_fit(Cluster& cluster, const Matrix& basis);

// Single-index direction estimate: runs the distributed top-eigenvector
// solver against the workers' second-order score matrices
// M_k = (1/m_k) sum_i y_i (a_i a_iᵀ - I).  The cluster must have been built
// with OperatorKind::stein.  Returns the unit direction estimate.
Vector sim_fit(Cluster& cluster, const SolverConfig& cfg);

}  // namespace deig
