#include <deig/apps.hpp>

#include <deig/errors.hpp>
#include <deig/linalg.hpp>

namespace deig {

Vector distributed_center(Cluster& cluster) { return cluster.center(); }

PcrFit pcr_fit(Cluster& cluster, const Matrix& basis) {
    if (basis.rows() != cluster.dim()) {
        throw DimensionMismatchError("basis rows must match the data dimension");
    }
    Matrix gram = basis.transpose() * basis;
    gram -= Matrix::Identity(basis.cols(), basis.cols());
    if (gram.cwiseAbs().maxCoeff() > 1e-8) {
        throw NotOrthonormalError("regression basis columns are not orthonormal");
    }
    auto [normal, rhs] = cluster.pcr_normal_equations(basis);
    PcrFit fit;
    try {
        fit.gamma = SpdFactor(normal).solve(rhs);
    } catch (const NotPositiveDefiniteError&) {
        throw SingularNormalEquationsError(
            "projected normal equations are singular (pivot <= 1e-12)");
    }
    fit.beta = basis * fit.gamma;
    fit.s = basis.cols();
    return fit;
}

Vector sim_fit(Cluster& cluster, const SolverConfig& cfg) {
    return top_eigenvector(cluster, cfg).w;
}

}  // namespace deig
