#include <deig/baselines.hpp>

#include <deig/errors.hpp>
#include <deig/linalg.hpp>

namespace deig {

namespace {

BaselineResult truncate(const EigenDecomposition& eig, Index l_count) {
    BaselineResult result;
    result.u_hat = eig.vectors.leftCols(l_count);
    result.lambdas.assign(eig.values.data(), eig.values.data() + l_count);
    return result;
}

void check_l(Index l_count, Index d) {
    if (l_count < 1 || l_count > d) {
        throw Error("subspace dimension must lie in [1, d], got " +
                    std::to_string(l_count));
    }
}

}  // namespace

BaselineResult oracle_pca(const Matrix& a_pooled, Index l_count) {
    if (a_pooled.rows() < 1) {
        throw EmptyClusterError("oracle_pca needs at least one sample");
    }
    check_l(l_count, a_pooled.cols());
    require_finite(a_pooled, "pooled sample matrix");
    Matrix cov = a_pooled.transpose() * a_pooled / static_cast<double>(a_pooled.rows());
    cov = (cov + cov.transpose()) / 2.0;
    return truncate(sym_eigendecompose(cov), l_count);
}

Matrix dc_aggregate(const std::vector<Matrix>& shards, Index l_count) {
    if (shards.empty()) {
        throw EmptyClusterError("dc_pca needs at least one shard");
    }
    Index d = shards[0].cols();
    check_l(l_count, d);
    Matrix sum = Matrix::Zero(d, d);
    for (const Matrix& a : shards) {
        if (a.rows() < 1) {
            throw EmptyClusterError("dc_pca shard has no samples");
        }
        if (a.cols() != d) {
            throw SizeMismatchError("dc_pca shards disagree on dimension");
        }
        require_finite(a, "shard");
        Matrix cov = a.transpose() * a / static_cast<double>(a.rows());
        cov = (cov + cov.transpose()) / 2.0;
        Matrix u = sym_eigendecompose(cov).vectors.leftCols(l_count);
        sum += u * u.transpose();
    }
    sum /= static_cast<double>(shards.size());
    return (sum + sum.transpose()) / 2.0;
}

BaselineResult dc_pca(const std::vector<Matrix>& shards, Index l_count) {
    return truncate(sym_eigendecompose(dc_aggregate(shards, l_count)), l_count);
}

}  // namespace deig
