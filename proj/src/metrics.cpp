#include <deig/metrics.hpp>

#include <deig/errors.hpp>

#include <cmath>
#include <vector>

namespace deig {

namespace {

void require_unit(const Vector& w, const char* what) {
    if (std::abs(w.norm() - 1.0) > 1e-8) {
        throw NotUnitVectorError(std::string(what) + " must have unit norm");
    }
}

// Columns of ref.vectors whose values sit at or below the threshold.
Matrix low_columns(const SpectrumReference& ref, double threshold) {
    std::vector<Index> keep;
    for (Index l = 0; l < ref.values.size(); ++l) {
        if (ref.values(l) <= threshold) keep.push_back(l);
    }
    Matrix u(ref.vectors.rows(), static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        u.col(static_cast<Index>(i)) = ref.vectors.col(keep[i]);
    }
    return u;
}

}  // namespace

double gapfree_error_top1(const SpectrumReference& ref, const Vector& w, double delta) {
    if (ref.vectors.rows() != w.size()) {
        throw DimensionMismatchError("estimate and reference dimensions disagree");
    }
    require_unit(w, "estimated eigenvector");
    double threshold = (1.0 - delta) * ref.values(0);
    double err = 0.0;
    for (Index l = 0; l < ref.values.size(); ++l) {
        if (ref.values(l) <= threshold) {
            double overlap = ref.vectors.col(l).dot(w);
            err += overlap * overlap;
        }
    }
    return err;
}

double gapfree_error_topL(const SpectrumReference& ref, const Matrix& v, Index l_count,
                          double delta) {
    if (ref.vectors.rows() != v.rows()) {
        throw DimensionMismatchError("estimate and reference dimensions disagree");
    }
    if (l_count < 1 || l_count > ref.values.size()) {
        throw Error("subspace size out of range");
    }
    Matrix gram_v = v.transpose() * v;
    gram_v -= Matrix::Identity(v.cols(), v.cols());
    if (gram_v.cwiseAbs().maxCoeff() > 1e-8) {
        throw NotOrthonormalError("estimated basis columns are not orthonormal");
    }
    Matrix u_low = low_columns(ref, (1.0 - delta) * ref.values(l_count - 1));
    if (u_low.cols() == 0) return 0.0;
    Matrix cross = u_low.transpose() * v;
    Matrix gram = cross * cross.transpose();
    gram = (gram + gram.transpose()) / 2.0;
    double top = sym_eigendecompose(gram).values(0);
    return top < 0.0 ? 0.0 : top;
}

double variance_captured(const Matrix& sigma_hat, const Vector& w) {
    if (sigma_hat.rows() != w.size() || sigma_hat.cols() != w.size()) {
        throw DimensionMismatchError("covariance and direction dimensions disagree");
    }
    require_unit(w, "direction");
    return w.dot(sigma_hat * w);
}

bool capture_bound_holds(double lambda1, double delta, double eps, double captured) {
    if (eps >= 1.0) return captured >= 0.0;
    return captured > (1.0 - delta) * (1.0 - eps) * lambda1;
}

double sign_corrected_l2(const Vector& b_hat, const Vector& b_true) {
    if (b_hat.size() != b_true.size()) {
        throw DimensionMismatchError("vector lengths disagree");
    }
    return std::min((b_hat - b_true).norm(), (b_hat + b_true).norm());
}

double pcr_prediction_error(const Matrix& a, const Vector& b_hat, const Vector& b_true) {
    if (b_hat.size() != b_true.size() || a.cols() != b_hat.size()) {
        throw DimensionMismatchError("design and coefficient dimensions disagree");
    }
    if (a.rows() < 1) throw EmptyClusterError("prediction error needs samples");
    return (a * (b_hat - b_true)).squaredNorm() / static_cast<double>(a.rows());
}

}  // namespace deig
