#include <deig/linalg.hpp>

#include <deig/errors.hpp>
#include <deig/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace deig {

namespace {

void require_symmetric(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw NonSquareError(std::string(what) + ": matrix is " +
                             std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    double scale = m.cwiseAbs().maxCoeff();
    double tol = 1e-10 * std::max(scale, 1.0);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = i + 1; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                throw NotSymmetricError(std::string(what) + ": entry (" +
                                        std::to_string(i) + "," + std::to_string(j) +
                                        ") mismatch");
            }
        }
    }
}

double off_diagonal_frobenius(const Matrix& m) {
    double s = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (i != j) s += m(i, j) * m(i, j);
        }
    }
    return std::sqrt(s);
}

}  // namespace

void canonicalize_signs(Matrix& m) {
    for (Index c = 0; c < m.cols(); ++c) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index r = 0; r < m.rows(); ++r) {
            double a = std::abs(m(r, c));
            if (a > best_abs) {  // strict: ties keep the lowest index
                best_abs = a;
                best = r;
            }
        }
        if (m(best, c) < 0.0) m.col(c) = -m.col(c);
    }
}

EigenDecomposition sym_eigendecompose(const Matrix& m) {
    require_symmetric(m, "sym_eigendecompose");
    require_finite(m, "sym_eigendecompose");

    const Index d = m.rows();
    Matrix a = (m + m.transpose()) / 2.0;
    Matrix v = Matrix::Identity(d, d);
    const double frob = std::max(a.norm(), 1e-300);
    const double target = 1e-12 * frob;

    bool converged = off_diagonal_frobenius(a) < target;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (Index p = 0; p < d - 1; ++p) {
            for (Index q = p + 1; q < d; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double app = a(p, p);
                double aqq = a(q, q);
                double tau = (aqq - app) / (2.0 * apq);
                // Smaller-magnitude root of t^2 + 2*tau*t - 1 = 0.
                double t = (tau >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;

                for (Index i = 0; i < d; ++i) {
                    double aip = a(i, p);
                    double aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (Index i = 0; i < d; ++i) {
                    double api = a(p, i);
                    double aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (Index i = 0; i < d; ++i) {
                    double vip = v(i, p);
                    double viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
        converged = off_diagonal_frobenius(a) < target;
    }
    if (!converged) {
        throw NoConvergenceError("sym_eigendecompose: 100 Jacobi sweeps exhausted");
    }

    std::vector<Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
        return a(i, i) > a(j, j);  // stable: equal values keep original index order
    });

    EigenDecomposition out;
    out.values.resize(d);
    out.vectors.resize(d, d);
    for (Index k = 0; k < d; ++k) {
        out.values(k) = a(order[static_cast<std::size_t>(k)],
                          order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
    }
    canonicalize_signs(out.vectors);
    return out;
}

Matrix gram_schmidt(const Matrix& m) {
    require_finite(m, "gram_schmidt");
    if (m.cols() > m.rows()) {
        throw RankDeficientError("gram_schmidt: more columns than rows");
    }
    Matrix q = m;
    for (Index c = 0; c < q.cols(); ++c) {
        double original = m.col(c).norm();
        // Two MGS passes against the already-built prefix.
        for (int pass = 0; pass < 2; ++pass) {
            for (Index p = 0; p < c; ++p) {
                q.col(c) -= q.col(p).dot(q.col(c)) * q.col(p);
            }
        }
        double residual = q.col(c).norm();
        if (residual < 1e-10 * std::max(original, 1e-300)) {
            throw RankDeficientError("gram_schmidt: column " + std::to_string(c) +
                                     " lies in the span of its predecessors");
        }
        q.col(c) /= residual;
    }
    return q;
}

Matrix random_orthogonal(Index d, Rng& rng) {
    Matrix g(d, d);
    for (Index c = 0; c < d; ++c) {
        for (Index r = 0; r < d; ++r) {
            g(r, c) = rng.normal();
        }
    }
    Matrix q = gram_schmidt(g);
    canonicalize_signs(q);
    return q;
}

SpdFactor::SpdFactor(const Matrix& m) {
    require_symmetric(m, "SpdFactor");
    require_finite(m, "SpdFactor");
    const Index d = m.rows();
    l_ = Matrix::Zero(d, d);
    for (Index j = 0; j < d; ++j) {
        double diag = m(j, j) - l_.row(j).head(j).squaredNorm();
        if (diag <= 1e-12) {
            throw NotPositiveDefiniteError("SpdFactor: pivot " + std::to_string(j) +
                                           " is " + std::to_string(diag));
        }
        l_(j, j) = std::sqrt(diag);
        for (Index i = j + 1; i < d; ++i) {
            double s = m(i, j) - l_.row(i).head(j).dot(l_.row(j).head(j));
            l_(i, j) = s / l_(j, j);
        }
    }
}

Vector SpdFactor::solve(const Vector& b) const {
    Vector y = l_.triangularView<Eigen::Lower>().solve(b);
    return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix SpdFactor::solve(const Matrix& b) const {
    Matrix y = l_.triangularView<Eigen::Lower>().solve(b);
    return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

double sym_spectral_norm(const Matrix& m) {
    EigenDecomposition e = sym_eigendecompose(m);
    return e.values.cwiseAbs().maxCoeff();
}

double sym_top_eigenvalue(const Matrix& m) {
    return sym_eigendecompose(m).values(0);
}

}  // namespace deig
