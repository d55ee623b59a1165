#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "deig/errors.hpp"

namespace deig {

// Column-major double-precision carriers used throughout.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Boundary validation: external inputs (files, CLI, spawned shards) must be finite.
inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw Error(std::string(what) + ": non-finite entries");
}

inline void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw Error(std::string(what) + ": non-finite entries");
}

}  // namespace deig
