#pragma once

#include <deig/types.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deig {

// Population covariance request: top_count boosted eigenvalues above a flat
// tail of ones, relative gap delta between consecutive boosted values.
struct CovarianceSpec {
    Index d = 0;
    double delta = 1.0;
    Index top_count = 3;
    std::uint64_t seed = 0;
};

struct CovarianceModel {
    Matrix sigma;   // d x d, symmetric
    Matrix u;       // eigenvectors, columns descending by eigenvalue
    Vector lambda;  // eigenvalues descending
};

// Ground truth carried alongside generated samples; members are empty when
// they do not apply to the generator that produced the dataset.
struct Truth {
    Matrix sigma;
    Matrix u;
    Vector lambda;
    Vector beta;   // regression target (applications)
    Vector gamma;  // coefficients of beta in the top eigenbasis
};

struct Dataset {
    Matrix a;  // n x d, one sample per row
    Vector y;  // responses; empty when the dataset has none
    Truth truth;
};

enum class SimLink { square, abs_value, mix };

// lambda_k = 1 + (top_count - k + 1) * delta for the boosted values, 1 after;
// sigma = u * diag(lambda) * u^T with u drawn via random_orthogonal(seed).
CovarianceModel make_covariance(const CovarianceSpec& spec);

// n i.i.d. rows sigma^{1/2} z with z standard normal; the square root comes
// from an eigendecomposition so PSD-but-singular sigma is accepted. Throws
// NotPositiveSemidefiniteError when an eigenvalue is below -1e-10.
Dataset sample_gaussian(Index n, const Matrix& sigma, std::uint64_t seed);

// Independent coordinates: coordinate j is an affinely transformed beta
// variate with mean 0, variance lambda(j), and the requested skewness. The
// population covariance is diag(lambda); no rotation is applied.
Dataset sample_skewed(Index n, const Vector& lambda, double skewness,
                      std::uint64_t seed);

// Beta shape parameters (alpha, beta) whose standardized variate attains the
// requested skewness, with both shapes kept >= 0.02 by growing alpha+beta.
// Throws UnattainableSkewnessError when no such pair exists.
std::pair<double, double> beta_shapes_for_skewness(double skewness);

// Gaussian design from the model's covariance plus a linear response through
// the top-top_count eigenbasis: beta = U_top gamma / |gamma|, y = A beta + eps
// with eps ~ N(0, sigma2 I). gamma is drawn from gamma_seed (default: seed) so
// callers can hold the target fixed while varying the data draw.
Dataset make_pcr_instance(const CovarianceModel& model, Index n, double sigma2,
                          std::uint64_t seed,
                          std::optional<std::uint64_t> gamma_seed = std::nullopt);

double sim_link(SimLink link, double u);

// Isotropic Gaussian design, y_i = f(<beta, a_i>) + eps_i for the chosen link;
// beta is a normalized standard-normal draw fixed by the seed.
Dataset make_sim_instance(Index d, Index n, SimLink link, double sigma2,
                          std::uint64_t seed);

// Seeded Fisher-Yates row permutation followed by a contiguous partition into
// the given sizes. Throws SizeMismatchError unless the sizes sum to n.
std::vector<Matrix> shard(const Matrix& a, const std::vector<Index>& sizes,
                          std::uint64_t seed);

struct Shards {
    std::vector<Matrix> a;
    std::vector<Vector> y;  // empty when the dataset carries no responses
};

// Same permutation applied to rows and responses together.
Shards shard(const Dataset& data, const std::vector<Index>& sizes,
             std::uint64_t seed);

// n split as evenly as possible into k parts (first parts get the remainder).
std::vector<Index> balanced_sizes(Index n, Index k);

// Flat binary matrix file: magic "DEIG", version u32, rows u64, cols u64,
// then the column-major f64 payload, all little-endian. save_dataset also
// writes <path>.y for responses and a <path>.truth text sidecar when truth is
// present; load_dataset picks both up if they exist.
void save_matrix(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path);
void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);

}  // namespace deig
