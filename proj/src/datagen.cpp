#include <deig/datagen.hpp>

#include <deig/errors.hpp>
#include <deig/linalg.hpp>
#include <deig/rng.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "file format and wire format assume a little-endian host");

namespace deig {

namespace {

// Stream used for draws that must stay decoupled from the main data stream
// (regression targets). Plain seed reuse would alias the first few variates.
std::uint64_t mix_seed(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Matrix symmetric_sqrt(const Matrix& sigma) {
    EigenDecomposition e = sym_eigendecompose(sigma);
    Vector roots(e.values.size());
    for (Index i = 0; i < e.values.size(); ++i) {
        double v = e.values(i);
        if (v < -1e-10) {
            throw NotPositiveSemidefiniteError(
                "sample_gaussian: eigenvalue " + std::to_string(v));
        }
        roots(i) = std::sqrt(std::max(v, 0.0));
    }
    return e.vectors * roots.asDiagonal() * e.vectors.transpose();
}

double beta_skewness(double alpha, double beta) {
    double t = alpha + beta;
    return 2.0 * (beta - alpha) * std::sqrt(t + 1.0) /
           ((t + 2.0) * std::sqrt(alpha * beta));
}

}  // namespace

CovarianceModel make_covariance(const CovarianceSpec& spec) {
    if (spec.top_count < 1 || spec.d < spec.top_count) {
        throw Error("make_covariance: need d >= top_count >= 1");
    }
    if (spec.delta < 0.0) {
        throw Error("make_covariance: delta must be >= 0");
    }
    CovarianceModel model;
    model.lambda = Vector::Ones(spec.d);
    for (Index k = 0; k < spec.top_count; ++k) {
        model.lambda(k) = 1.0 + static_cast<double>(spec.top_count - k) * spec.delta;
    }
    Rng rng(spec.seed);
    model.u = random_orthogonal(spec.d, rng);
    model.sigma = model.u * model.lambda.asDiagonal() * model.u.transpose();
    model.sigma = (model.sigma + model.sigma.transpose()) / 2.0;
    return model;
}

Dataset sample_gaussian(Index n, const Matrix& sigma, std::uint64_t seed) {
    const Index d = sigma.rows();
    Matrix root = symmetric_sqrt(sigma);
    Dataset out;
    out.a.resize(n, d);
    Rng rng(seed);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) {
            out.a(i, j) = rng.normal();
        }
    }
    out.a = out.a * root;  // rows become sigma^{1/2} z
    out.truth.sigma = sigma;
    return out;
}

std::pair<double, double> beta_shapes_for_skewness(double skewness) {
    const double target = std::abs(skewness);
    if (target < 1e-12) return {2.0, 2.0};
    for (double t = 1.0; t <= 1024.0; t *= 2.0) {
        // For fixed t = alpha + beta the skewness of Beta(alpha, t - alpha)
        // decreases monotonically from +inf to 0 as alpha runs over (0, t/2].
        double lo = t * 1e-12;
        double hi = t / 2.0;
        if (beta_skewness(lo, t - lo) < target) continue;
        for (int it = 0; it < 200; ++it) {
            double mid = (lo + hi) / 2.0;
            if (beta_skewness(mid, t - mid) > target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        double alpha = (lo + hi) / 2.0;
        if (std::min(alpha, t - alpha) >= 0.02) {
            return skewness > 0.0 ? std::make_pair(alpha, t - alpha)
                                  : std::make_pair(t - alpha, alpha);
        }
    }
    throw UnattainableSkewnessError("no beta shape attains skewness " +
                                    std::to_string(skewness));
}

Dataset sample_skewed(Index n, const Vector& lambda, double skewness,
                      std::uint64_t seed) {
    for (Index j = 0; j < lambda.size(); ++j) {
        if (lambda(j) < 0.0) {
            throw NotPositiveSemidefiniteError("sample_skewed: negative variance");
        }
    }
    auto [alpha, beta] = beta_shapes_for_skewness(skewness);
    const double t = alpha + beta;
    const double mean = alpha / t;
    const double sd = std::sqrt(alpha * beta / (t * t * (t + 1.0)));
    const Index d = lambda.size();
    Dataset out;
    out.a.resize(n, d);
    Rng rng(seed);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) {
            double x = rng.beta(alpha, beta);
            out.a(i, j) = (x - mean) / sd * std::sqrt(lambda(j));
        }
    }
    out.truth.sigma = lambda.asDiagonal();
    out.truth.u = Matrix::Identity(d, d);
    out.truth.lambda = lambda;
    return out;
}

Dataset make_pcr_instance(const CovarianceModel& model, Index n, double sigma2,
                          std::uint64_t seed,
                          std::optional<std::uint64_t> gamma_seed) {
    const Index top = 3;
    if (model.u.cols() < top) {
        throw Error("make_pcr_instance: need at least 3 eigenvector columns");
    }
    Rng grng(mix_seed(gamma_seed.value_or(seed)));
    Vector gamma(top);
    for (Index i = 0; i < top; ++i) gamma(i) = grng.normal();
    Vector beta = model.u.leftCols(top) * (gamma / gamma.norm());

    Dataset out = sample_gaussian(n, model.sigma, seed);
    Rng nrng(mix_seed(seed + 1));
    out.y = out.a * beta;
    const double sd = std::sqrt(sigma2);
    for (Index i = 0; i < n; ++i) {
        out.y(i) += sd * nrng.normal();
    }
    out.truth.sigma = model.sigma;
    out.truth.u = model.u;
    out.truth.lambda = model.lambda;
    out.truth.beta = beta;
    out.truth.gamma = gamma;
    return out;
}

double sim_link(SimLink link, double u) {
    switch (link) {
        case SimLink::square: return u * u;
        case SimLink::abs_value: return std::abs(u);
        case SimLink::mix: return 4.0 * u * u + 3.0 * std::cos(u);
    }
    throw Error("sim_link: unknown link");
}

Dataset make_sim_instance(Index d, Index n, SimLink link, double sigma2,
                          std::uint64_t seed) {
    Rng brng(mix_seed(seed));
    Vector beta(d);
    for (Index i = 0; i < d; ++i) beta(i) = brng.normal();
    beta /= beta.norm();

    Dataset out;
    out.a.resize(n, d);
    out.y.resize(n);
    Rng rng(seed);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) {
            out.a(i, j) = rng.normal();
        }
    }
    const double sd = std::sqrt(sigma2);
    for (Index i = 0; i < n; ++i) {
        out.y(i) = sim_link(link, out.a.row(i).dot(beta)) + sd * rng.normal();
    }
    out.truth.sigma = Matrix::Identity(d, d);
    out.truth.u = Matrix::Identity(d, d);
    out.truth.lambda = Vector::Ones(d);
    out.truth.beta = beta;
    return out;
}

namespace {

std::vector<Index> permuted_indices(Index n, std::uint64_t seed) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(seed);
    for (Index i = n - 1; i > 0; --i) {
        auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

void check_sizes(Index n, const std::vector<Index>& sizes) {
    Index total = 0;
    for (Index s : sizes) {
        if (s < 0) throw SizeMismatchError("shard: negative size");
        total += s;
    }
    if (total != n) {
        throw SizeMismatchError("shard: sizes sum to " + std::to_string(total) +
                                ", have " + std::to_string(n) + " rows");
    }
}

}  // namespace

std::vector<Matrix> shard(const Matrix& a, const std::vector<Index>& sizes,
                          std::uint64_t seed) {
    check_sizes(a.rows(), sizes);
    auto perm = permuted_indices(a.rows(), seed);
    std::vector<Matrix> out;
    out.reserve(sizes.size());
    std::size_t next = 0;
    for (Index s : sizes) {
        Matrix block(s, a.cols());
        for (Index r = 0; r < s; ++r) {
            block.row(r) = a.row(perm[next++]);
        }
        out.push_back(std::move(block));
    }
    return out;
}

Shards shard(const Dataset& data, const std::vector<Index>& sizes,
             std::uint64_t seed) {
    check_sizes(data.a.rows(), sizes);
    auto perm = permuted_indices(data.a.rows(), seed);
    Shards out;
    out.a.reserve(sizes.size());
    const bool has_y = data.y.size() == data.a.rows();
    if (has_y) out.y.reserve(sizes.size());
    std::size_t next = 0;
    for (Index s : sizes) {
        Matrix block(s, data.a.cols());
        Vector yblock(has_y ? s : 0);
        for (Index r = 0; r < s; ++r) {
            block.row(r) = data.a.row(perm[next]);
            if (has_y) yblock(r) = data.y(perm[next]);
            ++next;
        }
        out.a.push_back(std::move(block));
        if (has_y) out.y.push_back(std::move(yblock));
    }
    return out;
}

std::vector<Index> balanced_sizes(Index n, Index k) {
    if (k < 1) throw SizeMismatchError("balanced_sizes: k must be >= 1");
    std::vector<Index> sizes(static_cast<std::size_t>(k), n / k);
    for (Index i = 0; i < n % k; ++i) {
        ++sizes[static_cast<std::size_t>(i)];
    }
    return sizes;
}

namespace {

constexpr char kMagic[4] = {'D', 'E', 'I', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& s, const T& v) {
    s.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& s, T& v) {
    s.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace

void save_matrix(const std::string& path, const Matrix& m) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(kMagic, 4);
    write_pod(f, kVersion);
    write_pod(f, static_cast<std::uint64_t>(m.rows()));
    write_pod(f, static_cast<std::uint64_t>(m.cols()));
    f.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double)) * m.size());
    if (!f) throw IoError("short write to " + path);
}

Matrix load_matrix(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError(path + ": bad magic");
    }
    std::uint32_t version;
    std::uint64_t rows, cols;
    read_pod(f, version);
    read_pod(f, rows);
    read_pod(f, cols);
    if (!f || version != kVersion) throw IoError(path + ": unsupported version");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    f.read(reinterpret_cast<char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double)) * m.size());
    if (!f) throw IoError(path + ": truncated payload");
    return m;
}

namespace {

void write_truth_vector(std::ostream& s, const char* key, const Vector& v) {
    if (v.size() == 0) return;
    s << key << " =";
    char buf[32];
    for (Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), " %.17g", v(i));
        s << buf;
    }
    s << "\n";
}

Vector parse_truth_vector(const std::string& rest) {
    std::istringstream is(rest);
    std::vector<double> vals;
    double x;
    while (is >> x) vals.push_back(x);
    Vector v(static_cast<Index>(vals.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = vals[static_cast<std::size_t>(i)];
    return v;
}

}  // namespace

void save_dataset(const std::string& path, const Dataset& data) {
    save_matrix(path, data.a);
    if (data.y.size() > 0) {
        save_matrix(path + ".y", data.y);
    }
    if (data.truth.lambda.size() > 0 || data.truth.beta.size() > 0) {
        std::ofstream f(path + ".truth", std::ios::trunc);
        if (!f) throw IoError("cannot open " + path + ".truth for writing");
        write_truth_vector(f, "lambda", data.truth.lambda);
        write_truth_vector(f, "beta", data.truth.beta);
        write_truth_vector(f, "gamma", data.truth.gamma);
    }
}

Dataset load_dataset(const std::string& path) {
    Dataset out;
    out.a = load_matrix(path);
    if (std::ifstream(path + ".y").good()) {
        Matrix y = load_matrix(path + ".y");
        out.y = y.col(0);
    }
    std::ifstream truth(path + ".truth");
    if (truth.good()) {
        std::string line;
        while (std::getline(truth, line)) {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(0, eq);
            key.erase(key.find_last_not_of(' ') + 1);
            std::string rest = line.substr(eq + 1);
            if (key == "lambda") out.truth.lambda = parse_truth_vector(rest);
            if (key == "beta") out.truth.beta = parse_truth_vector(rest);
            if (key == "gamma") out.truth.gamma = parse_truth_vector(rest);
        }
    }
    return out;
}

}  // namespace deig
