#include <deig/cluster.hpp>

#include <deig/errors.hpp>

#include <cmath>
#include <deque>

namespace deig {

Worker::Worker(Index index, Matrix rows, Vector y, OperatorKind op)
    : index_(index), rows_(std::move(rows)), work_(rows_), y_(std::move(y)), op_(op) {
    if (rows_.rows() == 0) {
        throw EmptyClusterError("worker " + std::to_string(index_) + " has no samples");
    }
    if (op_ == OperatorKind::stein && y_.size() != rows_.rows()) {
        throw SizeMismatchError("stein operator needs one response per sample");
    }
    panel_.resize(dim(), 0);
}

Vector Worker::apply_shifted(const Vector& w) const {
    const double m = static_cast<double>(sample_count());
    if (op_ == OperatorKind::covariance) {
        return shift_ * w - work_.transpose() * (work_ * w) / m;
    }
    // Stein: Op w = (A^T (y . (A w)) - sum(y) w) / m, using the same rows.
    Vector aw = work_ * w;
    return shift_ * w - (work_.transpose() * y_.cwiseProduct(aw).eval() - y_.sum() * w) / m;
}

Matrix Worker::local_operator() const {
    const double m = static_cast<double>(sample_count());
    if (op_ == OperatorKind::covariance) {
        Matrix s = work_.transpose() * work_ / m;
        return (s + s.transpose()) / 2.0;
    }
    Matrix s = work_.transpose() * y_.asDiagonal() * work_ / m;
    s -= (y_.sum() / m) * Matrix::Identity(dim(), dim());
    return (s + s.transpose()) / 2.0;
}

std::vector<Message> Worker::handle(const Message& msg) {
    const auto weight = static_cast<std::uint64_t>(sample_count());
    const double m = static_cast<double>(sample_count());
    switch (msg.kind) {
        case Kind::shift: {
            shift_ = msg.scalar();
            have_shift_ = true;
            if (index_ == 0) {
                Matrix h = shift_ * Matrix::Identity(dim(), dim()) - local_operator();
                hessian_.emplace(h);  // throws NotPositiveDefiniteError if shift is low
            }
            return {};
        }
        case Kind::anchor:
            anchor_ = msg.payload;
            return {};
        case Kind::iterate: {
            if (!have_shift_ || anchor_.size() != dim()) {
                throw Error("worker: iterate before shift/anchor");
            }
            return {Message::reply(Kind::gradient, weight,
                                   apply_shifted(msg.payload) - anchor_)};
        }
        case Kind::newton_rhs: {
            if (!hessian_) {
                throw Error("worker: newton solve without a factorized Hessian");
            }
            return {Message::reply(Kind::newton_solution, weight,
                                   hessian_->solve(msg.payload))};
        }
        case Kind::deflation_vector: {
            const Vector& v = msg.payload;
            work_ -= (work_ * v) * v.transpose();
            panel_.conservativeResize(Eigen::NoChange, panel_.cols() + 1);
            panel_.col(panel_.cols() - 1) = v;
            return {};
        }
        case Kind::mean: {
            rows_.rowwise() -= msg.payload.transpose();
            work_.rowwise() -= msg.payload.transpose();
            return {};
        }
        case Kind::rayleigh_query: {
            const Vector& w = msg.payload;
            double value;
            if (op_ == OperatorKind::covariance) {
                value = (work_ * w).squaredNorm() / m;
            } else {
                Vector aw = work_ * w;
                value = (y_.dot(aw.cwiseProduct(aw)) - y_.sum() * w.squaredNorm()) / m;
            }
            return {Message::reply(Kind::rayleigh_value, weight, value)};
        }
        case Kind::pcr_basis: {
            if (msg.payload.size() % dim() != 0) {
                throw SizeMismatchError("pcr basis payload is not a d x S matrix");
            }
            const Index s = msg.payload.size() / dim();
            basis_ = Eigen::Map<const Matrix>(msg.payload.data(), dim(), s);
            Matrix projected = rows_ * basis_;  // pristine rows by design
            Matrix normal = projected.transpose() * projected;
            Vector moment = projected.transpose() * y_;
            Vector flat(s * s + s);
            flat.head(s * s) = Eigen::Map<const Vector>(normal.data(), s * s);
            flat.tail(s) = moment;
            return {Message::reply(Kind::pcr_normal, weight, std::move(flat))};
        }
        case Kind::covariance_query: {
            Matrix op = local_operator();
            Vector flat = Eigen::Map<const Vector>(op.data(), dim() * dim());
            return {Message::reply(Kind::covariance_matrix, weight, std::move(flat))};
        }
        case Kind::query_local_eigenpair: {
            EigenDecomposition e = sym_eigendecompose(local_operator());
            return {Message::reply(Kind::local_eigval, weight, e.values(0)),
                    Message::reply(Kind::local_eigvec, weight, e.vectors.col(0))};
        }
        case Kind::query_local_top_eigenvalue: {
            EigenDecomposition e = sym_eigendecompose(local_operator());
            return {Message::reply(Kind::local_eigval, weight, e.values(0))};
        }
        case Kind::query_mean_vector: {
            Vector mean = rows_.colwise().mean();
            return {Message::reply(Kind::mean_vector, weight, std::move(mean))};
        }
        case Kind::begin_eigenvector:
        case Kind::end_session:
        case Kind::hello:
            return {};
        default:
            throw Error("worker: unexpected message kind " +
                        std::to_string(static_cast<unsigned>(msg.kind)));
    }
}

std::vector<Worker> spawn_workers(std::vector<Matrix> shards,
                                  std::vector<Vector> ys, OperatorKind op) {
    if (shards.empty()) {
        throw EmptyClusterError("need at least one shard");
    }
    if (!ys.empty() && ys.size() != shards.size()) {
        throw SizeMismatchError("response list does not match shard list");
    }
    const Index d = shards.front().cols();
    for (std::size_t k = 0; k < shards.size(); ++k) {
        if (shards[k].cols() != d) {
            throw SizeMismatchError("shard " + std::to_string(k) +
                                    " has a different column count");
        }
        if (!ys.empty() && ys[k].size() != shards[k].rows()) {
            throw SizeMismatchError("shard " + std::to_string(k) +
                                    " responses do not match its rows");
        }
    }
    std::vector<Worker> workers;
    workers.reserve(shards.size());
    for (std::size_t k = 0; k < shards.size(); ++k) {
        workers.emplace_back(static_cast<Index>(k), std::move(shards[k]),
                             ys.empty() ? Vector() : std::move(ys[k]), op);
    }
    return workers;
}

namespace {

class MemoryTransport final : public Transport {
public:
    explicit MemoryTransport(std::vector<Worker> workers)
        : workers_(std::move(workers)), inbox_(workers_.size()) {}

    void send(Index k, const Message& m) override {
        auto replies = workers_[static_cast<std::size_t>(k)].handle(m);
        for (auto& r : replies) {
            inbox_[static_cast<std::size_t>(k)].push_back(std::move(r));
        }
    }

    Message receive(Index k) override {
        auto& q = inbox_[static_cast<std::size_t>(k)];
        if (q.empty()) {
            throw WorkerUnreachableError("worker " + std::to_string(k) +
                                         " has no pending reply");
        }
        Message m = std::move(q.front());
        q.pop_front();
        return m;
    }

    Index worker_count() const override {
        return static_cast<Index>(workers_.size());
    }
    Index dim() const override { return workers_.front().dim(); }
    Index samples_on(Index k) const override {
        return workers_[static_cast<std::size_t>(k)].sample_count();
    }

    const std::vector<Worker>* workers() const override { return &workers_; }

private:
    std::vector<Worker> workers_;
    std::vector<std::deque<Message>> inbox_;
};

}  // namespace

std::unique_ptr<Transport> make_memory_transport(std::vector<Matrix> shards,
                                                 std::vector<Vector> ys,
                                                 OperatorKind op) {
    return std::make_unique<MemoryTransport>(
        spawn_workers(std::move(shards), std::move(ys), op));
}

Cluster::Cluster(std::vector<Matrix> shards, std::vector<Vector> ys,
                 OperatorKind op, TransportKind transport) {
    if (transport == TransportKind::memory) {
        transport_ = make_memory_transport(std::move(shards), std::move(ys), op);
    } else {
        transport_ = make_tcp_transport(std::move(shards), std::move(ys), op);
    }
    ledger_.workers.resize(static_cast<std::size_t>(transport_->worker_count()));
    for (Index k = 0; k < transport_->worker_count(); ++k) {
        total_ += transport_->samples_on(k);
    }
}

Cluster Cluster::in_memory(std::vector<Matrix> shards, OperatorKind op) {
    return Cluster(std::move(shards), {}, op, TransportKind::memory);
}

Cluster::~Cluster() = default;

void Cluster::account_send(Index k, const Message& m) {
    auto& c = ledger_.workers[static_cast<std::size_t>(k)];
    c.messages_received += 1;
    c.downlink_bytes += payload_bytes(m);
    c.overhead_bytes += kFrameOverheadBytes;
}

void Cluster::account_receive(Index k, const Message& m) {
    auto& c = ledger_.workers[static_cast<std::size_t>(k)];
    c.messages_sent += 1;
    if (m.kind == Kind::gradient) {
        c.uplink_gradient_bytes += payload_bytes(m);
    } else {
        c.uplink_other_bytes += payload_bytes(m);
    }
    c.overhead_bytes += kFrameOverheadBytes;
}

void Cluster::send_to(Index k, const Message& m) {
    account_send(k, m);
    transport_->send(k, m);
}

Message Cluster::receive_from(Index k) {
    Message m = transport_->receive(k);
    account_receive(k, m);
    return m;
}

void Cluster::broadcast(const Message& m) {
    ledger_.rounds += 1;
    for (Index k = 0; k < worker_count(); ++k) {
        send_to(k, m);
    }
}

std::vector<Message> Cluster::broadcast_gather(const Message& m) {
    broadcast(m);
    const int per_worker = expected_replies(m);
    std::vector<Message> replies;
    replies.reserve(static_cast<std::size_t>(worker_count()) *
                    static_cast<std::size_t>(per_worker));
    for (Index k = 0; k < worker_count(); ++k) {
        for (int i = 0; i < per_worker; ++i) {
            replies.push_back(receive_from(k));
        }
    }
    return replies;
}

void Cluster::set_shift(double shift) {
    broadcast(Message::broadcast(Kind::shift, shift));
}

void Cluster::set_anchor(const Vector& anchor) {
    broadcast(Message::broadcast(Kind::anchor, anchor));
}

Vector Cluster::aggregate_gradients(const Vector& iterate) {
    auto replies = broadcast_gather(Message::broadcast(Kind::iterate, iterate));
    Vector g = Vector::Zero(dim());
    for (Index k = 0; k < worker_count(); ++k) {
        const auto& r = replies[static_cast<std::size_t>(k)];
        g += (static_cast<double>(r.weight) / static_cast<double>(total_)) * r.payload;
    }
    return g;
}

Vector Cluster::aggregate_gradients(const Vector& iterate, const Vector& anchor) {
    set_anchor(anchor);
    return aggregate_gradients(iterate);
}

Vector Cluster::newton_solve(const Vector& rhs) {
    ledger_.rounds += 1;
    send_to(0, Message::broadcast(Kind::newton_rhs, rhs));
    return receive_from(0).payload;
}

void Cluster::apply_deflation(const Vector& v) {
    if (std::abs(v.norm() - 1.0) > 1e-8) {
        throw NotUnitVectorError("deflation vector norm " + std::to_string(v.norm()));
    }
    broadcast(Message::broadcast(Kind::deflation_vector, v));
}

double Cluster::rayleigh(const Vector& w) {
    auto replies = broadcast_gather(Message::broadcast(Kind::rayleigh_query, w));
    double value = 0.0;
    for (Index k = 0; k < worker_count(); ++k) {
        const auto& r = replies[static_cast<std::size_t>(k)];
        value += (static_cast<double>(r.weight) / static_cast<double>(total_)) *
                 r.scalar();
    }
    return value;
}

double Cluster::mean_local_top_eigenvalue() {
    auto replies =
        broadcast_gather(Message::control(Kind::query_local_top_eigenvalue));
    double value = 0.0;
    for (Index k = 0; k < worker_count(); ++k) {
        const auto& r = replies[static_cast<std::size_t>(k)];
        value += (static_cast<double>(r.weight) / static_cast<double>(total_)) *
                 r.scalar();
    }
    return value;
}

std::pair<double, Vector> Cluster::local_top_eigenpair(Index k) {
    ledger_.rounds += 1;
    send_to(k, Message::control(Kind::query_local_eigenpair));
    Message value = receive_from(k);
    Message vec = receive_from(k);
    return {value.scalar(), vec.payload};
}

Vector Cluster::mean_vector() {
    auto replies = broadcast_gather(Message::control(Kind::query_mean_vector));
    Vector mean = Vector::Zero(dim());
    for (Index k = 0; k < worker_count(); ++k) {
        const auto& r = replies[static_cast<std::size_t>(k)];
        mean += (static_cast<double>(r.weight) / static_cast<double>(total_)) *
                r.payload;
    }
    return mean;
}

Vector Cluster::center() {
    Vector mean = mean_vector();
    broadcast(Message::broadcast(Kind::mean, mean));
    return mean;
}

Cluster::CovarianceProbe Cluster::covariance_probe() {
    auto replies = broadcast_gather(Message::control(Kind::covariance_query));
    const Index d = dim();
    CovarianceProbe probe;
    probe.pooled = Matrix::Zero(d, d);
    for (Index k = 0; k < worker_count(); ++k) {
        const auto& r = replies[static_cast<std::size_t>(k)];
        Matrix local = Eigen::Map<const Matrix>(r.payload.data(), d, d);
        if (k == 0) probe.first = local;
        probe.pooled +=
            (static_cast<double>(r.weight) / static_cast<double>(total_)) * local;
    }
    return probe;
}

std::pair<Matrix, Vector> Cluster::pcr_normal_equations(const Matrix& basis) {
    const Index d = dim();
    const Index s = basis.cols();
    if (basis.rows() != d) {
        throw SizeMismatchError("pcr basis rows do not match the data dimension");
    }
    Vector flat = Eigen::Map<const Vector>(basis.data(), d * s);
    auto replies = broadcast_gather(Message::broadcast(Kind::pcr_basis, flat));
    Matrix normal = Matrix::Zero(s, s);
    Vector moment = Vector::Zero(s);
    for (Index k = 0; k < worker_count(); ++k) {
        const auto& r = replies[static_cast<std::size_t>(k)];
        normal += Eigen::Map<const Matrix>(r.payload.data(), s, s);
        moment += r.payload.tail(s);
    }
    return {std::move(normal), std::move(moment)};
}

void Cluster::begin_eigenvector() {
    broadcast(Message::control(Kind::begin_eigenvector));
}

}  // namespace deig
