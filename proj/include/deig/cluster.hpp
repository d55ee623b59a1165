#pragma once

#include <deig/ledger.hpp>
#include <deig/linalg.hpp>
#include <deig/message.hpp>
#include <deig/types.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace deig {

// Which symmetric operator the cluster's shifted Hessians are built from:
// the sample covariance A_k^T A_k / m_k, or the second-order Stein matrix
// (A_k^T diag(y_k) A_k) / m_k - mean(y_k) I.
enum class OperatorKind { covariance, stein };

// One machine's state. Holds the pristine rows (regression uses them) plus a
// working copy that centering and deflation mutate. All handling is
// deterministic: handle() maps one incoming message to 0-2 replies.
class Worker {
public:
    Worker(Index index, Matrix rows, Vector y, OperatorKind op);

    std::vector<Message> handle(const Message& msg);

    Index index() const { return index_; }
    Index sample_count() const { return rows_.rows(); }
    Index dim() const { return rows_.cols(); }

    // Verification accessors (tests assert deflation invariants on them).
    const Matrix& working_rows() const { return work_; }
    const Matrix& pristine_rows() const { return rows_; }
    const Matrix& panel() const { return panel_; }

private:
    Vector apply_shifted(const Vector& w) const;  // shift*w - Op_k w
    Matrix local_operator() const;                // Op_k materialized, d x d

    Index index_;
    Matrix rows_;  // as sharded (minus the global mean once centered)
    Matrix work_;  // deflated copy used by gradients/eigenqueries
    Vector y_;
    OperatorKind op_;
    double shift_ = 0.0;
    bool have_shift_ = false;
    Vector anchor_;
    Matrix panel_;  // received deflation vectors, d x l
    Matrix basis_;  // received regression basis, d x S
    std::optional<SpdFactor> hessian_;  // worker 0 only, rebuilt per shift
};

// Message channel between the coordinator and worker k. Implementations:
// deterministic in-process dispatch, and length-prefixed TCP over loopback.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(Index k, const Message& m) = 0;
    virtual Message receive(Index k) = 0;
    virtual Index worker_count() const = 0;
    // Worker metadata gathered at spawn time.
    virtual Index dim() const = 0;
    virtual Index samples_on(Index k) const = 0;
    // In-process worker state, for invariant checks; null on remote
    // transports.
    virtual const std::vector<Worker>* workers() const { return nullptr; }
};

std::vector<Worker> spawn_workers(std::vector<Matrix> shards,
                                  std::vector<Vector> ys, OperatorKind op);

std::unique_ptr<Transport> make_memory_transport(std::vector<Matrix> shards,
                                                 std::vector<Vector> ys,
                                                 OperatorKind op);
std::unique_ptr<Transport> make_tcp_transport(std::vector<Matrix> shards,
                                              std::vector<Vector> ys,
                                              OperatorKind op);

enum class TransportKind { memory, tcp };

// Coordinator handle. All aggregation is sequential in ascending worker
// index, so results are identical across transports and reruns. The ledger
// is computed from the abstract messages, never from transport internals.
class Cluster {
public:
    Cluster(std::vector<Matrix> shards, std::vector<Vector> ys,
            OperatorKind op, TransportKind transport);
    static Cluster in_memory(std::vector<Matrix> shards,
                             OperatorKind op = OperatorKind::covariance);
    ~Cluster();
    Cluster(Cluster&&) = default;

    Index worker_count() const { return transport_->worker_count(); }
    Index dim() const { return transport_->dim(); }
    Index samples_on(Index k) const { return transport_->samples_on(k); }
    Index total_samples() const { return total_; }

    // Shift maintenance: worker 0 rebuilds and refactorizes its Hessian.
    void set_shift(double shift);
    // Anchor for subsequent gradient aggregations (one broadcast).
    void set_anchor(const Vector& anchor);
    // Broadcast the iterate; workers reply g_k = H_k w - anchor; returns the
    // sample-weighted mean sum_k (m_k/n) g_k.
    Vector aggregate_gradients(const Vector& iterate);
    Vector aggregate_gradients(const Vector& iterate, const Vector& anchor);
    // Route a Newton solve to worker 0: returns H_1^{-1} rhs.
    Vector newton_solve(const Vector& rhs);
    // Broadcast v; every worker projects its rows onto v's complement and
    // appends v to its panel. Throws NotUnitVectorError unless |v| = 1 (1e-8).
    void apply_deflation(const Vector& v);
    // Weighted Rayleigh quotient w^T Op w of the deflated pooled operator.
    double rayleigh(const Vector& w);
    // Weighted mean of the workers' local top eigenvalues.
    double mean_local_top_eigenvalue();
    // (top eigenvalue, top eigenvector) of worker k's local operator.
    std::pair<double, Vector> local_top_eigenpair(Index k);
    // Weighted mean of per-worker row means (pristine rows).
    Vector mean_vector();
    // Subtract the global mean from every row on every worker; returns it.
    Vector center();
    // Weighted mean of local operators plus worker 0's own, one round.
    struct CovarianceProbe {
        Matrix pooled;
        Matrix first;
    };
    CovarianceProbe covariance_probe();
    // Broadcast a d x S basis; workers answer with basis-projected normal
    // equations from their pristine rows; returns the summed (B^T A^T A B,
    // B^T A^T y) pair.
    std::pair<Matrix, Vector> pcr_normal_equations(const Matrix& basis);
    // Control markers.
    void begin_eigenvector();

    // Worker objects when the transport is in-process; null over TCP.
    const std::vector<Worker>* local_workers() const {
        return transport_->workers();
    }

    const CommLedger& ledger() const { return ledger_; }

private:
    void account_send(Index k, const Message& m);
    void account_receive(Index k, const Message& m);
    void send_to(Index k, const Message& m);
    Message receive_from(Index k);
    void broadcast(const Message& m);
    std::vector<Message> broadcast_gather(const Message& m);

    std::unique_ptr<Transport> transport_;
    Index total_ = 0;
    CommLedger ledger_;
};

}  // namespace deig
