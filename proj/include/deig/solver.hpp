#pragma once

#include <deig/cluster.hpp>
#include <deig/ledger.hpp>
#include <deig/types.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace deig {

// How the preconditioning margin eta is chosen:
//   c0:             eta = c0 * sqrt(d / m_1), no communication
//   probe:          eta = probe_factor * kappa, with kappa = |pooled - first|_2
//                   measured by one covariance round (robust default for the
//                   experiment harness; the plain c0 rule under-shifts badly
//                   when shards are small relative to d)
//   corollary:      eta = sqrt(kappa * delta * lambda_1) / 3, same probe round
//   override_value: eta = eta_override, for tests that construct eta exactly
enum class EtaMode { c0, probe, corollary, override_value };

struct SolverConfig {
    Index T = 40;
    Index T_inner = 10;
    EtaMode eta_mode = EtaMode::c0;
    double c0 = 1.0;
    double probe_factor = 2.0;
    double eta_override = 0.0;
    double delta = 0.5;  // relative gap for enlargement stopping
    Index L = 1;
    bool enlarge = false;
    bool warn_eta = true;  // warn when a measured kappa violates eta >= kappa/2
};

struct InitEstimates {
    double shift;  // lambda_1(local operator on worker 0) + 1.5 * eta
    Vector w0;     // worker 0's top local eigenvector
    double eta;
    double kappa;  // measured spectral distance; -1 when not probed
};

// One outer iterate of one eigenvector index, plus the cumulative gradient
// uplink of worker 0 at that point (for communication-vs-error curves).
struct TraceRow {
    Index l;  // eigenvector index, 1-based
    Index t;  // outer iteration, 1-based
    Vector iterate;
    std::uint64_t uplink_gradient_bytes;
};

struct SolverResult {
    Matrix V;                       // d x S, orthonormal columns
    std::vector<double> rayleigh;   // per column, queried before deflation
    std::vector<double> shifts;     // shift used for each column
    double eta = 0.0;
    double kappa = -1.0;
    Index S = 0;
    bool s_hit_dimension = false;  // enlargement never met its stop rule
    std::vector<TraceRow> trace;
    CommLedger ledger;
};

// Computes eta (unless given), queries worker 0's top eigenpair, and returns
// the shift lambda_1 + 1.5 eta. Does not broadcast the shift itself.
InitEstimates init_estimates(Cluster& cluster, const SolverConfig& cfg,
                             std::optional<double> eta = std::nullopt);

// T_inner approximate Newton steps toward H^{-1} anchor from `start`:
// w <- w - H_1^{-1} (H w - anchor), H applied distributedly, H_1 on worker 0.
// The shift must already be set. Records each post-step iterate in *iterates
// when given.
Vector inner_solve(Cluster& cluster, const Vector& anchor, const Vector& start,
                   Index T_inner, std::vector<Vector>* iterates = nullptr);

struct TopEigenvectorResult {
    Vector w;
    double shift;
    double eta;
    double kappa;
    std::vector<TraceRow> trace;
};

// Shift-and-invert outer loop: T rounds of inner_solve anchored at the
// current iterate, each followed by normalization. Unit norm is a loop
// invariant; ZeroIterateError if an inner solve returns a near-zero vector.
TopEigenvectorResult top_eigenvector(Cluster& cluster, const SolverConfig& cfg,
                                     std::optional<double> eta = std::nullopt,
                                     Index trace_index = 1);

// Deflation loop for the top-L subspace: per column, re-initialize on the
// deflated shards, run top_eigenvector, project against the found panel
// (DeflationCollapseError below norm 1e-10), record the Rayleigh quotient,
// then deflate.
SolverResult top_L_subspace(Cluster& cluster, const SolverConfig& cfg);

// Continues the deflation loop past L and stops at the first column whose
// Rayleigh quotient falls to (1 - delta) times column L's; returns the S
// preceding columns. If the rule never fires, S = d with s_hit_dimension.
SolverResult enlarged_subspace(Cluster& cluster, const SolverConfig& cfg);

}  // namespace deig
