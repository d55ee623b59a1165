// Acceptance gate: every criterion prints one [PASS]/[FAIL] line; the exit
// code is the number of failed criteria (0 = all green).
#include <deig/apps.hpp>
#include <deig/baselines.hpp>
#include <deig/cluster.hpp>
#include <deig/datagen.hpp>
#include <deig/errors.hpp>
#include <deig/experiment.hpp>
#include <deig/linalg.hpp>
#include <deig/metrics.hpp>
#include <deig/rng.hpp>
#include <deig/solver.hpp>

#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace deig;

namespace {

double log10e(double err) { return std::log10(std::max(err, 1e-300)); }

Matrix pooled_covariance(const std::vector<Matrix>& shards) {
    Index n = 0;
    for (const auto& s : shards) n += s.rows();
    Matrix sum = Matrix::Zero(shards[0].cols(), shards[0].cols());
    for (const auto& s : shards) sum += s.transpose() * s;
    sum /= static_cast<double>(n);
    return (sum + sum.transpose()) / 2.0;
}

// Mean-row error for (method, predicate) from an experiment's records.
double mean_error(const std::vector<RunRecord>& rows, const std::string& method,
                  const std::function<bool(const RunRecord&)>& pred) {
    for (const auto& r : rows) {
        if (r.rep == "mean" && r.method == method && pred(r)) return r.error;
    }
    throw Error("no mean row matches method " + method);
}

SolverConfig desk_config(Index t, Index t_inner) {
    SolverConfig cfg;
    cfg.T = t;
    cfg.T_inner = t_inner;
    cfg.eta_mode = EtaMode::probe;
    cfg.probe_factor = 2.0;
    cfg.warn_eta = false;
    return cfg;
}

// ---------------------------------------------------------------- criterion 1
bool linear_log_error_decay(std::string& note) {
    ExperimentSpec s;
    s.kind = ExperimentKind::vary_outer_iterations;
    s.d = 20;
    s.m = 200;
    s.k_list = {20};
    s.delta_list = {1.0};
    s.t_list = {2, 5, 10, 20, 30};
    s.t_inner_list = {5};
    s.eta_mode = EtaMode::probe;
    s.probe_factor = 2.0;
    s.monte_carlo = 20;
    s.base_seed = 1;
    auto rows = run_experiment(s);

    std::ostringstream msg;
    bool ok = true;
    double prev = 1e300;
    for (Index t : s.t_list) {
        auto at_t = [t](const RunRecord& r) { return r.t == t; };
        double cur = log10e(mean_error(rows, "ours", at_t));
        if (cur > prev + 0.05) ok = false;
        prev = cur;
        msg << "T=" << t << ":" << std::round(cur * 100) / 100 << " ";
    }
    double ours30 = log10e(mean_error(rows, "ours", [](const RunRecord& r) { return r.t == 30; }));
    double orc30 = log10e(mean_error(rows, "oracle", [](const RunRecord& r) { return r.t == 30; }));
    msg << "oracle:" << std::round(orc30 * 100) / 100;
    if (std::abs(ours30 - orc30) > 0.15) ok = false;
    note = msg.str();
    return ok;
}

// ---------------------------------------------------------------- criterion 2
bool single_machine_exactness(std::string& note) {
    CovarianceModel model = make_covariance({.d = 10, .delta = 1.0, .top_count = 1, .seed = 9});
    Dataset data = sample_gaussian(2000, model.sigma, 10);
    Cluster c = Cluster::in_memory({data.a});
    SolverConfig cfg;
    cfg.T = 30;
    cfg.T_inner = 1;
    cfg.eta_mode = EtaMode::c0;
    cfg.c0 = 1.0;
    cfg.warn_eta = false;
    TopEigenvectorResult run = top_eigenvector(c, cfg);

    Matrix pooled = pooled_covariance({data.a});
    Matrix h = run.shift * Matrix::Identity(10, 10) - pooled;
    SpdFactor factor(h);
    Vector w = sym_eigendecompose(Matrix(data.a.transpose() * data.a / 2000.0)).vectors.col(0);
    double worst = 0.0;
    for (const TraceRow& row : run.trace) {
        w = factor.solve(w);
        w /= w.norm();
        worst = std::max(worst, (w - row.iterate).norm());
    }
    double align = std::abs(sym_eigendecompose(pooled).vectors.col(0).dot(run.w));
    std::ostringstream msg;
    msg << "max iterate gap " << worst << ", alignment 1-" << 1.0 - align;
    note = msg.str();
    return worst < 1e-10 && align >= 1.0 - 1e-8;
}

// ---------------------------------------------------------------- criterion 3
bool inner_loop_contraction(std::string& note) {
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        CovarianceModel model =
            make_covariance({.d = 8, .delta = 1.0, .top_count = 3, .seed = 300 + seed});
        Dataset data = sample_gaussian(800, model.sigma, 400 + seed);
        auto parts = shard(data.a, balanced_sizes(800, 2), 500 + seed);
        Cluster c = Cluster::in_memory(parts);

        Matrix pooled = pooled_covariance(parts);
        Matrix first = parts[0].transpose() * parts[0] / static_cast<double>(parts[0].rows());
        double kappa = sym_spectral_norm(pooled - first);
        double eta = 2.5 * kappa;  // constructed >= 2 kappa
        SolverConfig cfg;
        cfg.eta_mode = EtaMode::override_value;
        cfg.eta_override = eta;
        cfg.warn_eta = false;
        InitEstimates init = init_estimates(c, cfg);
        c.set_shift(init.shift);

        Matrix h = init.shift * Matrix::Identity(8, 8) - pooled;
        Vector target = SpdFactor(h).solve(init.w0);
        std::vector<Vector> iterates;
        inner_solve(c, init.w0, init.w0, 6, &iterates);

        double rate = 2.0 * kappa / eta;
        double prev = (init.w0 - target).norm();
        for (const Vector& wj : iterates) {
            double cur = (wj - target).norm();
            if (cur > rate * prev + 1e-12) {
                note = "contraction violated at seed " + std::to_string(seed);
                return false;
            }
            if (prev > 1e-12) worst_ratio = std::max(worst_ratio, cur / prev);
            prev = cur;
        }
    }
    std::ostringstream msg;
    msg << "worst measured step ratio " << worst_ratio << " (bound 0.8)";
    note = msg.str();
    return true;
}

// ---------------------------------------------------------------- criterion 4
bool variance_capture(std::string& note) {
    int held = 0;
    double worst_margin = 1e300;
    for (Index rep = 0; rep < 20; ++rep) {
        std::uint64_t ds = 1 + 7919u * (static_cast<std::uint64_t>(rep) + 1) + 104729u;
        CovarianceModel model = make_covariance({.d = 20, .delta = 1.0, .top_count = 3, .seed = 1});
        Dataset data = sample_gaussian(4000, model.sigma, ds);
        auto parts = shard(data.a, balanced_sizes(4000, 20), ds + 1);
        Cluster c = Cluster::in_memory(parts);
        TopEigenvectorResult run = top_eigenvector(c, desk_config(30, 5));

        Matrix pooled = pooled_covariance(parts);
        EigenDecomposition eig = sym_eigendecompose(pooled);
        double delta_hat = (eig.values(0) - eig.values(1)) / eig.values(0);
        double eps = gapfree_error_top1(eig, run.w, delta_hat);
        double captured = variance_captured(pooled, run.w);
        if (capture_bound_holds(eig.values(0), delta_hat, eps, captured)) ++held;
        if (eps < 1.0) {
            double bound = (1.0 - delta_hat) * (1.0 - eps) * eig.values(0);
            worst_margin = std::min(worst_margin, captured - bound);
        }
    }
    std::ostringstream msg;
    msg << held << "/20 runs hold, smallest margin " << worst_margin;
    note = msg.str();
    return held == 20;
}

// ---------------------------------------------------------------- criterion 5
bool eigengap_sweep(std::string& note) {
    ExperimentSpec s;
    s.kind = ExperimentKind::vary_eigengap;
    s.d = 20;
    s.m = 200;
    s.k_list = {20};
    s.delta_list = {2.0, 1.0, 0.5, 0.25};
    s.t_list = {40};
    s.t_inner_list = {10};
    s.eta_mode = EtaMode::probe;
    s.probe_factor = 2.0;
    s.monte_carlo = 20;
    s.base_seed = 1;
    auto rows = run_experiment(s);

    std::ostringstream msg;
    bool ok = true;
    double prev = -1e300;
    for (double delta : s.delta_list) {  // descending delta = increasing 1/delta
        auto at_delta = [delta](const RunRecord& r) { return r.delta == delta; };
        double ours = log10e(mean_error(rows, "ours", at_delta));
        double orc = log10e(mean_error(rows, "oracle", at_delta));
        if (ours < prev - 1e-9) ok = false;  // must be non-decreasing in 1/delta
        if (std::abs(ours - orc) > 0.15) ok = false;
        prev = ours;
        msg << "d" << delta << ":" << std::round(ours * 100) / 100 << "/"
            << std::round(orc * 100) / 100 << " ";
    }
    note = msg.str();
    return ok;
}

// ---------------------------------------------------------------- criterion 6
bool machines_sweep(std::string& note) {
    ExperimentSpec s;
    s.kind = ExperimentKind::vary_machines;
    s.d = 20;
    s.m = 200;
    s.k_list = {10, 40, 160, 640};
    s.delta_list = {0.5};
    s.skewness_list = {4.0};
    // The K=10 cell converges slowly (small empirical gap on heavy-tailed
    // shards), so this sweep runs deeper outer iterations with a tighter
    // shift than the defaults.
    s.t_list = {800};
    s.t_inner_list = {10};
    s.eta_mode = EtaMode::probe;
    s.probe_factor = 1.5;
    s.monte_carlo = 20;
    s.base_seed = 1;
    auto rows = run_experiment(s);

    std::ostringstream msg;
    bool ok = true;
    for (Index k : s.k_list) {
        auto at_k = [k](const RunRecord& r) { return r.k == k; };
        double ours = log10e(mean_error(rows, "ours", at_k));
        double orc = log10e(mean_error(rows, "oracle", at_k));
        if (std::abs(ours - orc) > 0.15) ok = false;
        msg << "K" << k << ":" << std::round(ours * 100) / 100 << "/"
            << std::round(orc * 100) / 100 << " ";
    }
    auto at_top = [](const RunRecord& r) { return r.k == 640; };
    double ours_top = mean_error(rows, "ours", at_top);
    double dc_top = mean_error(rows, "dc", at_top);
    msg << "dc@640:" << std::round(log10e(dc_top) * 100) / 100;
    if (!(dc_top > ours_top)) ok = false;
    note = msg.str();
    return ok;
}

// ---------------------------------------------------------------- criterion 7
bool baseline_sanity(std::string& note) {
    CovarianceModel model = make_covariance({.d = 10, .delta = 0.5, .top_count = 3, .seed = 70});
    Dataset data = sample_gaussian(1030, model.sigma, 71);

    BaselineResult dc1 = dc_pca({data.a}, 3);
    BaselineResult orc = oracle_pca(data.a, 3);
    double proj = sym_spectral_norm(dc1.u_hat * dc1.u_hat.transpose() -
                                    orc.u_hat * orc.u_hat.transpose());

    auto parts = shard(data.a, {200, 400, 130, 300}, 72);
    Matrix agg = dc_aggregate(parts, 3);
    EigenDecomposition eig = sym_eigendecompose(agg);
    double lo = eig.values.minCoeff();
    double hi = eig.values.maxCoeff();
    double trace_gap = std::abs(agg.trace() - 3.0);

    std::ostringstream msg;
    msg << "K=1 projector gap " << proj << ", eigenvalues [" << lo << ", " << hi
        << "], |trace-L| " << trace_gap;
    note = msg.str();
    return proj < 1e-10 && lo >= -1e-12 && hi <= 1.0 + 1e-12 && trace_gap < 1e-10;
}

// ---------------------------------------------------------------- criterion 8
bool deflation_invariants(std::string& note) {
    CovarianceModel model = make_covariance({.d = 10, .delta = 1.0, .top_count = 3, .seed = 80});
    Dataset data = sample_gaussian(1200, model.sigma, 81);
    auto parts = shard(data.a, balanced_sizes(1200, 3), 82);
    Cluster c = Cluster::in_memory(parts);
    SolverConfig cfg = desk_config(25, 8);
    cfg.L = 3;
    SolverResult res = top_L_subspace(c, cfg);

    double ortho = (res.V.transpose() * res.V - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (const Worker& w : *c.local_workers()) {
        for (Index j = 0; j < 3; ++j) {
            worst = std::max(worst,
                             (w.working_rows() * res.V.col(j)).cwiseAbs().maxCoeff());
        }
    }
    std::ostringstream msg;
    msg << "max |VtV - I| " << ortho << ", max |A_k v_j| " << worst;
    note = msg.str();
    return ortho < 1e-8 && worst < 1e-9;
}

// ---------------------------------------------------------------- criterion 9
bool pcr_checks(std::string& note) {
    // Distributed normal equations match the pooled ones entrywise.
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CovarianceModel model =
            make_covariance({.d = 8, .delta = 0.5, .top_count = 3, .seed = 900 + seed});
        Dataset inst = make_pcr_instance(model, 400, 0.3, 910 + seed);
        Shards parts = shard(inst, {120, 80, 150, 50}, 920 + seed);
        Cluster c(parts.a, parts.y, OperatorKind::covariance, TransportKind::memory);
        Rng rng(930 + seed);
        Matrix raw(8, 3);
        for (Index i = 0; i < 8; ++i)
            for (Index j = 0; j < 3; ++j) raw(i, j) = rng.normal();
        Matrix basis = gram_schmidt(raw);
        auto [normal, rhs] = c.pcr_normal_equations(basis);
        Matrix projected = inst.a * basis;
        Matrix normal_ref = projected.transpose() * projected;
        Vector rhs_ref = projected.transpose() * inst.y;
        double scale = std::max(1.0, normal_ref.cwiseAbs().maxCoeff());
        if ((normal - normal_ref).cwiseAbs().maxCoeff() > 1e-12 * scale ||
            (rhs - rhs_ref).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            note = "normal equations diverged at seed " + std::to_string(seed);
            return false;
        }
    }

    ExperimentSpec s;
    s.kind = ExperimentKind::pcr;
    s.d = 20;
    s.m = 200;
    s.k_list = {20};
    s.delta_list = {1.0};
    s.l_count = 3;
    s.sigma2_list = {0.2};
    s.t_list = {40};
    s.t_inner_list = {10};
    s.eta_mode = EtaMode::probe;
    s.probe_factor = 2.0;
    s.monte_carlo = 20;
    s.base_seed = 1;
    auto rows = run_experiment(s);
    double ours = mean_error(rows, "ours", [](const RunRecord&) { return true; });
    double orc = mean_error(rows, "oracle", [](const RunRecord&) { return true; });
    std::ostringstream msg;
    msg << "mean prediction error ours " << ours << " vs oracle " << orc << " (ratio "
        << ours / orc << ")";
    note = msg.str();
    return ours <= 1.05 * orc;
}

// --------------------------------------------------------------- criterion 10
bool sim_checks(std::string& note) {
    Dataset big = make_sim_instance(10, 100000, SimLink::square, 0.1, 2);
    Shards parts = shard(big, balanced_sizes(100000, 10), 3);
    Cluster c(parts.a, parts.y, OperatorKind::stein, TransportKind::memory);
    Vector beta = sim_fit(c, desk_config(30, 10));
    double err = sign_corrected_l2(beta, big.truth.beta);

    Dataset small = make_sim_instance(10, 20000, SimLink::square, 0.1, 3);
    Cluster solo(std::vector<Matrix>{small.a}, std::vector<Vector>{small.y},
                 OperatorKind::stein, TransportKind::memory);
    SolverConfig cfg;
    cfg.T = 60;
    cfg.T_inner = 1;
    cfg.eta_mode = EtaMode::c0;
    cfg.c0 = 1.0;
    cfg.warn_eta = false;
    Vector beta1 = sim_fit(solo, cfg);
    auto n = static_cast<double>(small.a.rows());
    Matrix stein = small.a.transpose() * small.y.asDiagonal() * small.a / n;
    stein -= (small.y.sum() / n) * Matrix::Identity(10, 10);
    stein = (stein + stein.transpose()) / 2.0;
    double gap = sign_corrected_l2(beta1, sym_eigendecompose(stein).vectors.col(0));

    std::ostringstream msg;
    msg << "K=10 direction error " << err << ", K=1 pooled-eigenvector gap " << gap;
    note = msg.str();
    return err < 0.1 && gap < 1e-6;
}

// --------------------------------------------------------------- criterion 11
bool communication_accounting(std::string& note) {
    CovarianceModel model = make_covariance({.d = 13, .delta = 1.0, .top_count = 3, .seed = 110});
    Dataset data = sample_gaussian(120, model.sigma, 111);
    auto parts = shard(data.a, balanced_sizes(120, 3), 112);

    Cluster mem(parts, {}, OperatorKind::covariance, TransportKind::memory);
    TopEigenvectorResult mem_run = top_eigenvector(mem, desk_config(3, 4));
    Cluster tcp(parts, {}, OperatorKind::covariance, TransportKind::tcp);
    TopEigenvectorResult tcp_run = top_eigenvector(tcp, desk_config(3, 4));

    bool ok = true;
    for (const auto& w : mem.ledger().workers) {
        if (w.uplink_gradient_bytes != 1248u) ok = false;
        if (w.uplink_other_bytes == 0u || w.downlink_bytes == 0u) ok = false;
    }
    bool bit_identical = mem_run.w.size() == tcp_run.w.size();
    for (Index i = 0; bit_identical && i < mem_run.w.size(); ++i) {
        if (mem_run.w(i) != tcp_run.w(i)) bit_identical = false;
    }
    if (!(mem.ledger() == tcp.ledger())) ok = false;

    std::ostringstream msg;
    msg << "gradient bytes/worker " << mem.ledger().workers[0].uplink_gradient_bytes
        << ", transports " << (bit_identical ? "bit-identical" : "DIVERGED");
    note = msg.str();
    return ok && bit_identical;
}

// --------------------------------------------------------------- criterion 12
bool eigensolver_oracle(std::string& note) {
    Rng rng(120);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Matrix m(3, 3);
        for (Index i = 0; i < 3; ++i)
            for (Index j = i; j < 3; ++j) m(i, j) = m(j, i) = rng.normal();
        EigenDecomposition eig = sym_eigendecompose(m);
        std::array<double, 3> roots = oracle::cubic_eigenvalues_3x3(m);
        for (Index i = 0; i < 3; ++i) {
            worst = std::max(worst, std::abs(eig.values(i) - roots[static_cast<std::size_t>(i)]));
        }
    }
    std::ostringstream msg;
    msg << "worst eigenvalue gap vs closed form " << worst;
    note = msg.str();
    return worst < 1e-10;
}

struct Criterion {
    int id;
    const char* label;
    double budget_s;
    bool (*fn)(std::string&);
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "linear log-error decay in outer iterations", 120, linear_log_error_decay},
        {2, "single-machine shift-and-invert exactness", 1, single_machine_exactness},
        {3, "inner-loop contraction at the measured rate", 5, inner_loop_contraction},
        {4, "variance capture on every converged run", 120, variance_capture},
        {5, "eigengap sweep tracks the oracle", 300, eigengap_sweep},
        {6, "machines sweep on skewed data beats one-shot averaging", 600, machines_sweep},
        {7, "divide-and-conquer/oracle baseline sanity", 60, baseline_sanity},
        {8, "deflation orthogonality invariants", 60, deflation_invariants},
        {9, "distributed PCR equals pooled and tracks oracle", 120, pcr_checks},
        {10, "single-index model direction recovery", 60, sim_checks},
        {11, "communication ledger exactness across transports", 60, communication_accounting},
        {12, "eigensolver matches the closed-form cubic", 10, eigensolver_oracle},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        std::string note;
        bool ok = false;
        auto start = std::chrono::steady_clock::now();
        try {
            ok = c.fn(note);
        } catch (const std::exception& e) {
            note = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) {
            ok = false;
            note += " [exceeded " + std::to_string(c.budget_s) + "s budget]";
        }
        std::printf("[%s] criterion %2d: %s (%.1fs) %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.label, secs, note.c_str());
        std::fflush(stdout);
        if (!ok) ++failed;
    }
    if (failed == 0) {
        std::printf("all 12 criteria passed\n");
    } else {
        std::printf("%d criteria FAILED\n", failed);
    }
    return failed;
}
