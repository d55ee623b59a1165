#include <deig/solver.hpp>

#include <deig/errors.hpp>
#include <deig/linalg.hpp>

#include <cmath>
#include <cstdio>

namespace deig {

namespace {

void validate(const SolverConfig& cfg) {
    if (cfg.T < 1 || cfg.T_inner < 1 || cfg.L < 1) {
        throw Error("solver config: T, T_inner, and L must be >= 1");
    }
    if (cfg.c0 <= 0.0) {
        throw Error("solver config: c0 must be positive");
    }
    if (cfg.delta <= 0.0 || cfg.delta >= 1.0) {
        throw Error("solver config: delta must lie in (0, 1)");
    }
}

}  // namespace

InitEstimates init_estimates(Cluster& cluster, const SolverConfig& cfg,
                             std::optional<double> eta) {
    validate(cfg);
    InitEstimates init;
    init.kappa = -1.0;
    if (eta) {
        init.eta = *eta;
    } else {
        switch (cfg.eta_mode) {
            case EtaMode::c0:
                init.eta = cfg.c0 * std::sqrt(static_cast<double>(cluster.dim()) /
                                              static_cast<double>(cluster.samples_on(0)));
                break;
            case EtaMode::override_value:
                init.eta = cfg.eta_override;
                break;
            case EtaMode::probe:
            case EtaMode::corollary: {
                auto probe = cluster.covariance_probe();
                init.kappa = sym_spectral_norm(probe.pooled - probe.first);
                if (cfg.eta_mode == EtaMode::probe) {
                    init.eta = cfg.probe_factor * init.kappa;
                } else {
                    double top = sym_top_eigenvalue(probe.pooled);
                    init.eta = std::sqrt(init.kappa * cfg.delta * top) / 3.0;
                }
                break;
            }
        }
    }
    if (init.eta <= 0.0) {
        throw Error("init_estimates: eta must come out positive");
    }
    if (cfg.warn_eta && init.kappa >= 0.0 && init.eta < init.kappa / 2.0) {
        std::fprintf(stderr,
                     "warning: eta %.6g is below kappa/2 = %.6g; the inner "
                     "solve may diverge\n",
                     init.eta, init.kappa / 2.0);
    }
    auto [top, vec] = cluster.local_top_eigenpair(0);
    init.shift = top + 1.5 * init.eta;
    init.w0 = std::move(vec);
    return init;
}

Vector inner_solve(Cluster& cluster, const Vector& anchor, const Vector& start,
                   Index T_inner, std::vector<Vector>* iterates) {
    cluster.set_anchor(anchor);
    Vector w = start;
    for (Index j = 0; j < T_inner; ++j) {
        Vector g = cluster.aggregate_gradients(w);
        w -= cluster.newton_solve(g);
        if (iterates) iterates->push_back(w);
    }
    return w;
}

TopEigenvectorResult top_eigenvector(Cluster& cluster, const SolverConfig& cfg,
                                     std::optional<double> eta,
                                     Index trace_index) {
    InitEstimates init = init_estimates(cluster, cfg, eta);
    cluster.set_shift(init.shift);

    TopEigenvectorResult result;
    result.shift = init.shift;
    result.eta = init.eta;
    result.kappa = init.kappa;
    result.w = init.w0;
    result.trace.reserve(static_cast<std::size_t>(cfg.T));
    for (Index t = 0; t < cfg.T; ++t) {
        Vector next = inner_solve(cluster, result.w, result.w, cfg.T_inner);
        double norm = next.norm();
        if (norm < 1e-14) {
            throw ZeroIterateError("outer iteration " + std::to_string(t + 1) +
                                   " collapsed to zero");
        }
        result.w = next / norm;
        result.trace.push_back(
            {trace_index, t + 1, result.w,
             cluster.ledger().workers[0].uplink_gradient_bytes});
    }
    return result;
}

namespace {

// Shared deflation loop. stop_at_l is the column budget; when delta_stop is
// set, columns past cfg.L are kept only while their Rayleigh quotient stays
// above (1 - delta) times column L's.
SolverResult subspace_loop(Cluster& cluster, const SolverConfig& cfg,
                           Index stop_at_l, bool delta_stop) {
    validate(cfg);
    const Index d = cluster.dim();
    SolverResult result;
    result.V.resize(d, 0);
    std::optional<double> eta;  // computed once, at the first column

    for (Index l = 1; l <= stop_at_l; ++l) {
        cluster.begin_eigenvector();
        TopEigenvectorResult top = top_eigenvector(cluster, cfg, eta, l);
        if (!eta) {
            eta = top.eta;
            result.eta = top.eta;
            result.kappa = top.kappa;
        }

        // Iterations keep w only approximately orthogonal to the deflated
        // panel; project explicitly before accepting it as a column.
        Vector v = top.w;
        if (result.V.cols() > 0) {
            v -= result.V * (result.V.transpose() * v);
        }
        double norm = v.norm();
        if (norm < 1e-10) {
            throw DeflationCollapseError("column " + std::to_string(l) +
                                         " vanished after projection");
        }
        v /= norm;

        double value = cluster.rayleigh(v);  // on the still-deflated operator
        if (delta_stop && l > cfg.L) {
            double floor =
                (1.0 - cfg.delta) * result.rayleigh[static_cast<std::size_t>(cfg.L - 1)];
            if (value <= floor) {
                break;  // S = l - 1 columns already collected
            }
        }

        result.V.conservativeResize(Eigen::NoChange, result.V.cols() + 1);
        result.V.col(result.V.cols() - 1) = v;
        result.rayleigh.push_back(value);
        result.shifts.push_back(top.shift);
        for (auto& row : top.trace) {
            result.trace.push_back(std::move(row));
        }
        cluster.apply_deflation(v);
    }
    result.S = result.V.cols();
    result.s_hit_dimension = delta_stop && result.S == d;
    result.ledger = cluster.ledger();
    return result;
}

}  // namespace

SolverResult top_L_subspace(Cluster& cluster, const SolverConfig& cfg) {
    if (cfg.L > cluster.dim()) {
        throw Error("top_L_subspace: L exceeds the data dimension");
    }
    return subspace_loop(cluster, cfg, cfg.L, false);
}

SolverResult enlarged_subspace(Cluster& cluster, const SolverConfig& cfg) {
    if (cfg.L > cluster.dim()) {
        throw Error("enlarged_subspace: L exceeds the data dimension");
    }
    return subspace_loop(cluster, cfg, cluster.dim(), true);
}

}  // namespace deig
