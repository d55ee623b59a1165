#include <deig/experiment.hpp>

#include <deig/apps.hpp>
#include <deig/baselines.hpp>
#include <deig/errors.hpp>
#include <deig/linalg.hpp>
#include <deig/metrics.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace deig {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// One point of the sweep grid; fields that do not apply hold sentinels.
struct Cell {
    Index k = 0;
    double delta = kNaN;
    Index t_inner = 0;
    double skewness = kNaN;
    double sigma2 = kNaN;
    SimLink link = SimLink::square;
    bool has_link = false;
};

std::string link_name(SimLink link) {
    switch (link) {
        case SimLink::square: return "square";
        case SimLink::abs_value: return "abs";
        case SimLink::mix: return "mix";
    }
    return "?";
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
    bool machines = spec.kind == ExperimentKind::vary_machines;
    bool is_pcr = spec.kind == ExperimentKind::pcr;
    bool is_sim = spec.kind == ExperimentKind::sim;

    std::vector<double> skews = machines ? spec.skewness_list : std::vector<double>{kNaN};
    std::vector<double> sigmas =
        (is_pcr || is_sim) ? spec.sigma2_list : std::vector<double>{kNaN};
    std::vector<double> deltas =
        is_sim ? std::vector<double>{kNaN} : spec.delta_list;
    std::vector<SimLink> links =
        is_sim ? spec.link_list : std::vector<SimLink>{SimLink::square};

    std::vector<Cell> cells;
    for (Index k : spec.k_list)
        for (double delta : deltas)
            for (Index tp : spec.t_inner_list)
                for (double skew : skews)
                    for (double s2 : sigmas)
                        for (SimLink link : links) {
                            cells.push_back({k, delta, tp, skew, s2, link, is_sim});
                        }
    return cells;
}

std::vector<std::string> methods_for(ExperimentKind kind) {
    if (kind == ExperimentKind::sim) return {"ours", "oracle"};
    return {"ours", "dc", "oracle"};
}

double elapsed_ms(std::chrono::steady_clock::time_point from) {
    auto d = std::chrono::steady_clock::now() - from;
    return std::chrono::duration<double, std::milli>(d).count();
}

SolverConfig solver_config(const ExperimentSpec& spec, const Cell& cell, Index t_max,
                           double solver_delta) {
    SolverConfig cfg;
    cfg.T = t_max;
    cfg.T_inner = cell.t_inner;
    cfg.eta_mode = spec.eta_mode;
    cfg.c0 = spec.c0;
    cfg.probe_factor = spec.probe_factor;
    cfg.eta_override = spec.eta_override;
    cfg.delta = solver_delta;
    cfg.L = spec.l_count;
    cfg.warn_eta = false;
    return cfg;
}

Matrix pooled_stein(const Matrix& a, const Vector& y) {
    auto n = static_cast<double>(a.rows());
    Matrix m = a.transpose() * y.asDiagonal() * a / n;
    m -= (y.sum() / n) * Matrix::Identity(a.cols(), a.cols());
    return (m + m.transpose()) / 2.0;
}

// Uplink payload conventions for the one-shot baselines: the DC estimator
// ships one d x L eigenbasis per worker; the pooled oracle ships the whole
// m x d shard.
std::uint64_t dc_uplink(Index d, Index l_count) {
    return 8u * static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(l_count);
}
std::uint64_t oracle_uplink(Index d, Index m) {
    return 8u * static_cast<std::uint64_t>(d) * static_cast<std::uint64_t>(m);
}

struct MethodOutcome {
    double error = 0.0;
    double wall_ms = -1.0;
    std::uint64_t uplink = 0;
};

// Everything one repetition produces for one cell: per-method outcomes,
// indexed [method][t_ordinal].
using CellOutcomes = std::vector<std::vector<MethodOutcome>>;

CellOutcomes run_vary_cell(const ExperimentSpec& spec, const Cell& cell,
                           std::uint64_t data_seed) {
    CovarianceModel model =
        make_covariance({.d = spec.d, .delta = cell.delta, .top_count = 3,
                         .seed = spec.base_seed});
    Index n = spec.m * cell.k;
    bool skewed = spec.kind == ExperimentKind::vary_machines;
    Dataset data = skewed
                       ? sample_skewed(n, model.lambda, cell.skewness, data_seed)
                       : sample_gaussian(n, model.sigma, data_seed);
    auto parts = shard(data.a, balanced_sizes(n, cell.k), data_seed + 1);
    // Population reference frame: skewed innovations use no rotation.
    SpectrumReference ref{model.lambda,
                          skewed ? Matrix(Matrix::Identity(spec.d, spec.d)) : model.u};
    double metric_delta = (ref.values(0) - ref.values(1)) / ref.values(0);
    Index t_max = *std::max_element(spec.t_list.begin(), spec.t_list.end());

    CellOutcomes out(3, std::vector<MethodOutcome>(spec.t_list.size()));

    auto start = std::chrono::steady_clock::now();
    Cluster cluster(parts, {}, OperatorKind::covariance, spec.transport);
    TopEigenvectorResult run =
        top_eigenvector(cluster, solver_config(spec, cell, t_max, 0.5));
    double ours_ms = elapsed_ms(start);
    for (std::size_t i = 0; i < spec.t_list.size(); ++i) {
        const TraceRow& row = run.trace[static_cast<std::size_t>(spec.t_list[i] - 1)];
        out[0][i] = {gapfree_error_top1(ref, row.iterate, metric_delta), ours_ms,
                     row.uplink_gradient_bytes};
    }

    start = std::chrono::steady_clock::now();
    BaselineResult dc = dc_pca(parts, 1);
    double dc_err = gapfree_error_top1(ref, Vector(dc.u_hat.col(0)), metric_delta);
    double dc_ms = elapsed_ms(start);

    start = std::chrono::steady_clock::now();
    BaselineResult orc = oracle_pca(data.a, 1);
    double orc_err = gapfree_error_top1(ref, Vector(orc.u_hat.col(0)), metric_delta);
    double orc_ms = elapsed_ms(start);

    for (std::size_t i = 0; i < spec.t_list.size(); ++i) {
        out[1][i] = {dc_err, dc_ms, dc_uplink(spec.d, 1)};
        out[2][i] = {orc_err, orc_ms, oracle_uplink(spec.d, spec.m)};
    }
    return out;
}

CellOutcomes run_pcr_cell(const ExperimentSpec& spec, const Cell& cell,
                          std::uint64_t data_seed) {
    CovarianceModel model =
        make_covariance({.d = spec.d, .delta = cell.delta, .top_count = 3,
                         .seed = spec.base_seed});
    Index n = spec.m * cell.k;
    Dataset inst =
        make_pcr_instance(model, n, cell.sigma2, data_seed, spec.base_seed);
    Shards parts = shard(inst, balanced_sizes(n, cell.k), data_seed + 1);
    Index L = spec.l_count;
    double solver_delta =
        (model.lambda(L - 1) - model.lambda(L)) / model.lambda(L - 1);

    CellOutcomes out(3, std::vector<MethodOutcome>(1));

    auto start = std::chrono::steady_clock::now();
    Cluster cluster(parts.a, parts.y, OperatorKind::covariance, spec.transport);
    SolverConfig cfg = solver_config(spec, cell, spec.t_list[0], solver_delta);
    cfg.enlarge = true;
    SolverResult res = enlarged_subspace(cluster, cfg);
    PcrFit ours = pcr_fit(cluster, res.V);
    out[0][0] = {pcr_prediction_error(inst.a, ours.beta, inst.truth.beta),
                 elapsed_ms(start),
                 cluster.ledger().workers[0].uplink_gradient_bytes};

    start = std::chrono::steady_clock::now();
    BaselineResult dcb = dc_pca(parts.a, L);
    PcrFit dc_fit = pcr_fit(cluster, dcb.u_hat);
    out[1][0] = {pcr_prediction_error(inst.a, dc_fit.beta, inst.truth.beta),
                 elapsed_ms(start), dc_uplink(spec.d, L)};

    start = std::chrono::steady_clock::now();
    BaselineResult ob = oracle_pca(inst.a, L);
    Matrix projected = inst.a * ob.u_hat;
    Vector gamma = SpdFactor(Matrix(projected.transpose() * projected))
                       .solve(Vector(projected.transpose() * inst.y));
    Vector beta = ob.u_hat * gamma;
    out[2][0] = {pcr_prediction_error(inst.a, beta, inst.truth.beta),
                 elapsed_ms(start), oracle_uplink(spec.d, spec.m)};
    return out;
}

CellOutcomes run_sim_cell(const ExperimentSpec& spec, const Cell& cell,
                          std::uint64_t data_seed) {
    Index n = spec.m * cell.k;
    Dataset inst = make_sim_instance(spec.d, n, cell.link, cell.sigma2, data_seed);
    Shards parts = shard(inst, balanced_sizes(n, cell.k), data_seed + 1);

    CellOutcomes out(2, std::vector<MethodOutcome>(1));

    auto start = std::chrono::steady_clock::now();
    Cluster cluster(parts.a, parts.y, OperatorKind::stein, spec.transport);
    Vector beta = sim_fit(cluster, solver_config(spec, cell, spec.t_list[0], 0.5));
    out[0][0] = {sign_corrected_l2(beta, inst.truth.beta), elapsed_ms(start),
                 cluster.ledger().workers[0].uplink_gradient_bytes};

    start = std::chrono::steady_clock::now();
    EigenDecomposition eig = sym_eigendecompose(pooled_stein(inst.a, inst.y));
    out[1][0] = {sign_corrected_l2(Vector(eig.vectors.col(0)), inst.truth.beta),
                 elapsed_ms(start), oracle_uplink(spec.d, spec.m)};
    return out;
}

CellOutcomes run_cell(const ExperimentSpec& spec, const Cell& cell,
                      std::uint64_t data_seed) {
    switch (spec.kind) {
        case ExperimentKind::pcr: return run_pcr_cell(spec, cell, data_seed);
        case ExperimentKind::sim: return run_sim_cell(spec, cell, data_seed);
        default: return run_vary_cell(spec, cell, data_seed);
    }
}

RunRecord base_record(const ExperimentSpec& spec, const Cell& cell) {
    RunRecord rec;
    rec.kind = kind_name(spec.kind);
    rec.d = spec.d;
    rec.m = spec.m;
    rec.k = cell.k;
    rec.delta = cell.delta;
    rec.l_count = spec.l_count;
    rec.t_inner = cell.t_inner;
    rec.skewness = cell.skewness;
    rec.sigma2 = cell.sigma2;
    rec.link = cell.has_link ? link_name(cell.link) : "";
    return rec;
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::vary_outer_iterations: return "vary-outer-iterations";
        case ExperimentKind::vary_eigengap: return "vary-eigengap";
        case ExperimentKind::vary_machines: return "vary-machines";
        case ExperimentKind::pcr: return "pcr";
        case ExperimentKind::sim: return "sim";
    }
    return "?";
}

std::vector<std::string> preset_names() {
    return {"fig1", "fig2", "fig3", "fig4", "pcr", "sim"};
}

ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s;
    s.monte_carlo = 20;  // published runs use 100; desk default keeps it light
    s.base_seed = 1;
    if (name == "fig1" || name == "fig2") {
        s.kind = ExperimentKind::vary_outer_iterations;
        s.d = 50;
        s.m = 500;
        s.k_list = {200};
        s.delta_list = {name == "fig2" ? 2.0 : 1.0};
        s.t_list.clear();
        for (Index t = 1; t <= 30; ++t) s.t_list.push_back(t);
        s.t_inner_list = {5, 10};
    } else if (name == "fig3") {
        s.kind = ExperimentKind::vary_eigengap;
        s.d = 50;
        s.m = 500;
        s.k_list = {200};
        s.delta_list = {2.0, 1.0, 0.5, 0.25};
        s.t_list = {40};
        s.t_inner_list = {10};
    } else if (name == "fig4") {
        s.kind = ExperimentKind::vary_machines;
        s.d = 50;
        s.m = 500;
        s.k_list.clear();
        for (Index k = 100; k <= 51200; k *= 2) s.k_list.push_back(k);
        s.delta_list = {0.5};
        s.skewness_list = {4.0, 6.0};
        s.t_list = {200};
        s.t_inner_list = {10};
    } else if (name == "pcr") {
        s.kind = ExperimentKind::pcr;
        s.d = 50;
        s.m = 500;
        s.k_list = {20};
        s.delta_list = {1.0};
        s.l_count = 3;
        s.sigma2_list = {0.2, 0.5};
        s.t_list = {40};
        s.t_inner_list = {10};
    } else if (name == "sim") {
        s.kind = ExperimentKind::sim;
        s.d = 10;
        s.m = 10000;
        s.k_list = {10};
        s.link_list = {SimLink::square, SimLink::abs_value, SimLink::mix};
        s.sigma2_list = {0.1};
        s.t_list = {30};
        s.t_inner_list = {10};
    } else {
        throw ParseError("unknown preset '" + name + "'");
    }
    return s;
}

namespace {

Index parse_index(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used != v.size() || x < 0) throw std::invalid_argument("range");
        return static_cast<Index>(x);
    } catch (const std::exception&) {
        throw ParseError(where + ": expected a nonnegative integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ParseError(where + ": expected a number, got '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        parts.push_back(item);
    }
    return parts;
}

}  // namespace

ExperimentSpec parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentSpec spec;
    bool have_kind = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = origin + ":" + std::to_string(lineno);
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto notspace = [](unsigned char c) { return !std::isspace(c); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(where + ": expected key=value, got '" + line + "'");
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());
        if (value.empty()) throw ParseError(where + ": empty value for '" + key + "'");

        if (key == "kind") {
            have_kind = true;
            if (value == "vary-outer-iterations") {
                spec.kind = ExperimentKind::vary_outer_iterations;
            } else if (value == "vary-eigengap") {
                spec.kind = ExperimentKind::vary_eigengap;
            } else if (value == "vary-machines") {
                spec.kind = ExperimentKind::vary_machines;
            } else if (value == "pcr") {
                spec.kind = ExperimentKind::pcr;
            } else if (value == "sim") {
                spec.kind = ExperimentKind::sim;
            } else {
                throw ParseError(where + ": unknown kind '" + value + "'");
            }
        } else if (key == "d") {
            spec.d = parse_index(value, where);
        } else if (key == "m") {
            spec.m = parse_index(value, where);
        } else if (key == "k") {
            spec.k_list.clear();
            for (const auto& p : split_list(value))
                spec.k_list.push_back(parse_index(p, where));
        } else if (key == "delta") {
            spec.delta_list.clear();
            for (const auto& p : split_list(value))
                spec.delta_list.push_back(parse_double(p, where));
        } else if (key == "l") {
            spec.l_count = parse_index(value, where);
        } else if (key == "t") {
            spec.t_list.clear();
            for (const auto& p : split_list(value))
                spec.t_list.push_back(parse_index(p, where));
        } else if (key == "t_inner") {
            spec.t_inner_list.clear();
            for (const auto& p : split_list(value))
                spec.t_inner_list.push_back(parse_index(p, where));
        } else if (key == "eta_mode") {
            if (value == "c0") {
                spec.eta_mode = EtaMode::c0;
            } else if (value == "probe") {
                spec.eta_mode = EtaMode::probe;
            } else if (value == "corollary") {
                spec.eta_mode = EtaMode::corollary;
            } else if (value == "override") {
                spec.eta_mode = EtaMode::override_value;
            } else {
                throw ParseError(where + ": unknown eta_mode '" + value + "'");
            }
        } else if (key == "c0") {
            spec.c0 = parse_double(value, where);
        } else if (key == "probe_factor") {
            spec.probe_factor = parse_double(value, where);
        } else if (key == "eta_override") {
            spec.eta_override = parse_double(value, where);
        } else if (key == "skewness") {
            spec.skewness_list.clear();
            for (const auto& p : split_list(value))
                spec.skewness_list.push_back(parse_double(p, where));
        } else if (key == "sigma2") {
            spec.sigma2_list.clear();
            for (const auto& p : split_list(value))
                spec.sigma2_list.push_back(parse_double(p, where));
        } else if (key == "link") {
            spec.link_list.clear();
            for (const auto& p : split_list(value)) {
                if (p == "square") {
                    spec.link_list.push_back(SimLink::square);
                } else if (p == "abs") {
                    spec.link_list.push_back(SimLink::abs_value);
                } else if (p == "mix") {
                    spec.link_list.push_back(SimLink::mix);
                } else {
                    throw ParseError(where + ": unknown link '" + p + "'");
                }
            }
        } else if (key == "mc") {
            spec.monte_carlo = parse_index(value, where);
        } else if (key == "seed") {
            spec.base_seed = static_cast<std::uint64_t>(parse_index(value, where));
        } else if (key == "transport") {
            if (value == "memory") {
                spec.transport = TransportKind::memory;
            } else if (value == "tcp") {
                spec.transport = TransportKind::tcp;
            } else {
                throw ParseError(where + ": unknown transport '" + value + "'");
            }
        } else if (key == "out") {
            spec.out = value;
        } else if (key == "timings") {
            if (value == "true" || value == "1") {
                spec.timings = true;
            } else if (value == "false" || value == "0") {
                spec.timings = false;
            } else {
                throw ParseError(where + ": expected true/false for timings");
            }
        } else {
            throw ParseError(where + ": unknown key '" + key + "'");
        }
    }
    if (!have_kind) {
        throw ParseError(origin + ": missing required key 'kind'");
    }
    // Kind-specific defaults for sweeps the config did not mention.
    if (spec.kind == ExperimentKind::vary_machines && spec.skewness_list.empty()) {
        spec.skewness_list = {4.0};
    }
    if (spec.kind == ExperimentKind::pcr && spec.sigma2_list.empty()) {
        spec.sigma2_list = {0.2};
    }
    if (spec.kind == ExperimentKind::sim) {
        if (spec.sigma2_list.empty()) spec.sigma2_list = {0.1};
        if (spec.link_list.empty()) spec.link_list = {SimLink::square};
    }
    return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

void validate_spec(const ExperimentSpec& spec) {
    auto fail = [](const std::string& msg) { throw ParseError("spec invalid: " + msg); };
    if (spec.d < 2) fail("d must be at least 2");
    if (spec.m < 1) fail("m must be positive");
    if (spec.k_list.empty()) fail("k list must be nonempty");
    for (Index k : spec.k_list)
        if (k < 1) fail("every k must be positive");
    if (spec.delta_list.empty()) fail("delta list must be nonempty");
    for (double delta : spec.delta_list)
        if (!(delta > 0.0)) fail("every delta must be positive");
    if (spec.l_count < 1 || spec.l_count > spec.d) fail("l must lie in [1, d]");
    if (spec.t_list.empty()) fail("t list must be nonempty");
    for (Index t : spec.t_list)
        if (t < 1) fail("every t must be positive");
    if (spec.t_inner_list.empty()) fail("t_inner list must be nonempty");
    for (Index tp : spec.t_inner_list)
        if (tp < 1) fail("every t_inner must be positive");
    if (!(spec.c0 > 0.0)) fail("c0 must be positive");
    if (!(spec.probe_factor > 0.0)) fail("probe_factor must be positive");
    if (spec.monte_carlo < 1) fail("mc must be at least 1");

    bool iterative_top1 = spec.kind == ExperimentKind::vary_outer_iterations ||
                          spec.kind == ExperimentKind::vary_eigengap ||
                          spec.kind == ExperimentKind::vary_machines;
    if (iterative_top1 && spec.l_count != 1) {
        fail(kind_name(spec.kind) + " evaluates the top eigenvector; l must be 1");
    }
    if (spec.kind == ExperimentKind::vary_machines && spec.skewness_list.empty()) {
        fail("vary-machines needs a skewness list");
    }
    if (spec.kind == ExperimentKind::pcr || spec.kind == ExperimentKind::sim) {
        if (spec.t_list.size() != 1 || spec.t_inner_list.size() != 1) {
            fail(kind_name(spec.kind) + " takes single t and t_inner values");
        }
        if (spec.sigma2_list.empty()) fail("sigma2 list must be nonempty");
        for (double s2 : spec.sigma2_list)
            if (s2 < 0.0) fail("sigma2 must be nonnegative");
    }
    if (spec.kind == ExperimentKind::pcr && spec.delta_list.size() != 1) {
        fail("pcr takes a single delta");
    }
    if (spec.kind == ExperimentKind::sim && spec.link_list.empty()) {
        fail("sim needs a link list");
    }
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);
    std::vector<Cell> cells = expand_cells(spec);
    std::vector<std::string> methods = methods_for(spec.kind);
    bool sweep_t = spec.kind != ExperimentKind::pcr && spec.kind != ExperimentKind::sim;
    std::vector<Index> ts = sweep_t ? spec.t_list : std::vector<Index>{spec.t_list[0]};

    // outcomes[rep][cell][method][t_ordinal]
    std::vector<std::vector<CellOutcomes>> outcomes(
        static_cast<std::size_t>(spec.monte_carlo));
    for (Index rep = 0; rep < spec.monte_carlo; ++rep) {
        auto& per_cell = outcomes[static_cast<std::size_t>(rep)];
        per_cell.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::uint64_t data_seed = spec.base_seed +
                                      7919u * (static_cast<std::uint64_t>(rep) + 1) +
                                      104729u * (static_cast<std::uint64_t>(c) + 1);
            per_cell.push_back(run_cell(spec, cells[c], data_seed));
        }
    }

    std::vector<RunRecord> rows;
    auto emit = [&](const std::string& rep_label, std::size_t c, std::size_t mi,
                    std::size_t ti, const MethodOutcome& o) {
        RunRecord rec = base_record(spec, cells[c]);
        rec.rep = rep_label;
        rec.t = ts[ti];
        rec.method = methods[mi];
        rec.error = o.error;
        rec.wall_ms = spec.timings ? o.wall_ms : -1.0;
        rec.uplink_bytes = o.uplink;
        rows.push_back(std::move(rec));
    };

    for (Index rep = 0; rep < spec.monte_carlo; ++rep) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            for (std::size_t ti = 0; ti < ts.size(); ++ti) {
                for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                    emit(std::to_string(rep), c, mi, ti,
                         outcomes[static_cast<std::size_t>(rep)][c][mi][ti]);
                }
            }
        }
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::size_t ti = 0; ti < ts.size(); ++ti) {
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                MethodOutcome mean;
                double err_sum = 0.0, wall_sum = 0.0;
                for (Index rep = 0; rep < spec.monte_carlo; ++rep) {
                    const MethodOutcome& o =
                        outcomes[static_cast<std::size_t>(rep)][c][mi][ti];
                    err_sum += o.error;
                    wall_sum += o.wall_ms;
                }
                auto reps = static_cast<double>(spec.monte_carlo);
                mean.error = err_sum / reps;
                mean.wall_ms = wall_sum / reps;
                mean.uplink = outcomes[0][c][mi][ti].uplink;
                emit("mean", c, mi, ti, mean);
            }
        }
    }

    if (!spec.out.empty()) {
        std::ofstream out(spec.out, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open output file '" + spec.out + "'");
        out << to_csv(rows);
        if (!out) throw IoError("failed writing output file '" + spec.out + "'");
    }
    return rows;
}

std::string to_csv(const std::vector<RunRecord>& rows) {
    std::string csv =
        "kind,rep,d,m,k,delta,l,t,t_inner,skewness,sigma2,link,method,error,"
        "log10_error,wall_time_ms,uplink_bytes\n";
    auto opt = [](double x) { return std::isnan(x) ? std::string() : format17(x); };
    for (const RunRecord& r : rows) {
        csv += r.kind + ',' + r.rep + ',';
        csv += std::to_string(r.d) + ',' + std::to_string(r.m) + ',' +
               std::to_string(r.k) + ',';
        csv += opt(r.delta) + ',';
        csv += std::to_string(r.l_count) + ',' + std::to_string(r.t) + ',' +
               std::to_string(r.t_inner) + ',';
        csv += opt(r.skewness) + ',' + opt(r.sigma2) + ',' + r.link + ',';
        csv += r.method + ',';
        csv += format17(r.error) + ',';
        csv += format17(std::log10(std::max(r.error, 1e-300))) + ',';
        csv += (r.wall_ms < 0.0 ? std::string() : format17(r.wall_ms)) + ',';
        csv += std::to_string(r.uplink_bytes) + '\n';
    }
    return csv;
}

int generate_datasets(const ExperimentSpec& spec, const std::string& dir) {
    validate_spec(spec);
    std::filesystem::create_directories(dir);
    std::vector<Cell> cells = expand_cells(spec);
    int written = 0;
    for (Index rep = 0; rep < spec.monte_carlo; ++rep) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const Cell& cell = cells[c];
            std::uint64_t data_seed = spec.base_seed +
                                      7919u * (static_cast<std::uint64_t>(rep) + 1) +
                                      104729u * (static_cast<std::uint64_t>(c) + 1);
            Index n = spec.m * cell.k;
            Dataset data;
            switch (spec.kind) {
                case ExperimentKind::pcr: {
                    CovarianceModel model = make_covariance(
                        {.d = spec.d, .delta = cell.delta, .top_count = 3,
                         .seed = spec.base_seed});
                    data = make_pcr_instance(model, n, cell.sigma2, data_seed,
                                             spec.base_seed);
                    break;
                }
                case ExperimentKind::sim:
                    data = make_sim_instance(spec.d, n, cell.link, cell.sigma2,
                                             data_seed);
                    break;
                default: {
                    CovarianceModel model = make_covariance(
                        {.d = spec.d, .delta = cell.delta, .top_count = 3,
                         .seed = spec.base_seed});
                    data = spec.kind == ExperimentKind::vary_machines
                               ? sample_skewed(n, model.lambda, cell.skewness,
                                               data_seed)
                               : sample_gaussian(n, model.sigma, data_seed);
                    break;
                }
            }
            std::string path = dir + "/" + kind_name(spec.kind) + "_rep" +
                               std::to_string(rep) + "_cell" + std::to_string(c);
            save_dataset(path, data);
            ++written;
        }
    }
    return written;
}

}  // namespace deig
