#pragma once

#include <deig/cluster.hpp>
#include <deig/datagen.hpp>
#include <deig/solver.hpp>
#include <deig/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace deig {

// The five experiment families the CLI can run.
enum class ExperimentKind {
    vary_outer_iterations,  // error vs outer iteration count T, top eigenvector
    vary_eigengap,          // error vs covariance gap parameter, fixed T
    vary_machines,          // error vs worker count on skewed innovations
    pcr,                    // principal component regression prediction error
    sim,                    // single-index direction recovery
};

std::string kind_name(ExperimentKind kind);

// Flat experiment description.  List-valued fields are sweeps; the cell grid
// is their cartesian product (fields that do not apply to a kind are
// ignored).  Everything that affects results is in here, so a spec fully
// determines the output.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::vary_outer_iterations;
    Index d = 20;
    Index m = 200;
    std::vector<Index> k_list = {20};
    std::vector<double> delta_list = {1.0};
    Index l_count = 1;
    std::vector<Index> t_list = {30};
    std::vector<Index> t_inner_list = {5};
    EtaMode eta_mode = EtaMode::probe;
    double c0 = 1.0;
    double probe_factor = 2.0;
    double eta_override = 0.0;
    std::vector<double> skewness_list;  // vary_machines only
    std::vector<double> sigma2_list;    // pcr and sim only
    std::vector<SimLink> link_list;     // sim only
    Index monte_carlo = 20;
    std::uint64_t base_seed = 1;
    TransportKind transport = TransportKind::memory;
    std::string out;      // CSV path; empty = do not write a file
    bool timings = false; // fill the wall-time column
};

// One CSV row.  Fields that do not apply hold NaN (printed empty) or an
// empty string.  rep is the repetition index or "mean" for the aggregate row.
struct RunRecord {
    std::string kind;
    std::string rep;
    Index d = 0;
    Index m = 0;
    Index k = 0;
    double delta = 0.0;
    Index l_count = 0;
    Index t = 0;
    Index t_inner = 0;
    double skewness = 0.0;
    double sigma2 = 0.0;
    std::string link;
    std::string method;  // ours | dc | oracle
    double error = 0.0;
    double wall_ms = -1.0;  // negative = not measured, printed empty
    std::uint64_t uplink_bytes = 0;
};

// Named configurations at the published scale (monte_carlo kept at the desk
// default of 20).  Throws ParseError for an unknown name.
ExperimentSpec preset(const std::string& name);
std::vector<std::string> preset_names();

// key=value per line, '#' comments, blank lines allowed.  Unknown keys and
// malformed values raise ParseError naming the offending line.
ExperimentSpec parse_config_text(const std::string& text, const std::string& origin);
ExperimentSpec parse_config_file(const std::string& path);

// Checks ranges and kind-specific requirements; throws ParseError.
void validate_spec(const ExperimentSpec& spec);

// Runs every (repetition, cell, method) combination, appends the mean rows,
// and writes the CSV to spec.out when set.  Identical ExperimentSpec values
// produce identical rows.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

// Fixed-schema CSV, 17 significant digits for floating-point fields.
std::string to_csv(const std::vector<RunRecord>& rows);

// Writes the raw datasets a run_experiment call would consume, one file set
// per (repetition, cell), under directory `dir`.  Returns the file count.
int generate_datasets(const ExperimentSpec& spec, const std::string& dir);

}  // namespace deig
