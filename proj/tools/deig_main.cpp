#include <CLI11.hpp>

#include <deig/errors.hpp>
#include <deig/experiment.hpp>

#include <cstdio>
#include <string>

namespace {

std::string join_indices(const std::vector<deig::Index>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(xs[i]);
    }
    return s;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string s;
    char buf[32];
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        std::snprintf(buf, sizeof(buf), "%g", xs[i]);
        s += buf;
    }
    return s;
}

void list_presets() {
    for (const std::string& name : deig::preset_names()) {
        deig::ExperimentSpec s = deig::preset(name);
        std::string ts = s.t_list.size() > 4
                             ? std::to_string(s.t_list.front()) + ".." +
                                   std::to_string(s.t_list.back())
                             : join_indices(s.t_list);
        std::printf("%-5s kind=%s d=%lld m=%lld k=%s delta=%s l=%lld t=%s t_inner=%s mc=%lld\n",
                    name.c_str(), deig::kind_name(s.kind).c_str(),
                    static_cast<long long>(s.d), static_cast<long long>(s.m),
                    join_indices(s.k_list).c_str(),
                    join_doubles(s.delta_list).c_str(),
                    static_cast<long long>(s.l_count), ts.c_str(),
                    join_indices(s.t_inner_list).c_str(),
                    static_cast<long long>(s.monte_carlo));
    }
    std::printf("(published runs used 100 Monte-Carlo repetitions; presets default to 20)\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed eigenvector estimation experiments"};
    app.require_subcommand(1);

    std::string preset_name, config_path, out_path, transport;
    long long mc = -1, seed = -1;
    bool timings = false;

    CLI::App* run = app.add_subcommand("run", "execute an experiment, write a CSV");
    CLI::App* gen = app.add_subcommand("gen", "write the datasets an experiment would consume");
    app.add_subcommand("presets", "list the named configurations");

    for (CLI::App* cmd : {run, gen}) {
        auto* p = cmd->add_option("--preset", preset_name, "named configuration");
        auto* c = cmd->add_option("--config", config_path, "key=value config file");
        p->excludes(c);
        cmd->add_option("--mc", mc, "Monte-Carlo repetition count override");
        cmd->add_option("--seed", seed, "base seed override");
    }
    run->add_option("--out", out_path, "CSV output path (default <kind>.csv)");
    run->add_option("--transport", transport, "memory|tcp")
        ->check(CLI::IsMember({"memory", "tcp"}));
    run->add_flag("--timings", timings, "fill the wall-time column");
    gen->add_option("--out", out_path, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand("presets")) {
            list_presets();
            return 0;
        }
        if (preset_name.empty() && config_path.empty()) {
            throw deig::ParseError("need --preset or --config");
        }
        deig::ExperimentSpec spec = preset_name.empty()
                                        ? deig::parse_config_file(config_path)
                                        : deig::preset(preset_name);
        if (mc >= 0) spec.monte_carlo = static_cast<deig::Index>(mc);
        if (seed >= 0) spec.base_seed = static_cast<std::uint64_t>(seed);

        if (app.got_subcommand("gen")) {
            deig::validate_spec(spec);
            int files = deig::generate_datasets(spec, out_path);
            std::printf("wrote %d dataset(s) under %s\n", files, out_path.c_str());
            return 0;
        }

        // run
        if (!transport.empty()) {
            spec.transport = transport == "tcp" ? deig::TransportKind::tcp
                                                : deig::TransportKind::memory;
        }
        if (timings) spec.timings = true;
        if (!out_path.empty()) spec.out = out_path;
        if (spec.out.empty()) spec.out = deig::kind_name(spec.kind) + ".csv";
        deig::validate_spec(spec);
        auto rows = deig::run_experiment(spec);
        std::printf("wrote %zu row(s) to %s\n", rows.size(), spec.out.c_str());
        return 0;
    } catch (const deig::ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
