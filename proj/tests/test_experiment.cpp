#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deig/errors.hpp>
#include <deig/experiment.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace deig;

namespace {

ExperimentSpec tiny_vary_spec() {
    ExperimentSpec s;
    s.kind = ExperimentKind::vary_outer_iterations;
    s.d = 8;
    s.m = 50;
    s.k_list = {4};
    s.delta_list = {1.0};
    s.t_list = {1, 2};
    s.t_inner_list = {3};
    s.monte_carlo = 1;
    s.base_seed = 7;
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

}  // namespace

TEST_CASE("presets carry the published settings") {
    ExperimentSpec fig1 = preset("fig1");
    CHECK(fig1.kind == ExperimentKind::vary_outer_iterations);
    CHECK(fig1.d == 50);
    CHECK(fig1.m == 500);
    CHECK(fig1.k_list == std::vector<Index>{200});
    CHECK(fig1.delta_list == std::vector<double>{1.0});
    CHECK(fig1.t_inner_list == std::vector<Index>{5, 10});
    CHECK(fig1.t_list.size() == 30);

    CHECK(preset("fig2").delta_list == std::vector<double>{2.0});

    ExperimentSpec fig3 = preset("fig3");
    CHECK(fig3.kind == ExperimentKind::vary_eigengap);
    CHECK(fig3.delta_list == std::vector<double>{2.0, 1.0, 0.5, 0.25});
    CHECK(fig3.t_list == std::vector<Index>{40});
    CHECK(fig3.t_inner_list == std::vector<Index>{10});

    ExperimentSpec fig4 = preset("fig4");
    CHECK(fig4.kind == ExperimentKind::vary_machines);
    CHECK(fig4.k_list.front() == 100);
    CHECK(fig4.k_list.back() == 51200);
    CHECK(fig4.skewness_list == std::vector<double>{4.0, 6.0});

    CHECK(preset("pcr").l_count == 3);
    CHECK(preset("sim").link_list.size() == 3);
    for (const auto& name : preset_names()) {
        CHECK_NOTHROW(validate_spec(preset(name)));
    }
    CHECK_THROWS_AS(preset("fig9"), ParseError);
}

TEST_CASE("config text round-trips every key") {
    std::string text =
        "# comment line\n"
        "kind = vary-machines\n"
        "d=12\n"
        "m=60\n"
        "k=2, 4,8\n"
        "delta=0.5\n"
        "l=1\n"
        "t=7\n"
        "t_inner=4\n"
        "eta_mode=probe\n"
        "probe_factor=1.5\n"
        "skewness=4,6\n"
        "mc=3\n"
        "seed=99\n"
        "transport=tcp\n"
        "out=somewhere.csv\n"
        "timings=true\n";
    ExperimentSpec s = parse_config_text(text, "inline");
    CHECK(s.kind == ExperimentKind::vary_machines);
    CHECK(s.d == 12);
    CHECK(s.m == 60);
    CHECK(s.k_list == std::vector<Index>{2, 4, 8});
    CHECK(s.delta_list == std::vector<double>{0.5});
    CHECK(s.t_list == std::vector<Index>{7});
    CHECK(s.t_inner_list == std::vector<Index>{4});
    CHECK(s.eta_mode == EtaMode::probe);
    CHECK(s.probe_factor == 1.5);
    CHECK(s.skewness_list == std::vector<double>{4.0, 6.0});
    CHECK(s.monte_carlo == 3);
    CHECK(s.base_seed == 99);
    CHECK(s.transport == TransportKind::tcp);
    CHECK(s.out == "somewhere.csv");
    CHECK(s.timings);
    CHECK_NOTHROW(validate_spec(s));
}

TEST_CASE("malformed configs raise ParseError with the offending line") {
    CHECK_THROWS_AS(parse_config_text("", "empty"), ParseError);
    CHECK_THROWS_WITH_AS(parse_config_text("kind=pcr\nfrobnicate=1\n", "f"),
                         doctest::Contains("f:2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_config_text("kind=nope\n", "f"),
                         doctest::Contains("unknown kind"), ParseError);
    CHECK_THROWS_AS(parse_config_text("kind=pcr\nd\n", "f"), ParseError);
    CHECK_THROWS_AS(parse_config_text("kind=pcr\nd=abc\n", "f"), ParseError);
    CHECK_THROWS_AS(parse_config_text("kind=pcr\nt=4,x\n", "f"), ParseError);
    CHECK_THROWS_AS(parse_config_text("kind=sim\nlink=cubic\n", "f"), ParseError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/config"), ParseError);
}

TEST_CASE("spec validation rejects out-of-range settings") {
    ExperimentSpec s = tiny_vary_spec();
    s.l_count = 2;  // top-1 experiment kinds demand l = 1
    CHECK_THROWS_AS(validate_spec(s), ParseError);
    s = tiny_vary_spec();
    s.monte_carlo = 0;
    CHECK_THROWS_AS(validate_spec(s), ParseError);
    s = tiny_vary_spec();
    s.delta_list = {0.0};
    CHECK_THROWS_AS(validate_spec(s), ParseError);
    s = tiny_vary_spec();
    s.kind = ExperimentKind::pcr;
    s.t_list = {2, 3};
    s.sigma2_list = {0.1};
    CHECK_THROWS_AS(validate_spec(s), ParseError);
}

TEST_CASE("a tiny run produces the full deterministic row grid") {
    ExperimentSpec s = tiny_vary_spec();
    std::vector<RunRecord> rows = run_experiment(s);
    // 1 rep x 1 cell x 2 T values x 3 methods, plus the matching mean rows.
    CHECK(rows.size() == 12);
    std::set<std::string> methods;
    for (const auto& r : rows) methods.insert(r.method);
    CHECK(methods == std::set<std::string>{"ours", "dc", "oracle"});

    int mean_rows = 0;
    for (const auto& r : rows) {
        CHECK(r.error >= 0.0);
        if (r.rep == "mean") ++mean_rows;
        if (r.method == "ours") {
            CHECK(r.uplink_bytes == 8u * 8u * static_cast<std::uint64_t>(r.t) * 3u);
        }
        CHECK(r.wall_ms < 0.0);  // timings stay off by default
    }
    CHECK(mean_rows == 6);

    // Determinism: the identical spec reproduces identical rows.
    std::vector<RunRecord> again = run_experiment(s);
    CHECK(to_csv(rows) == to_csv(again));
}

TEST_CASE("one-shot baselines are constant across the T sweep within a repetition") {
    ExperimentSpec s = tiny_vary_spec();
    s.t_list = {1, 2, 3};
    s.monte_carlo = 2;
    std::vector<RunRecord> rows = run_experiment(s);
    for (const std::string& rep : {std::string("0"), std::string("1")}) {
        for (const std::string& method : {std::string("dc"), std::string("oracle")}) {
            double first = -1.0;
            for (const auto& r : rows) {
                if (r.rep != rep || r.method != method) continue;
                if (first < 0.0) {
                    first = r.error;
                } else {
                    CHECK(r.error == first);
                }
            }
            CHECK(first >= 0.0);
        }
    }
}

TEST_CASE("csv has the fixed header and round-trippable floats") {
    ExperimentSpec s = tiny_vary_spec();
    s.out = "";
    std::vector<RunRecord> rows = run_experiment(s);
    std::string csv = to_csv(rows);
    auto lines = split(csv, '\n');
    CHECK(lines[0] ==
          "kind,rep,d,m,k,delta,l,t,t_inner,skewness,sigma2,link,method,error,"
          "log10_error,wall_time_ms,uplink_bytes");
    CHECK(lines.size() == rows.size() + 1);  // header + one line per row

    auto fields = split(lines[1], ',');
    REQUIRE(fields.size() == 17);
    CHECK(fields[0] == "vary-outer-iterations");
    CHECK(fields[9].empty());   // skewness not applicable
    CHECK(fields[10].empty());  // sigma2 not applicable
    CHECK(fields[11].empty());  // link not applicable
    CHECK(fields[15].empty());  // wall time off

    double err = std::stod(fields[13]);
    double log_err = std::stod(fields[14]);
    CHECK(log_err == doctest::Approx(std::log10(std::max(err, 1e-300))).epsilon(1e-15));
    // 17 significant digits survive a parse round-trip bit-exactly.
    CHECK(std::stod(fields[13]) == rows[0].error);
}

TEST_CASE("the csv file lands on disk and matches the returned rows") {
    ExperimentSpec s = tiny_vary_spec();
    s.out = "/tmp/deig_test_run.csv";
    std::vector<RunRecord> rows = run_experiment(s);
    std::ifstream in(s.out, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == to_csv(rows));
    std::remove(s.out.c_str());

    ExperimentSpec bad = tiny_vary_spec();
    bad.out = "/nonexistent-dir/x.csv";
    CHECK_THROWS_AS(run_experiment(bad), IoError);
}

TEST_CASE("pcr experiment rows compare three fits on one instance") {
    ExperimentSpec s;
    s.kind = ExperimentKind::pcr;
    s.d = 8;
    s.m = 60;
    s.k_list = {4};
    s.delta_list = {1.0};
    s.l_count = 3;
    s.sigma2_list = {0.2};
    s.t_list = {15};
    s.t_inner_list = {6};
    s.monte_carlo = 2;
    s.base_seed = 11;
    std::vector<RunRecord> rows = run_experiment(s);
    CHECK(rows.size() == 2 * 3 + 3);
    for (const auto& r : rows) {
        CHECK(r.error >= 0.0);
        CHECK(r.sigma2 == 0.2);
        if (r.rep == "mean" && r.method == "ours") {
            // Converged distributed PCR sits in the oracle's neighborhood.
            const RunRecord* oracle = nullptr;
            for (const auto& q : rows) {
                if (q.rep == "mean" && q.method == "oracle") oracle = &q;
            }
            REQUIRE(oracle != nullptr);
            CHECK(r.error <= 2.0 * oracle->error + 1e-6);
        }
    }
}

TEST_CASE("sim experiment emits ours and oracle rows per link") {
    ExperimentSpec s;
    s.kind = ExperimentKind::sim;
    s.d = 5;
    s.m = 500;
    s.k_list = {4};
    s.link_list = {SimLink::square, SimLink::mix};
    s.sigma2_list = {0.1};
    s.t_list = {12};
    s.t_inner_list = {8};
    s.monte_carlo = 1;
    s.base_seed = 13;
    std::vector<RunRecord> rows = run_experiment(s);
    CHECK(rows.size() == 2 * 2 * 2);  // (1 rep + mean) x 2 links x 2 methods
    std::set<std::string> links, methods;
    for (const auto& r : rows) {
        links.insert(r.link);
        methods.insert(r.method);
        CHECK(std::isnan(r.delta));
    }
    CHECK(links == std::set<std::string>{"square", "mix"});
    CHECK(methods == std::set<std::string>{"ours", "oracle"});
}

TEST_CASE("timings fill the wall column when requested") {
    ExperimentSpec s = tiny_vary_spec();
    s.timings = true;
    std::vector<RunRecord> rows = run_experiment(s);
    for (const auto& r : rows) CHECK(r.wall_ms >= 0.0);
}

TEST_CASE("dataset generation writes one file set per repetition and cell") {
    ExperimentSpec s = tiny_vary_spec();
    s.monte_carlo = 2;
    std::string dir = "/tmp/deig_test_gen";
    std::filesystem::remove_all(dir);
    int files = generate_datasets(s, dir);
    CHECK(files == 2);
    CHECK(std::filesystem::exists(dir + "/vary-outer-iterations_rep0_cell0"));
    CHECK(std::filesystem::exists(dir + "/vary-outer-iterations_rep1_cell0"));
    Dataset back = load_dataset(dir + "/vary-outer-iterations_rep0_cell0");
    CHECK(back.a.rows() == 200);
    CHECK(back.a.cols() == 8);
    std::filesystem::remove_all(dir);
}

TEST_CASE("memory and tcp transports give byte-identical experiment output") {
    ExperimentSpec s = tiny_vary_spec();
    std::vector<RunRecord> mem_rows = run_experiment(s);
    s.transport = TransportKind::tcp;
    std::vector<RunRecord> tcp_rows = run_experiment(s);
    CHECK(to_csv(mem_rows) == to_csv(tcp_rows));
}
