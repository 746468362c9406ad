#include "fedepm/sweep.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace fedepm;

namespace {

const std::string kSmall = "m = 4\nd = 200\nn = 5\nmax_iterations = 120\n";

std::string emit_string(const AggregateTable& t, TableFormat f)
{
    std::ostringstream out;
    emit(out, t, f);
    return out.str();
}

std::string config_error_key(const std::string& text, const EnvLookup& env = {})
{
    try {
        parse_config(text, env);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

} // namespace

TEST_CASE("empty config gives defaults")
{
    const SweepSpec spec = parse_config("");
    CHECK(spec.seeds.size() == 1);
    CHECK(spec.algorithms == std::vector<Algorithm>{Algorithm::FedEpm});
    CHECK(spec.base.k0 == 12);
    CHECK(spec.base.rho == 0.5);
    CHECK(spec.base.m == 50);
    CHECK(spec.base.dp.enabled);
    CHECK(spec.base.dp.epsilon == 0.1);
    CHECK(spec.base.client.mu0 == 0.05);
    CHECK(spec.base.client.c == 1e-8);
    CHECK(spec.base.client.alpha == 1.001);
    CHECK(spec.base.baseline.prox_mu == 1e-5);
    CHECK(spec.base.baseline.inner_steps == 3);
    CHECK(spec.data.beta == 0.001);
    CHECK(spec.axis == SweepAxis::K0);
    CHECK(spec.values == std::vector<double>{12.0});
}

TEST_CASE("list keys define the sweep axis")
{
    const SweepSpec k0 = parse_config("k0 = [4, 12, 20]  # three points\n");
    CHECK(k0.axis == SweepAxis::K0);
    CHECK(k0.values == std::vector<double>{4.0, 12.0, 20.0});

    const SweepSpec eps = parse_config("epsilon = [0.1, 0.5]\nalgorithms = [fedepm, sfedavg]\ntrials = 3\nseed = 10\n");
    CHECK(eps.axis == SweepAxis::Epsilon);
    CHECK(eps.algorithms.size() == 2);
    CHECK(eps.seeds == std::vector<std::uint64_t>{10, 11, 12});

    CHECK(parse_config("rho = [0.2, 1]").axis == SweepAxis::Rho);
    CHECK(parse_config("seeds = [5, 9]").seeds == std::vector<std::uint64_t>{5, 9});
    CHECK_FALSE(parse_config("epsilon = off").base.dp.enabled);
}

TEST_CASE("config errors name the key")
{
    CHECK(config_error_key("rho = [0.2]\nepsilon = [0.1]\n") == "epsilon");
    CHECK(config_error_key("learning_rate = 1\n") == "learning_rate");
    CHECK(config_error_key("m = ten\n") == "m");
    CHECK(config_error_key("k0 = 2.5\n") == "k0");
    CHECK(config_error_key("rho = 1.5\n") == "rho");
    CHECK(config_error_key("m = [1, 2]\n") == "m");
    CHECK(config_error_key("m = 3\nm = 4\n") == "m");
    CHECK(config_error_key("alpha = 1\n") == "alpha");
    CHECK(config_error_key("selection = coverage\n") == "s0");
    CHECK(config_error_key("algorithm = fedsgd\n") == "algorithm");
    CHECK(config_error_key("seeds = [1]\ntrials = 2\n") == "trials");
    CHECK(config_error_key("data = csv:/tmp/x\n") == "data");
    CHECK(config_error_key("monitor = maybe\n") == "monitor");
    CHECK(config_error_key("this line has no equals sign\n") == "");
}

TEST_CASE("environment overrides config values")
{
    const EnvLookup env = [](const std::string& key) -> std::optional<std::string> {
        if (key == "k0") return "[4, 20]";
        if (key == "m") return "8";
        return std::nullopt;
    };
    const SweepSpec spec = parse_config("k0 = 12\nm = 50\n", env);
    CHECK(spec.values == std::vector<double>{4.0, 20.0});
    CHECK(spec.base.m == 8);

    const EnvLookup bad = [](const std::string& key) -> std::optional<std::string> {
        if (key == "rho") return "two";
        return std::nullopt;
    };
    CHECK(config_error_key("", bad) == "rho");
}

TEST_CASE("explicit penalty")
{
    const SweepSpec spec = parse_config("lambda = 0.02\neta = 0.5\n");
    CHECK_FALSE(spec.base.auto_penalty);
    const auto p = spec.cell_config(Algorithm::FedEpm, 12.0).effective_penalty();
    CHECK(p.lambda == 0.02);
    CHECK(p.eta == 0.5);
}

TEST_CASE("cell seeds differ across cells and repeat across calls")
{
    CHECK(cell_seed(1, Algorithm::FedEpm, 4.0) == cell_seed(1, Algorithm::FedEpm, 4.0));
    CHECK(cell_seed(1, Algorithm::FedEpm, 4.0) != cell_seed(1, Algorithm::FedEpm, 12.0));
    CHECK(cell_seed(1, Algorithm::FedEpm, 4.0) != cell_seed(1, Algorithm::SFedAvg, 4.0));
    CHECK(cell_seed(1, Algorithm::FedEpm, 4.0) != cell_seed(2, Algorithm::FedEpm, 4.0));
}

TEST_CASE("quantiles interpolate linearly")
{
    CHECK(quantile({3.0}, 0.25) == 3.0);
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
    CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
    CHECK(quantile({1.0, 2.0}, 0.25) == 1.25);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidInput);
}

TEST_CASE("three seeds, one cell")
{
    const SweepSpec spec = parse_config(kSmall + "trials = 3\n");
    const auto res = run_sweep(spec);
    CHECK(res.runs.size() == 3);
    CHECK(res.all_ran());
    std::set<std::pair<std::string, double>> cells;
    for (const auto& row : res.table) {
        cells.insert({row.algorithm, row.value});
        CHECK(row.n_runs == 3);
    }
    CHECK(cells.size() == 1);
    CHECK(res.table.size() == 5);
}

TEST_CASE("aggregates are recomputable from the runs csv")
{
    const SweepSpec spec = parse_config(kSmall + "trials = 4\nalgorithms = [fedepm, sfedprox]\nk0 = [2, 5]\n");
    const auto res = run_sweep(spec, 2);
    std::ostringstream runs_csv;
    write_runs_csv(runs_csv, spec.axis, res.runs);

    std::istringstream in(runs_csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == kRunsHeader);
    std::map<std::pair<std::string, std::string>, std::vector<double>> cr;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        cr[{f[0], f[2]}].push_back(parse_double(f[9]));
    }
    for (const auto& row : res.table) {
        if (row.metric != "cr") continue;
        const auto& xs = cr.at({row.algorithm, format_double(row.value)});
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        CHECK(std::abs(mean - row.mean) <= 1e-12);
        CHECK(std::abs(quantile(xs, 0.75) - row.q75) <= 1e-12);
    }
}

TEST_CASE("sweeps are deterministic and order-stable")
{
    const SweepSpec spec = parse_config(kSmall + "trials = 3\nalgorithms = [fedepm, sfedavg]\nrho = [0.5, 1]\n");
    const auto a = run_sweep(spec, 1);
    const auto b = run_sweep(spec, 3);
    CHECK(emit_string(a.table, TableFormat::Csv) == emit_string(b.table, TableFormat::Csv));
    REQUIRE(a.runs.size() == 12);
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].run_seed == b.runs[i].run_seed);
        CHECK(a.runs[i].algorithm == b.runs[i].algorithm);
    }
    CHECK(a.runs.front().algorithm == Algorithm::FedEpm);
    CHECK(a.runs.back().algorithm == Algorithm::SFedAvg);
}

TEST_CASE("failed cells are recorded and the sweep continues")
{
    SweepSpec spec = parse_config(kSmall + "trials = 2\ndata = adult:/nonexistent/adult.data\n");
    CHECK_THROWS(run_sweep(spec));

    // Two usable rows cannot be split across four clients, so every cell fails.
    const auto path = std::filesystem::temp_directory_path() / "fedepm_tiny_adult.data";
    {
        std::ofstream out(path);
        out << "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, Not-in-family, White, Male, 2174, 0, "
               "40, United-States, <=50K\n"
               "52, Self-emp-inc, 287927, HS-grad, 9, Married-civ-spouse, Exec-managerial, Wife, White, Female, 15024, "
               "0, 40, United-States, >50K\n";
    }
    spec = parse_config(kSmall + "trials = 2\ndata = adult:" + path.string() + "\n");
    const auto res = run_sweep(spec);
    CHECK(res.runs.size() == 2);
    CHECK_FALSE(res.all_ran());
    CHECK_FALSE(res.runs.front().error.empty());
    CHECK(res.table.front().n_runs == 0);
}

TEST_CASE("table emission")
{
    CHECK(emit_string({}, TableFormat::Csv) == std::string(kAggregateHeader) + "\n");
    const AggregateRow row{"fedepm", "k0", 12.0, "cr", 10.5, 10.0, 9.25, 11.75, 20};
    const std::string csv = emit_string({row}, TableFormat::Csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find('\r') == std::string::npos);

    const double inf = std::numeric_limits<double>::infinity();
    const AggregateTable table{row, {"sfedavg", "k0", 4.0, "snr", inf, 0.1 + 0.2, -1.0 / 3.0, 1e-300, 3},
                               {"sfedprox", "k0", 4.0, "snr", std::nan(""), std::nan(""), std::nan(""), std::nan(""), 0}};
    std::istringstream csv_in(emit_string(table, TableFormat::Csv));
    const auto from_csv = parse_table(csv_in, TableFormat::Csv);
    std::istringstream json_in(emit_string(from_csv, TableFormat::Json));
    const auto back = parse_table(json_in, TableFormat::Json);
    REQUIRE(back.size() == table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(back[i].algorithm == table[i].algorithm);
        CHECK(back[i].axis == table[i].axis);
        CHECK(back[i].metric == table[i].metric);
        CHECK(back[i].n_runs == table[i].n_runs);
        for (auto field : {&AggregateRow::value, &AggregateRow::mean, &AggregateRow::median, &AggregateRow::q25,
                           &AggregateRow::q75}) {
            const double x = table[i].*field, y = back[i].*field;
            CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
        }
    }
}

TEST_CASE("longer periods need fewer rounds without noise")
{
    const SweepSpec spec = parse_config("m = 10\nk0 = [4, 20]\nepsilon = off\ntrials = 20\n");
    const auto res = run_sweep(spec, 1);
    CHECK(res.all_ran());
    double cr4 = 0.0, cr20 = 0.0;
    for (const auto& row : res.table) {
        if (row.metric != "cr") continue;
        (row.value == 4.0 ? cr4 : cr20) = row.mean;
    }
    CHECK(cr20 < cr4);
}
