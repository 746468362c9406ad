// fedepm_cli run --config <file> [--out <dir>] [--format csv|json] [--parallel <k>] [--data adult:<path>|synthetic]

#include "fedepm/sweep.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string trace_name(const fedepm::SweepSpec& spec, const fedepm::RunRecord& rec)
{
    return "trace_" + fedepm::to_string(rec.algorithm) + "_" + fedepm::to_string(spec.axis) + "-" +
           fedepm::format_double(rec.value) + "_seed" + std::to_string(rec.seed_index) + ".csv";
}

std::ofstream open_out(const fs::path& p)
{
    // Binary mode keeps LF line endings on every platform.
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"FedEPM federated learning simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a sweep described by a config file");
    std::string config_path;
    std::string out_dir = "fedepm_out";
    std::string format = "csv";
    std::size_t parallel = 1;
    std::string data;
    bool no_traces = false;
    run->add_option("--config", config_path, "Flat key = value config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--format", format, "Aggregate table format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--parallel", parallel, "Sweep cells run concurrently")->check(CLI::PositiveNumber);
    run->add_option("--data", data, "adult:<path> or synthetic (overrides the config)");
    run->add_flag("--no-traces", no_traces, "Skip per-run trace CSVs");

    CLI11_PARSE(app, argc, argv);

    fedepm::SweepSpec spec;
    try {
        std::ifstream in(config_path, std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        std::string contents = text.str();
        if (!data.empty()) contents += "\ndata = " + data + "\n";
        spec = fedepm::parse_config(contents, fedepm::process_env);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        fs::create_directories(out_dir);
        const fs::path out(out_dir);
        const auto on_run = [&](const fedepm::RunRecord& rec, const fedepm::ExperimentResult& res) {
            if (no_traces) return;
            auto f = open_out(out / trace_name(spec, rec));
            fedepm::write_trace_csv(f, res);
        };
        const auto result = fedepm::run_sweep(spec, parallel, on_run);

        auto runs = open_out(out / "runs.csv");
        fedepm::write_runs_csv(runs, spec.axis, result.runs);
        const bool json = format == "json";
        auto table = open_out(out / (json ? "aggregate.json" : "aggregate.csv"));
        fedepm::emit(table, result.table, json ? fedepm::TableFormat::Json : fedepm::TableFormat::Csv);

        std::size_t failed = 0;
        for (const auto& r : result.runs) {
            if (r.ok) continue;
            ++failed;
            std::cerr << "run failed: " << fedepm::to_string(r.algorithm) << ' ' << fedepm::to_string(spec.axis) << '='
                      << fedepm::format_double(r.value) << " seed " << r.seed_index << ": " << r.error << '\n';
        }
        std::cout << result.runs.size() - failed << '/' << result.runs.size() << " runs completed, output in "
                  << out_dir << '\n';
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
