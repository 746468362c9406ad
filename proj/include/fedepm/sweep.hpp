#pragma once

// Flat key = value sweep configuration, multi-seed sweep execution and the
// aggregate table in CSV / JSON form.

#include "fedepm/data_pipeline.hpp"
#include "fedepm/sim_harness.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedepm {

/// Parse failure; `key()` names the offending key (empty for syntax errors
/// that precede a key).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what);
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class SweepAxis { K0, Rho, Epsilon };
std::string to_string(SweepAxis axis);

enum class DataSource { Synthetic, Adult };

struct DataSpec {
    DataSource source{DataSource::Synthetic};
    std::filesystem::path adult_path;
    Eigen::Index n{14};
    Eigen::Index d{2000};
    /// w_true ~ w_scale * N(0, I).
    double w_scale{5.0};
    ShardSizing sizing{ShardSizing::Equal};
    double dirichlet_alpha{1.0};
    double beta{0.001};
};

struct SweepSpec {
    ExperimentConfig base;
    SweepAxis axis{SweepAxis::K0};
    std::vector<double> values{12.0};
    std::vector<std::uint64_t> seeds{1};
    std::vector<Algorithm> algorithms{Algorithm::FedEpm};
    DataSpec data;

    void validate() const;
    /// base with the axis set to `value`.
    ExperimentConfig cell_config(Algorithm algorithm, double value) const;
};

/// Returns the value of an environment override, if set. The key is the
/// config key; the caller maps it to an actual variable name.
using EnvLookup = std::function<std::optional<std::string>(const std::string& key)>;

/// Looks up FEDEPM_<KEY> (upper-cased) in the process environment.
std::optional<std::string> process_env(const std::string& key);

inline const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = {
        "algorithm", "algorithms", "m", "k0", "rho", "epsilon", "s0", "selection", "max_iterations", "seed",
        "seeds", "trials", "lambda", "eta", "beta", "mu0", "c", "alpha", "prox_mu", "inner_steps", "step",
        "stop_rule", "clock", "monitor", "data", "n", "d", "w_scale", "sizing", "dirichlet_alpha"};
    return keys;
}

/// Keys given as lists define the sweep axis (only k0, rho, epsilon may be
/// lists, and at most one of them). With no list the axis is k0 at its
/// scalar value. `trials = N` expands `seed` into N consecutive seeds.
SweepSpec parse_config(const std::string& text, const EnvLookup& env = {});

struct RunRecord {
    Algorithm algorithm{Algorithm::FedEpm};
    double value{0.0};
    std::size_t seed_index{0};
    std::uint64_t run_seed{0};
    bool ok{false};
    std::string error;
    long iterations{0};
    bool budget_exhausted{false};
    double f_over_m{0.0};
    double cr{0.0};
    double tct_s{0.0};
    double lct_s{0.0};
    double lct_max_s{0.0};
    double snr{0.0};
};

struct AggregateRow {
    std::string algorithm;
    std::string axis;
    double value{0.0};
    std::string metric;
    double mean{0.0};
    double median{0.0};
    double q25{0.0};
    double q75{0.0};
    long n_runs{0};
};

using AggregateTable = std::vector<AggregateRow>;

struct SweepResult {
    /// Ordered by (algorithm, axis value, seed) whatever the completion order.
    std::vector<RunRecord> runs;
    AggregateTable table;
    bool all_ran() const;
};

/// seed_base[r] mixed with an FNV-1a hash of (algorithm, axis value).
std::uint64_t cell_seed(std::uint64_t seed_base, Algorithm algorithm, double value);

/// Shards for one run. Synthetic data is redrawn from the run seed; Adult
/// data is repartitioned.
std::vector<Shard> make_shards(const DataSpec& data, const Dataset* adult, std::size_t m, std::uint64_t run_seed);

using RunCallback = std::function<void(const RunRecord&, const ExperimentResult&)>;

/// Runs every cell on `parallel` workers. The callback is serialized but
/// fires in completion order.
SweepResult run_sweep(const SweepSpec& spec, std::size_t parallel = 1, const RunCallback& on_run = {});

/// Linear-interpolation quantile of a sample (sorted internally), q in [0, 1].
double quantile(std::vector<double> xs, double q);

/// One row per (algorithm, axis value, metric) from successful runs.
AggregateTable aggregate(const SweepSpec& spec, const std::vector<RunRecord>& runs);

inline constexpr const char* kAggregateHeader = "algorithm,axis,value,metric,mean,median,q25,q75,n_runs";
inline constexpr const char* kRunsHeader =
    "algorithm,axis,value,seed_index,run_seed,status,iterations,budget_exhausted,f_over_m,cr,tct_s,lct_s,lct_max_s,snr,"
    "error";

enum class TableFormat { Csv, Json };

void emit(std::ostream& out, const AggregateTable& table, TableFormat format);
AggregateTable parse_table(std::istream& in, TableFormat format);

void write_runs_csv(std::ostream& out, SweepAxis axis, const std::vector<RunRecord>& runs);

} // namespace fedepm
