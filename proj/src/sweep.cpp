#include "fedepm/sweep.hpp"

#include "fedepm/worker_pool.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace fedepm {

ConfigError::ConfigError(const std::string& key, const std::string& what)
    : std::runtime_error(key.empty() ? what : "config key '" + key + "': " + what), key_(key)
{
}

std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::K0: return "k0";
    case SweepAxis::Rho: return "rho";
    case SweepAxis::Epsilon: return "epsilon";
    }
    return "unknown";
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& s)
{
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

bool is_list(const std::string& raw) { return !raw.empty() && raw.front() == '['; }

std::vector<std::string> list_items(const std::string& key, const std::string& raw)
{
    if (raw.back() != ']') throw ConfigError(key, "unterminated list");
    const std::string body = trim(raw.substr(1, raw.size() - 2));
    std::vector<std::string> out;
    if (body.empty()) throw ConfigError(key, "list must not be empty");
    std::istringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = unquote(trim(item));
        if (item.empty()) throw ConfigError(key, "empty list item");
        out.push_back(item);
    }
    return out;
}

double to_real(const std::string& key, const std::string& raw)
{
    try {
        const double v = parse_double(unquote(raw));
        if (!std::isfinite(v)) throw InvalidInput("non-finite");
        return v;
    } catch (const InvalidInput&) {
        throw ConfigError(key, "expected a real number, got '" + raw + "'");
    }
}

long long to_integer(const std::string& key, const std::string& raw)
{
    const std::string t = unquote(raw);
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) throw ConfigError(key, "expected an integer, got '" + raw + "'");
    return v;
}

std::uint64_t to_seed(const std::string& key, const std::string& raw)
{
    const std::string t = unquote(raw);
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        if (!t.empty() && t.front() == '-') throw std::invalid_argument("negative");
        v = std::stoull(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size()) throw ConfigError(key, "expected a nonnegative 64-bit integer, got '" + raw + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& raw)
{
    const std::string t = unquote(raw);
    if (t == "true" || t == "on" || t == "1") return true;
    if (t == "false" || t == "off" || t == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + raw + "'");
}

std::string scalar(const std::string& key, const std::string& raw)
{
    if (is_list(raw)) throw ConfigError(key, "a list is not allowed here");
    return unquote(raw);
}

Algorithm to_algorithm(const std::string& key, const std::string& raw)
{
    try {
        return parse_algorithm(raw);
    } catch (const InvalidInput&) {
        throw ConfigError(key, "unknown algorithm '" + raw + "'");
    }
}

} // namespace

std::optional<std::string> process_env(const std::string& key)
{
    std::string name = "FEDEPM_";
    for (char ch : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
}

void SweepSpec::validate() const
{
    require(!values.empty(), "the sweep axis needs at least one value");
    require(!seeds.empty(), "seeds must not be empty");
    require(!algorithms.empty(), "at least one algorithm is required");
    for (double v : values) {
        for (Algorithm a : algorithms) cell_config(a, v).validate();
    }
    require(data.n >= 1 && data.d >= 1, "data dimensions must be positive");
    require(data.d >= static_cast<Eigen::Index>(base.m) || data.source == DataSource::Adult,
            "synthetic d must be at least m");
    require(data.beta >= 0.0, "beta must be nonnegative");
}

ExperimentConfig SweepSpec::cell_config(Algorithm algorithm, double value) const
{
    ExperimentConfig cfg = base;
    cfg.algorithm = algorithm;
    switch (axis) {
    case SweepAxis::K0: cfg.k0 = static_cast<int>(std::llround(value)); break;
    case SweepAxis::Rho: cfg.rho = value; break;
    case SweepAxis::Epsilon:
        cfg.dp.epsilon = value;
        cfg.dp.enabled = true;
        break;
    }
    return cfg;
}

SweepSpec parse_config(const std::string& text, const EnvLookup& env)
{
    std::map<std::string, std::string> entries;
    const std::set<std::string> known(config_keys().begin(), config_keys().end());

    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known.count(key)) throw ConfigError(key, "unknown key");
        if (value.empty()) throw ConfigError(key, "missing value");
        if (!entries.emplace(key, value).second) throw ConfigError(key, "given more than once");
    }
    if (env) {
        for (const auto& key : config_keys()) {
            if (auto v = env(key)) {
                const std::string value = trim(*v);
                if (value.empty()) throw ConfigError(key, "empty environment override");
                entries[key] = value;
            }
        }
    }

    SweepSpec spec;
    ExperimentConfig& cfg = spec.base;
    std::vector<std::pair<SweepAxis, std::vector<double>>> axes;
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };

    if (get("algorithm") && get("algorithms")) throw ConfigError("algorithms", "conflicts with 'algorithm'");
    for (const char* key : {"algorithm", "algorithms"}) {
        if (const auto* raw = get(key)) {
            spec.algorithms.clear();
            const auto items = is_list(*raw) ? list_items(key, *raw) : std::vector<std::string>{unquote(*raw)};
            for (const auto& item : items) {
                const Algorithm a = to_algorithm(key, item);
                if (std::find(spec.algorithms.begin(), spec.algorithms.end(), a) != spec.algorithms.end())
                    throw ConfigError(key, "algorithm listed twice");
                spec.algorithms.push_back(a);
            }
        }
    }

    if (const auto* raw = get("m")) {
        const auto v = to_integer("m", scalar("m", *raw));
        if (v < 1) throw ConfigError("m", "must be at least 1");
        cfg.m = static_cast<std::size_t>(v);
    }
    if (const auto* raw = get("k0")) {
        if (is_list(*raw)) {
            std::vector<double> values;
            for (const auto& item : list_items("k0", *raw)) {
                const auto v = to_integer("k0", item);
                if (v < 1) throw ConfigError("k0", "must be at least 1");
                values.push_back(static_cast<double>(v));
            }
            axes.emplace_back(SweepAxis::K0, values);
        } else {
            const auto v = to_integer("k0", *raw);
            if (v < 1) throw ConfigError("k0", "must be at least 1");
            cfg.k0 = static_cast<int>(v);
        }
    }
    if (const auto* raw = get("rho")) {
        auto check = [](double v) {
            if (!(v > 0.0 && v <= 1.0)) throw ConfigError("rho", "must lie in (0, 1]");
            return v;
        };
        if (is_list(*raw)) {
            std::vector<double> values;
            for (const auto& item : list_items("rho", *raw)) values.push_back(check(to_real("rho", item)));
            axes.emplace_back(SweepAxis::Rho, values);
        } else {
            cfg.rho = check(to_real("rho", *raw));
        }
    }
    if (const auto* raw = get("epsilon")) {
        auto check = [](double v) {
            if (!(v > 0.0)) throw ConfigError("epsilon", "must be positive");
            return v;
        };
        if (is_list(*raw)) {
            std::vector<double> values;
            for (const auto& item : list_items("epsilon", *raw)) values.push_back(check(to_real("epsilon", item)));
            axes.emplace_back(SweepAxis::Epsilon, values);
        } else if (unquote(*raw) == "off") {
            cfg.dp.enabled = false;
        } else {
            cfg.dp.epsilon = check(to_real("epsilon", *raw));
            cfg.dp.enabled = true;
        }
    }
    if (axes.size() > 1) throw ConfigError(to_string(axes[1].first), "only one sweep axis may be a list");
    if (axes.empty()) {
        spec.axis = SweepAxis::K0;
        spec.values = {static_cast<double>(cfg.k0)};
    } else {
        spec.axis = axes.front().first;
        spec.values = axes.front().second;
        if (spec.axis == SweepAxis::Epsilon && !cfg.dp.enabled) throw ConfigError("epsilon", "cannot be off and swept");
    }

    if (const auto* raw = get("selection")) {
        const std::string v = scalar("selection", *raw);
        if (v == "iid") cfg.selection = SelectionPolicy::Iid;
        else if (v == "coverage") cfg.selection = SelectionPolicy::Coverage;
        else throw ConfigError("selection", "expected iid or coverage, got '" + v + "'");
    }
    if (const auto* raw = get("s0")) {
        const auto v = to_integer("s0", scalar("s0", *raw));
        if (v < 1) throw ConfigError("s0", "must be at least 1");
        cfg.s0 = static_cast<int>(v);
        if (!get("selection")) cfg.selection = SelectionPolicy::Coverage;
    }
    if (cfg.selection == SelectionPolicy::Coverage) {
        if (!cfg.s0) throw ConfigError("s0", "required by the coverage policy");
        if (static_cast<std::size_t>(*cfg.s0) > cfg.m) throw ConfigError("s0", "must not exceed m");
    }
    if (const auto* raw = get("max_iterations")) {
        const auto v = to_integer("max_iterations", scalar("max_iterations", *raw));
        if (v < 1) throw ConfigError("max_iterations", "must be positive");
        cfg.max_iterations = static_cast<long>(v);
    }

    if (get("seeds") && get("trials")) throw ConfigError("trials", "conflicts with 'seeds'");
    if (get("seeds") && get("seed")) throw ConfigError("seed", "conflicts with 'seeds'");
    if (const auto* raw = get("seed")) cfg.seed = to_seed("seed", scalar("seed", *raw));
    spec.seeds = {cfg.seed};
    if (const auto* raw = get("seeds")) {
        spec.seeds.clear();
        const auto items = is_list(*raw) ? list_items("seeds", *raw) : std::vector<std::string>{*raw};
        for (const auto& item : items) spec.seeds.push_back(to_seed("seeds", item));
    }
    if (const auto* raw = get("trials")) {
        const auto v = to_integer("trials", scalar("trials", *raw));
        if (v < 1) throw ConfigError("trials", "must be at least 1");
        spec.seeds.clear();
        for (long long r = 0; r < v; ++r) spec.seeds.push_back(cfg.seed + static_cast<std::uint64_t>(r));
    }

    auto positive = [&](const char* key, double& slot) {
        if (const auto* raw = get(key)) {
            const double v = to_real(key, scalar(key, *raw));
            if (!(v > 0.0)) throw ConfigError(key, "must be positive");
            slot = v;
        }
    };
    auto nonnegative = [&](const char* key, double& slot) {
        if (const auto* raw = get(key)) {
            const double v = to_real(key, scalar(key, *raw));
            if (v < 0.0) throw ConfigError(key, "must be nonnegative");
            slot = v;
        }
    };

    if (get("lambda") || get("eta")) {
        const PenaltyConfig automatic = cfg.effective_penalty();
        cfg.auto_penalty = false;
        cfg.penalty.lambda = automatic.lambda;
        cfg.penalty.eta = automatic.eta;
        positive("lambda", cfg.penalty.lambda);
        positive("eta", cfg.penalty.eta);
    }
    nonnegative("beta", spec.data.beta);
    positive("mu0", cfg.client.mu0);
    nonnegative("c", cfg.client.c);
    if (const auto* raw = get("alpha")) {
        const double v = to_real("alpha", scalar("alpha", *raw));
        if (!(v > 1.0)) throw ConfigError("alpha", "must exceed 1");
        cfg.client.alpha = v;
    }
    nonnegative("prox_mu", cfg.baseline.prox_mu);
    if (const auto* raw = get("inner_steps")) {
        const auto v = to_integer("inner_steps", scalar("inner_steps", *raw));
        if (v < 1) throw ConfigError("inner_steps", "must be at least 1");
        cfg.baseline.inner_steps = static_cast<int>(v);
    }
    if (const auto* raw = get("step")) {
        const std::string v = scalar("step", *raw);
        if (v == "diminishing") {
            cfg.baseline.step_rule = StepRule::Diminishing;
        } else {
            cfg.baseline.step_rule = StepRule::Fixed;
            cfg.baseline.fixed_step = to_real("step", v);
            if (!(cfg.baseline.fixed_step > 0.0)) throw ConfigError("step", "must be positive");
        }
    }
    if (const auto* raw = get("stop_rule")) {
        const std::string v = scalar("stop_rule", *raw);
        if (v == "combined") cfg.stop_rule = StopRule::Combined;
        else if (v == "gradient") cfg.stop_rule = StopRule::GradientOnly;
        else if (v == "never") cfg.stop_rule = StopRule::Never;
        else throw ConfigError("stop_rule", "expected combined, gradient or never, got '" + v + "'");
    }
    if (const auto* raw = get("clock")) {
        const std::string v = scalar("clock", *raw);
        if (v == "virtual") cfg.clock = ClockMode::Virtual;
        else if (v == "wall") cfg.clock = ClockMode::Wall;
        else throw ConfigError("clock", "expected virtual or wall, got '" + v + "'");
    }
    if (const auto* raw = get("monitor")) cfg.monitor = to_bool("monitor", scalar("monitor", *raw));

    if (const auto* raw = get("data")) {
        const std::string v = scalar("data", *raw);
        if (v == "synthetic") {
            spec.data.source = DataSource::Synthetic;
        } else if (v.rfind("adult:", 0) == 0 && v.size() > 6) {
            spec.data.source = DataSource::Adult;
            spec.data.adult_path = v.substr(6);
        } else {
            throw ConfigError("data", "expected synthetic or adult:<path>, got '" + v + "'");
        }
    }
    for (const char* key : {"n", "d"}) {
        if (const auto* raw = get(key)) {
            const auto v = to_integer(key, scalar(key, *raw));
            if (v < 1) throw ConfigError(key, "must be positive");
            (key[0] == 'n' ? spec.data.n : spec.data.d) = static_cast<Eigen::Index>(v);
        }
    }
    nonnegative("w_scale", spec.data.w_scale);
    if (const auto* raw = get("sizing")) {
        const std::string v = scalar("sizing", *raw);
        if (v == "equal") spec.data.sizing = ShardSizing::Equal;
        else if (v == "dirichlet") spec.data.sizing = ShardSizing::Dirichlet;
        else throw ConfigError("sizing", "expected equal or dirichlet, got '" + v + "'");
    }
    positive("dirichlet_alpha", spec.data.dirichlet_alpha);

    if (spec.data.source == DataSource::Synthetic && spec.data.d < static_cast<Eigen::Index>(cfg.m))
        throw ConfigError("d", "must be at least m");
    for (double v : spec.values) {
        if (spec.axis == SweepAxis::K0 && cfg.max_iterations < static_cast<long>(v))
            throw ConfigError("max_iterations", "must be at least every k0");
    }
    try {
        spec.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError("", e.what());
    }
    return spec;
}

bool SweepResult::all_ran() const
{
    return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok; });
}

std::uint64_t cell_seed(std::uint64_t seed_base, Algorithm algorithm, double value)
{
    const std::string tag = to_string(algorithm) + "|" + format_double(value);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : tag) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return mix_seed(seed_base, h);
}

std::vector<Shard> make_shards(const DataSpec& data, const Dataset* adult, std::size_t m, std::uint64_t run_seed)
{
    RandomStream rng(mix_seed(run_seed, 0xda7a));
    PartitionOptions opts{data.sizing, data.dirichlet_alpha, data.beta};
    if (data.source == DataSource::Adult) {
        require(adult != nullptr, "Adult data was not loaded");
        return partition(*adult, m, rng, opts);
    }
    ModelVector w_true(data.n);
    for (Eigen::Index j = 0; j < data.n; ++j) w_true[j] = data.w_scale * standard_normal(rng);
    return synth_logistic(data.n, data.d, m, w_true, rng, opts);
}

SweepResult run_sweep(const SweepSpec& spec, std::size_t parallel, const RunCallback& on_run)
{
    spec.validate();
    require(parallel >= 1, "parallel must be at least 1");

    std::optional<Dataset> adult;
    if (spec.data.source == DataSource::Adult) adult = load_adult(spec.data.adult_path);

    SweepResult out;
    for (Algorithm a : spec.algorithms)
        for (double v : spec.values)
            for (std::size_t r = 0; r < spec.seeds.size(); ++r) {
                RunRecord rec;
                rec.algorithm = a;
                rec.value = v;
                rec.seed_index = r;
                rec.run_seed = cell_seed(spec.seeds[r], a, v);
                out.runs.push_back(rec);
            }

    std::mutex callback_mutex;
    WorkerPool pool(std::min(parallel, out.runs.size()));
    pool.parallel_for(out.runs.size(), [&](std::size_t idx) {
        RunRecord& rec = out.runs[idx];
        try {
            ExperimentConfig cfg = spec.cell_config(rec.algorithm, rec.value);
            cfg.seed = rec.run_seed;
            cfg.workers = 1;
            const auto shards = make_shards(spec.data, adult ? &*adult : nullptr, cfg.m, rec.run_seed);
            const ExperimentResult res = run_experiment(cfg, shards);
            const TimingMetrics t = timing_metrics(res);
            rec.ok = true;
            rec.iterations = res.iterations;
            rec.budget_exhausted = res.budget_exhausted;
            rec.f_over_m = res.f_over_m;
            rec.cr = static_cast<double>(t.cr);
            rec.tct_s = t.tct_s;
            rec.lct_s = t.lct_mean_s;
            rec.lct_max_s = t.lct_max_s;
            rec.snr = res.snr;
            if (on_run) {
                std::lock_guard lock(callback_mutex);
                on_run(rec, res);
            }
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
    });

    out.table = aggregate(spec, out.runs);
    return out;
}

double quantile(std::vector<double> xs, double q)
{
    require(!xs.empty(), "quantile of an empty sample");
    require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || xs[lo] == xs[hi]) return xs[lo];
    return xs[lo] + frac * (xs[hi] - xs[lo]);
}

AggregateTable aggregate(const SweepSpec& spec, const std::vector<RunRecord>& runs)
{
    static const std::vector<std::pair<std::string, double RunRecord::*>> metrics = {
        {"f_over_m", &RunRecord::f_over_m}, {"cr", &RunRecord::cr},   {"tct_s", &RunRecord::tct_s},
        {"lct_s", &RunRecord::lct_s},       {"snr", &RunRecord::snr}};
    const double nan = std::numeric_limits<double>::quiet_NaN();

    AggregateTable table;
    for (Algorithm a : spec.algorithms) {
        for (double v : spec.values) {
            for (const auto& [name, field] : metrics) {
                std::vector<double> xs;
                for (const auto& r : runs)
                    if (r.ok && r.algorithm == a && r.value == v) xs.push_back(r.*field);
                AggregateRow row{to_string(a), to_string(spec.axis), v, name, nan, nan, nan, nan,
                                 static_cast<long>(xs.size())};
                if (!xs.empty()) {
                    row.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
                    row.median = quantile(xs, 0.5);
                    row.q25 = quantile(xs, 0.25);
                    row.q75 = quantile(xs, 0.75);
                }
                table.push_back(row);
            }
        }
    }
    return table;
}

namespace {

nlohmann::json number_to_json(double x)
{
    if (std::isfinite(x)) return x;
    return format_double(x);
}

double number_from_json(const nlohmann::json& j)
{
    if (j.is_string()) return parse_double(j.get<std::string>());
    return j.get<double>();
}

} // namespace

void emit(std::ostream& out, const AggregateTable& table, TableFormat format)
{
    if (format == TableFormat::Csv) {
        out << kAggregateHeader << '\n';
        for (const auto& r : table) {
            out << r.algorithm << ',' << r.axis << ',' << format_double(r.value) << ',' << r.metric << ','
                << format_double(r.mean) << ',' << format_double(r.median) << ',' << format_double(r.q25) << ','
                << format_double(r.q75) << ',' << r.n_runs << '\n';
        }
        return;
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table) {
        rows.push_back({{"algorithm", r.algorithm},
                        {"axis", r.axis},
                        {"value", number_to_json(r.value)},
                        {"metric", r.metric},
                        {"mean", number_to_json(r.mean)},
                        {"median", number_to_json(r.median)},
                        {"q25", number_to_json(r.q25)},
                        {"q75", number_to_json(r.q75)},
                        {"n_runs", r.n_runs}});
    }
    out << rows.dump(2) << '\n';
}

AggregateTable parse_table(std::istream& in, TableFormat format)
{
    AggregateTable table;
    if (format == TableFormat::Json) {
        nlohmann::json rows;
        try {
            in >> rows;
            for (const auto& j : rows) {
                table.push_back({j.at("algorithm").get<std::string>(), j.at("axis").get<std::string>(),
                                 number_from_json(j.at("value")), j.at("metric").get<std::string>(),
                                 number_from_json(j.at("mean")), number_from_json(j.at("median")),
                                 number_from_json(j.at("q25")), number_from_json(j.at("q75")),
                                 j.at("n_runs").get<long>()});
            }
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInput(std::string("malformed aggregate JSON: ") + e.what());
        }
        return table;
    }

    std::string line;
    if (!std::getline(in, line) || trim(line) != kAggregateHeader) throw InvalidInput("aggregate CSV header mismatch");
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 9) throw InvalidInput("aggregate CSV row must have 9 fields");
        table.push_back({f[0], f[1], parse_double(f[2]), f[3], parse_double(f[4]), parse_double(f[5]),
                         parse_double(f[6]), parse_double(f[7]), std::stol(f[8])});
    }
    return table;
}

void write_runs_csv(std::ostream& out, SweepAxis axis, const std::vector<RunRecord>& runs)
{
    out << kRunsHeader << '\n';
    for (const auto& r : runs) {
        std::string error = r.error;
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        out << to_string(r.algorithm) << ',' << to_string(axis) << ',' << format_double(r.value) << ','
            << r.seed_index << ',' << r.run_seed << ',' << (r.ok ? "ok" : "error") << ',' << r.iterations << ','
            << (r.budget_exhausted ? 1 : 0) << ',' << format_double(r.f_over_m) << ',' << format_double(r.cr)
            << ',' << format_double(r.tct_s) << ',' << format_double(r.lct_s) << ',' << format_double(r.lct_max_s)
            << ',' << format_double(r.snr) << ',' << error << '\n';
    }
}

} // namespace fedepm
