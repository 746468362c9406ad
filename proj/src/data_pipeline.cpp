#include "fedepm/data_pipeline.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace fedepm {

namespace {

constexpr std::size_t kAdultFields = 15;
constexpr std::array<bool, 14> kAdultCategorical = {false, true,  false, true,  false, true,  true,
                                                    true,  true,  true,  false, false, false, true};

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

} // namespace

IngestionError::IngestionError(const std::string& what, long row)
    : std::runtime_error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what), row_(row)
{
}

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& text)
{
    const std::string t = trim(text);
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw InvalidInput("not a number: '" + text + "'");
    return value;
}

Dataset load_adult(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open Adult file: " + path.string());
    return load_adult(in);
}

Dataset load_adult(std::istream& in)
{
    std::vector<std::array<double, 14>> rows;
    std::vector<double> labels;
    std::array<std::map<std::string, int>, 14> codes;

    std::string line;
    long row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        const std::string body = trim(line);
        // adult.test opens with a "|1x3 Cross validator" banner.
        if (body.empty() || body.front() == '|') continue;

        const auto fields = split(body, ',');
        if (fields.size() != kAdultFields)
            throw IngestionError("expected 15 comma-separated fields, got " + std::to_string(fields.size()), row_no);

        bool missing = false;
        for (const auto& f : fields) missing = missing || f == "?" || f.empty();
        if (missing) continue;

        std::array<double, 14> x{};
        for (std::size_t j = 0; j < 14; ++j) {
            if (kAdultCategorical[j]) {
                auto& table = codes[j];
                const auto it = table.find(fields[j]);
                if (it != table.end()) {
                    x[j] = it->second;
                } else {
                    const int code = static_cast<int>(table.size()) + 1;
                    table.emplace(fields[j], code);
                    x[j] = code;
                }
            } else {
                try {
                    x[j] = parse_double(fields[j]);
                } catch (const InvalidInput&) {
                    throw IngestionError("non-numeric value '" + fields[j] + "' in a continuous column", row_no);
                }
            }
        }
        std::string income = fields[14];
        if (!income.empty() && income.back() == '.') income.pop_back();
        rows.push_back(x);
        labels.push_back(income.find(">50K") != std::string::npos ? 1.0 : 0.0);
    }
    if (rows.empty()) throw IngestionError("no complete rows in Adult input");

    Dataset ds;
    ds.provenance = Provenance::Adult;
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), 14);
    ds.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < 14; ++j) ds.features(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
        ds.labels[static_cast<Eigen::Index>(t)] = labels[t];
    }
    normalize_columns(ds.features);
    return ds;
}

void normalize_columns(RowMatrix<double>& features)
{
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        const double norm = features.col(j).norm();
        if (norm > 0.0) features.col(j) /= norm;
    }
}

std::vector<Eigen::Index> random_permutation(Eigen::Index n, RandomStream& rng)
{
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

double standard_normal(RandomStream& rng)
{
    // Box-Muller, one output per call.
    const double u1 = uniform_open(rng);
    const double u2 = uniform_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<Eigen::Index> shard_sizes(Eigen::Index d, std::size_t m, RandomStream& rng, const PartitionOptions& opts)
{
    require(m >= 1, "at least one shard is required");
    require(static_cast<Eigen::Index>(m) <= d, "cannot split fewer rows than shards");
    const auto mm = static_cast<Eigen::Index>(m);
    std::vector<Eigen::Index> sizes(m, d / mm);
    if (opts.sizing == ShardSizing::Equal) {
        for (Eigen::Index i = 0; i < d % mm; ++i) ++sizes[static_cast<std::size_t>(i)];
        return sizes;
    }

    require(opts.dirichlet_alpha > 0.0, "dirichlet alpha must be positive");
    std::gamma_distribution<double> gamma(opts.dirichlet_alpha, 1.0);
    std::vector<double> weights(m);
    double total = 0.0;
    for (auto& w : weights) total += (w = gamma(rng));
    const Eigen::Index spare = d - mm;
    Eigen::Index used = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto extra = static_cast<Eigen::Index>(std::floor(weights[i] / total * static_cast<double>(spare)));
        sizes[i] = 1 + extra;
        used += extra;
    }
    for (Eigen::Index r = 0; r < spare - used; ++r) ++sizes[static_cast<std::size_t>(r % mm)];
    return sizes;
}

Partition partition_with_ids(const Dataset& ds, std::size_t m, RandomStream& rng, const PartitionOptions& opts)
{
    require(m >= 1, "at least one shard is required");
    require(static_cast<Eigen::Index>(m) <= ds.size(), "cannot split fewer rows than shards");
    require(opts.beta >= 0.0, "beta must be nonnegative");

    const auto perm = random_permutation(ds.size(), rng);
    const auto sizes = shard_sizes(ds.size(), m, rng, opts);

    Partition out;
    out.shards.reserve(m);
    out.row_ids.reserve(m);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < m; ++i) {
        Shard shard;
        shard.beta = opts.beta;
        shard.features.resize(sizes[i], ds.dim());
        shard.labels.resize(sizes[i]);
        std::vector<Eigen::Index> ids(static_cast<std::size_t>(sizes[i]));
        for (Eigen::Index t = 0; t < sizes[i]; ++t, ++cursor) {
            const Eigen::Index src = perm[cursor];
            shard.features.row(t) = ds.features.row(src);
            shard.labels[t] = ds.labels[src];
            ids[static_cast<std::size_t>(t)] = src;
        }
        out.shards.push_back(std::move(shard));
        out.row_ids.push_back(std::move(ids));
    }
    return out;
}

std::vector<Shard> partition(const Dataset& ds, std::size_t m, RandomStream& rng, const PartitionOptions& opts)
{
    return partition_with_ids(ds, m, rng, opts).shards;
}

Dataset synth_dataset(Eigen::Index n, Eigen::Index d, const ModelVector& w_true, RandomStream& rng)
{
    require(n >= 1 && d >= 1, "synthetic data needs n, d >= 1");
    require(w_true.size() == n, "w_true must have dimension n");
    Dataset ds;
    ds.provenance = Provenance::Synthetic;
    ds.features.resize(d, n);
    for (Eigen::Index t = 0; t < d; ++t)
        for (Eigen::Index j = 0; j < n; ++j) ds.features(t, j) = standard_normal(rng);
    normalize_columns(ds.features);

    ds.labels.resize(d);
    const ModelVector logits = ds.features * w_true;
    for (Eigen::Index t = 0; t < d; ++t) ds.labels[t] = uniform_open(rng) < sigmoid(logits[t]) ? 1.0 : 0.0;
    return ds;
}

std::vector<Shard> synth_logistic(Eigen::Index n, Eigen::Index d, std::size_t m, const ModelVector& w_true,
                                  RandomStream& rng, const PartitionOptions& opts)
{
    require(m >= 1, "at least one shard is required");
    const Dataset ds = synth_dataset(n, d, w_true, rng);
    return partition(ds, m, rng, opts);
}

void write_shard_csv(std::ostream& out, const Shard& shard)
{
    out << shard.dim() << ',' << shard.size() << ',' << format_double(shard.beta) << '\n';
    for (Eigen::Index t = 0; t < shard.size(); ++t) {
        out << format_double(shard.labels[t]);
        for (Eigen::Index j = 0; j < shard.dim(); ++j) out << ',' << format_double(shard.features(t, j));
        out << '\n';
    }
}

Shard read_shard_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw IngestionError("empty shard file");
    const auto header = split(trim(line), ',');
    if (header.size() != 3) throw IngestionError("shard header must be n,d_i,beta", 1);

    Shard shard;
    Eigen::Index n = 0, d = 0;
    try {
        n = static_cast<Eigen::Index>(std::stoll(header[0]));
        d = static_cast<Eigen::Index>(std::stoll(header[1]));
        shard.beta = parse_double(header[2]);
    } catch (const std::exception&) {
        throw IngestionError("malformed shard header", 1);
    }
    if (n < 1 || d < 1) throw IngestionError("shard header sizes must be positive", 1);

    shard.features.resize(d, n);
    shard.labels.resize(d);
    for (Eigen::Index t = 0; t < d; ++t) {
        if (!std::getline(in, line)) throw IngestionError("shard ended early", static_cast<long>(t + 2));
        const auto fields = split(trim(line), ',');
        if (static_cast<Eigen::Index>(fields.size()) != n + 1)
            throw IngestionError("shard row has the wrong width", static_cast<long>(t + 2));
        try {
            shard.labels[t] = parse_double(fields[0]);
            for (Eigen::Index j = 0; j < n; ++j) shard.features(t, j) = parse_double(fields[static_cast<std::size_t>(j + 1)]);
        } catch (const InvalidInput&) {
            throw IngestionError("non-numeric shard entry", static_cast<long>(t + 2));
        }
    }
    validate(shard);
    return shard;
}

} // namespace fedepm
