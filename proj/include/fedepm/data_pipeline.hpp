#pragma once

#include "fedepm/numkit.hpp"
#include "fedepm/privacy.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedepm {

enum class Provenance { Adult, Synthetic };

struct Dataset {
    RowMatrix<double> features;
    ModelVector labels;
    Provenance provenance{Provenance::Synthetic};

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

class IngestionError : public std::runtime_error {
public:
    IngestionError(const std::string& what, long row = -1);
    long row() const { return row_; }

private:
    long row_;
};

/// UCI Adult rows (train and test concatenated): rows with '?' are dropped,
/// categorical columns are coded by first appearance, every column is scaled
/// to unit Euclidean norm and the label is 1 iff the income field holds ">50K".
Dataset load_adult(const std::filesystem::path& path);
Dataset load_adult(std::istream& in);

/// Scales each column to unit Euclidean norm; all-zero columns are left as is.
void normalize_columns(RowMatrix<double>& features);

/// Unbiased Fisher-Yates shuffle of 0..n-1 drawn from `rng`.
std::vector<Eigen::Index> random_permutation(Eigen::Index n, RandomStream& rng);

double standard_normal(RandomStream& rng);

enum class ShardSizing { Equal, Dirichlet };

struct PartitionOptions {
    ShardSizing sizing{ShardSizing::Equal};
    double dirichlet_alpha{1.0};
    double beta{0.001};
};

/// Sizes summing to d with every entry >= 1. Equal sizing gives the first
/// d mod m shards one extra row.
std::vector<Eigen::Index> shard_sizes(Eigen::Index d, std::size_t m, RandomStream& rng,
                                      const PartitionOptions& opts);

struct Partition {
    std::vector<Shard> shards;
    /// Source row ids of each shard, in shard order.
    std::vector<std::vector<Eigen::Index>> row_ids;
};

Partition partition_with_ids(const Dataset& ds, std::size_t m, RandomStream& rng, const PartitionOptions& opts = {});
std::vector<Shard> partition(const Dataset& ds, std::size_t m, RandomStream& rng, const PartitionOptions& opts = {});

/// iid standard-normal features, column-normalized, labels ~ Bernoulli(sigmoid(<x, w_true>)).
Dataset synth_dataset(Eigen::Index n, Eigen::Index d, const ModelVector& w_true, RandomStream& rng);

std::vector<Shard> synth_logistic(Eigen::Index n, Eigen::Index d, std::size_t m, const ModelVector& w_true,
                                  RandomStream& rng, const PartitionOptions& opts = {});

/// Shard text format: "n,d_i,beta" header then one "label,x_1,...,x_n" line per row.
void write_shard_csv(std::ostream& out, const Shard& shard);
Shard read_shard_csv(std::istream& in);

/// Shortest text form that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& text);

} // namespace fedepm
