#pragma once

// Stationarity residuals, the exact-penalty threshold and the per-iteration
// convergence monitor.

#include "fedepm/elastic_net.hpp"
#include "fedepm/numkit.hpp"
#include "fedepm/privacy.hpp"

#include <span>
#include <vector>

namespace fedepm {

/// F(w, W) = sum_i f_i(w_i) + phi(w_i - w)
double penalized_objective(const ModelVector& w, std::span<const ModelVector> W,
                           std::span<const LocalObjective> f, const PenaltyConfig& cfg);
double penalized_objective(const ModelVector& w, std::span<const ModelVector> W, const std::vector<Shard>& shards,
                           const PenaltyConfig& cfg);

/// max_i max_j |grad f_i(w*)_j|
double lambda_star(const ModelVector& w_star, std::span<const LocalObjective> f);
double lambda_star(const ModelVector& w_star, const std::vector<Shard>& shards);

/// Largest violation of: grad f_i(w_i) + pi_i = 0, w_i = w, sum_i pi_i = 0.
double stationarity_residual_original(const ModelVector& w, std::span<const ModelVector> W,
                                      std::span<const ModelVector> pis, std::span<const LocalObjective> f);

/// Largest violation of the penalized first-order conditions, with each
/// subgradient of |w_ij - w_j| at a tie chosen to minimize the first block.
double stationarity_residual_penalized(const ModelVector& w, std::span<const ModelVector> W,
                                       std::span<const LocalObjective> f, const PenaltyConfig& cfg);

struct ConvergenceRecord {
    long k{0};
    double F{0.0};
    /// NaN when some c_i == 0.
    double L_surrogate{0.0};
    double dW_sq{0.0};
    double dw_global_sq{0.0};
    double min_mu{0.0};
};

struct ConvergenceTrace {
    std::vector<ConvergenceRecord> records;
    bool l_surrogate_undefined{false};
    bool s0_nominal{false};
};

struct MonitorSnapshot {
    const ModelVector* w_global{nullptr};
    /// Aggregate in force at k - 1; null at k = 0.
    const ModelVector* w_global_prev{nullptr};
    std::span<const ModelVector> W;
    /// W^{k-1}; empty at k = 0.
    std::span<const ModelVector> W_prev;
    std::span<const ClientHyper> hyper;
    /// Running max of the 2|g_i|_1 sensitivity surrogate per client.
    std::span<const double> delta_max;
    double min_mu{0.0};
};

struct MonitorParams {
    PenaltyConfig penalty;
    DpConfig dp;
    int s0{1};
};

/// phi_{i,k} from the descent bound, with delta standing in for the
/// unobservable worst-case sensitivity.
double descent_phi(long k, double delta, const ClientHyper& hp, const MonitorParams& params, Eigen::Index n);

/// Appends the record for iteration k.
void monitor_step(ConvergenceTrace& trace, const MonitorSnapshot& snap, std::span<const double> r_bounds,
                  std::span<const LocalObjective> f, const MonitorParams& params, long k);

} // namespace fedepm
