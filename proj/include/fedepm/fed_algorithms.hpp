#pragma once

// Per-round update rules: FedEPM client step and elastic-net aggregation, the
// SFedAvg / SFedProx client steps, and the selected-set mean.

#include "fedepm/elastic_net.hpp"
#include "fedepm/numkit.hpp"
#include "fedepm/privacy.hpp"

#include <span>
#include <vector>

namespace fedepm {

struct ClientState {
    ModelVector w_local;
    ModelVector z_uploaded;
    double mu{0.05};
    ClientHyper hyper;
    NoiseRecord last_noise;

    static ClientState initial(Eigen::Index n, const ClientHyper& hyper);
};

enum class StepRule { Diminishing, Fixed };

struct BaselineConfig {
    double prox_mu{1e-5};
    int inner_steps{3};
    StepRule step_rule{StepRule::Diminishing};
    double fixed_step{0.0};

    void validate() const;
};

inline bool is_communication_iteration(long k, int k0) { return k % k0 == 0; }

/// mu_{k+1} = mu0 (1 + c |w_i^k - w|^2) alpha^(k+1); then a soft-thresholded
/// prox step around the broadcast point using the period's cached gradient.
ClientState fedepm_client_update(const ClientState& state, const ModelVector& w_global, const ModelVector& g_cached,
                                 long k, const PenaltyConfig& cfg);

/// argmin_w sum_i phi(z_i - w) over all m stored uploads.
ModelVector fedepm_aggregate(std::span<const ModelVector> uploads, const PenaltyConfig& cfg);

/// gamma = 2 d_i / sqrt(2 k0 + floor(k / k0))
double step_size_gamma(long d_i, long k, int k0);

/// Step size for a client under `cfg`: the formula above or the fixed override.
double baseline_step(const BaselineConfig& cfg, long d_i, long k, int k0);

ClientState sfedavg_client_update(const ClientState& state, const ModelVector& w_global, const LocalObjective& f,
                                  long k, int k0, double step);
ClientState sfedavg_client_update(const ClientState& state, const ModelVector& w_global, const Shard& shard, long k,
                                  int k0, double step);

/// `inner_steps` gradient steps on f(v) + (mu/2)|v - w_global|^2.
ClientState sfedprox_client_update(const ClientState& state, const ModelVector& w_global, const LocalObjective& f,
                                   long k, int k0, const BaselineConfig& cfg, double step);
ClientState sfedprox_client_update(const ClientState& state, const ModelVector& w_global, const Shard& shard, long k,
                                   int k0, const BaselineConfig& cfg, double step);

ModelVector mean_aggregate(std::span<const ModelVector> uploads);

} // namespace fedepm
