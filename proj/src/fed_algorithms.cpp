#include "fedepm/fed_algorithms.hpp"

#include <cmath>

namespace fedepm {

ClientState ClientState::initial(Eigen::Index n, const ClientHyper& hyper)
{
    require(hyper.mu0 > 0.0, "mu0 must be positive");
    require(hyper.c >= 0.0, "c must be nonnegative");
    require(hyper.alpha > 1.0, "alpha must exceed 1");
    ClientState s;
    s.w_local = ModelVector::Zero(n);
    s.z_uploaded = ModelVector::Zero(n);
    s.mu = hyper.mu0;
    s.hyper = hyper;
    s.last_noise.noise = ModelVector::Zero(n);
    return s;
}

void BaselineConfig::validate() const
{
    require(prox_mu >= 0.0, "prox_mu must be nonnegative");
    require(inner_steps >= 1, "inner_steps must be at least 1");
    if (step_rule == StepRule::Fixed) require(fixed_step >= 0.0, "fixed step must be nonnegative");
}

ClientState fedepm_client_update(const ClientState& state, const ModelVector& w_global, const ModelVector& g_cached,
                                 long k, const PenaltyConfig& cfg)
{
    require(state.w_local.size() == w_global.size() && g_cached.size() == w_global.size(),
            "client update dimensions disagree");
    require(k >= 0, "iteration index must be nonnegative");

    const ModelVector gap = state.w_local - w_global;
    const auto& hp = state.hyper;
    const double mu = hp.mu0 * (1.0 + hp.c * gap.squaredNorm()) * std::pow(hp.alpha, static_cast<double>(k + 1));
    const ModelVector shifted = mu * gap - g_cached;

    ClientState next = state;
    next.mu = mu;
    next.w_local = w_global + soft_vec(shifted, cfg.lambda) / (cfg.eta + mu);
    return next;
}

ModelVector fedepm_aggregate(std::span<const ModelVector> uploads, const PenaltyConfig& cfg)
{
    return ens(uploads, cfg);
}

double step_size_gamma(long d_i, long k, int k0)
{
    require(d_i >= 1 && k >= 0 && k0 >= 1, "invalid step-size arguments");
    return 2.0 * static_cast<double>(d_i) / std::sqrt(2.0 * k0 + static_cast<double>(k / k0));
}

double baseline_step(const BaselineConfig& cfg, long d_i, long k, int k0)
{
    return cfg.step_rule == StepRule::Fixed ? cfg.fixed_step : step_size_gamma(d_i, k, k0);
}

ClientState sfedavg_client_update(const ClientState& state, const ModelVector& w_global, const LocalObjective& f,
                                  long k, int k0, double step)
{
    require(state.w_local.size() == w_global.size(), "client update dimensions disagree");
    const ModelVector& start = is_communication_iteration(k, k0) ? w_global : state.w_local;
    ClientState next = state;
    next.w_local = start - step * f(start).grad;
    return next;
}

ClientState sfedavg_client_update(const ClientState& state, const ModelVector& w_global, const Shard& shard, long k,
                                  int k0, double step)
{
    return sfedavg_client_update(
        state, w_global, [&shard](const ModelVector& w) { return logistic_value_grad(w, shard); }, k, k0, step);
}

ClientState sfedprox_client_update(const ClientState& state, const ModelVector& w_global, const LocalObjective& f,
                                   long k, int k0, const BaselineConfig& cfg, double step)
{
    require(state.w_local.size() == w_global.size(), "client update dimensions disagree");
    require(cfg.inner_steps >= 1, "inner_steps must be at least 1");
    ModelVector v = is_communication_iteration(k, k0) ? w_global : state.w_local;
    for (int t = 0; t < cfg.inner_steps; ++t) {
        const ModelVector grad = f(v).grad + cfg.prox_mu * (v - w_global);
        v -= step * grad;
    }
    ClientState next = state;
    next.w_local = std::move(v);
    return next;
}

ClientState sfedprox_client_update(const ClientState& state, const ModelVector& w_global, const Shard& shard, long k,
                                   int k0, const BaselineConfig& cfg, double step)
{
    return sfedprox_client_update(
        state, w_global, [&shard](const ModelVector& w) { return logistic_value_grad(w, shard); }, k, k0, cfg, step);
}

ModelVector mean_aggregate(std::span<const ModelVector> uploads)
{
    require(!uploads.empty(), "mean aggregation needs a nonempty selected set");
    ModelVector total = ModelVector::Zero(uploads.front().size());
    for (const auto& z : uploads) {
        require(z.size() == total.size(), "uploads must share a dimension");
        total += z;
    }
    return total / static_cast<double>(uploads.size());
}

} // namespace fedepm
