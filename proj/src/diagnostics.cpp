#include "fedepm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fedepm {

namespace {

void check_family(const ModelVector& w, std::span<const ModelVector> W, std::size_t m)
{
    require(W.size() == m, "one local parameter per objective is required");
    for (const auto& wi : W) require(wi.size() == w.size(), "local parameters must match the global dimension");
}

} // namespace

double penalized_objective(const ModelVector& w, std::span<const ModelVector> W,
                           std::span<const LocalObjective> f, const PenaltyConfig& cfg)
{
    check_family(w, W, f.size());
    double total = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) total += f[i](W[i]).value + phi(W[i] - w, cfg);
    return total;
}

double penalized_objective(const ModelVector& w, std::span<const ModelVector> W, const std::vector<Shard>& shards,
                           const PenaltyConfig& cfg)
{
    const auto f = objectives_from(shards);
    return penalized_objective(w, W, f, cfg);
}

double lambda_star(const ModelVector& w_star, std::span<const LocalObjective> f)
{
    double out = 0.0;
    for (const auto& fi : f) out = std::max(out, fi(w_star).grad.lpNorm<Eigen::Infinity>());
    return out;
}

double lambda_star(const ModelVector& w_star, const std::vector<Shard>& shards)
{
    const auto f = objectives_from(shards);
    return lambda_star(w_star, f);
}

double stationarity_residual_original(const ModelVector& w, std::span<const ModelVector> W,
                                      std::span<const ModelVector> pis, std::span<const LocalObjective> f)
{
    check_family(w, W, f.size());
    require(pis.size() == W.size(), "one multiplier per client is required");

    double grad_res = 0.0;
    double consensus_res = 0.0;
    ModelVector pi_sum = ModelVector::Zero(w.size());
    for (std::size_t i = 0; i < W.size(); ++i) {
        grad_res = std::max(grad_res, (f[i](W[i]).grad + pis[i]).norm());
        consensus_res = std::max(consensus_res, (W[i] - w).norm());
        pi_sum += pis[i];
    }
    return std::max({grad_res, consensus_res, pi_sum.norm()});
}

double stationarity_residual_penalized(const ModelVector& w, std::span<const ModelVector> W,
                                       std::span<const LocalObjective> f, const PenaltyConfig& cfg)
{
    check_family(w, W, f.size());
    const double lambda = cfg.lambda;
    const double eta = cfg.eta;

    double first = 0.0;
    ModelVector sum_block = ModelVector::Zero(w.size());
    for (std::size_t i = 0; i < W.size(); ++i) {
        const ModelVector grad = f[i](W[i]).grad;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            const double gap = W[i][j] - w[j];
            const double q = grad[j] + eta * gap;
            double pi;
            if (gap != 0.0) {
                pi = gap > 0.0 ? 1.0 : -1.0;
                first = std::max(first, std::abs(q + lambda * pi));
            } else {
                pi = std::clamp(-q / lambda, -1.0, 1.0);
                first = std::max(first, std::max(std::abs(q) - lambda, 0.0));
            }
            sum_block[j] += lambda * pi + eta * gap;
        }
    }
    return std::max(first, sum_block.lpNorm<Eigen::Infinity>());
}

double descent_phi(long k, double delta, const ClientHyper& hp, const MonitorParams& params, Eigen::Index n)
{
    if (!params.dp.enabled || delta == 0.0) return 0.0;
    const double a = hp.alpha;
    const double eps_mu = params.dp.epsilon * hp.mu0;
    const double burst = delta * std::pow(a, 2.0 * params.s0 * params.penalty.k0);
    const double kk = static_cast<double>(k);
    const double linear = 4.0 * n * params.penalty.lambda * burst / (eps_mu * (a - 1.0) * std::pow(a, kk));
    const double quadratic =
        8.0 * n * params.penalty.eta * burst * burst / (eps_mu * eps_mu * (a * a - 1.0) * std::pow(a, 2.0 * kk));
    return linear + quadratic;
}

void monitor_step(ConvergenceTrace& trace, const MonitorSnapshot& snap, std::span<const double> r_bounds,
                  std::span<const LocalObjective> f, const MonitorParams& params, long k)
{
    require(snap.w_global != nullptr, "monitor snapshot needs the global aggregate");
    require(static_cast<long>(trace.records.size()) == k, "monitor records must be contiguous from 0");
    const std::size_t m = snap.W.size();
    require(r_bounds.size() == m && snap.hyper.size() == m && snap.delta_max.size() == m,
            "monitor inputs must cover every client");

    ConvergenceRecord rec;
    rec.k = k;
    rec.F = penalized_objective(*snap.w_global, snap.W, f, params.penalty);
    rec.min_mu = snap.min_mu;

    const Eigen::Index n = snap.w_global->size();
    double extra = 0.0;
    bool defined = true;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& hp = snap.hyper[i];
        if (hp.c == 0.0) {
            defined = false;
            break;
        }
        extra += r_bounds[i] * r_bounds[i] /
                 (2.0 * hp.mu0 * hp.c * (hp.alpha - 1.0) * std::pow(hp.alpha, static_cast<double>(k)));
        extra += 2.0 * descent_phi(k - 1, snap.delta_max[i], hp, params, n);
    }
    if (defined) {
        rec.L_surrogate = rec.F + extra;
    } else {
        rec.L_surrogate = std::numeric_limits<double>::quiet_NaN();
        trace.l_surrogate_undefined = true;
    }

    if (!snap.W_prev.empty()) {
        require(snap.W_prev.size() == m, "previous iterate must cover every client");
        for (std::size_t i = 0; i < m; ++i) rec.dW_sq += (snap.W[i] - snap.W_prev[i]).squaredNorm();
    }
    if (snap.w_global_prev != nullptr) rec.dw_global_sq = (*snap.w_global - *snap.w_global_prev).squaredNorm();

    trace.records.push_back(rec);
}

} // namespace fedepm
