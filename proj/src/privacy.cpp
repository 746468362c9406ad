#include "fedepm/privacy.hpp"

#include <algorithm>
#include <cmath>

namespace fedepm {

double laplace_from_uniform(double u, double b)
{
    require(b >= 0.0, "laplace scale must be nonnegative");
    require(u > 0.0 && u < 1.0, "uniform draw must lie in (0, 1)");
    const double centered = u - 0.5;
    if (centered == 0.0 || b == 0.0) return 0.0;
    const double sign = centered > 0.0 ? 1.0 : -1.0;
    return -b * sign * std::log1p(-2.0 * std::abs(centered));
}

double laplace_sample(RandomStream& rng, double b)
{
    require(b >= 0.0, "laplace scale must be nonnegative");
    if (b == 0.0) return 0.0;
    return laplace_from_uniform(uniform_open(rng), b);
}

double noise_scale(const ModelVector& g, const ModelVector& w_local, const ModelVector& w_global, long k,
                   const DpConfig& dp, const ClientHyper& client)
{
    require(g.size() == w_local.size() && w_local.size() == w_global.size(),
            "noise_scale vectors must share a dimension");
    require(k >= -1, "iteration index must be >= -1");
    if (!dp.enabled) return 0.0;
    require(dp.epsilon > 0.0, "epsilon must be positive when noise is enabled");

    const double sensitivity = 2.0 * g.lpNorm<1>();
    const double drift = 1.0 + client.c * (w_local - w_global).squaredNorm();
    const double decay = std::pow(client.alpha, static_cast<double>(k + 1));
    return sensitivity / (dp.epsilon * client.mu0 * drift * decay);
}

Perturbed perturb(const ModelVector& w, double b, RandomStream& rng, std::size_t client, long round)
{
    require(b >= 0.0, "laplace scale must be nonnegative");
    Perturbed out;
    out.record.client = client;
    out.record.round = round;
    out.record.scale = b;
    out.record.noise = ModelVector::Zero(w.size());
    if (b > 0.0) {
        for (Eigen::Index j = 0; j < w.size(); ++j) out.record.noise[j] = laplace_sample(rng, b);
    }
    out.z = w + out.record.noise;
    return out;
}

double snr(std::span<const SnrInput> finals)
{
    require(!finals.empty(), "snr needs at least one client");
    double worst = kInfiniteSnr;
    for (const auto& entry : finals) {
        const double noise_norm = entry.noise->norm();
        if (noise_norm == 0.0) return kInfiniteSnr;
        const double signal = entry.w->norm();
        const double value = signal == 0.0 ? -kInfiniteSnr : std::log10(signal / noise_norm);
        worst = std::min(worst, value);
    }
    return worst;
}

double snr(const std::vector<ModelVector>& w, const std::vector<ModelVector>& noise)
{
    require(w.size() == noise.size(), "snr needs one noise vector per client");
    std::vector<SnrInput> finals;
    finals.reserve(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) finals.push_back({&w[i], &noise[i]});
    return snr(finals);
}

} // namespace fedepm
