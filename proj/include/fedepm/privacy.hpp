#pragma once

#include "fedepm/random.hpp"
#include "fedepm/types.hpp"

#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace fedepm {

struct DpConfig {
    double epsilon{0.1};
    bool enabled{true};

    void validate() const
    {
        if (enabled) require(epsilon > 0.0, "epsilon must be positive when noise is enabled");
    }
};

struct ClientHyper {
    double mu0{0.05};
    double c{1e-8};
    double alpha{1.001};
};

struct NoiseRecord {
    std::size_t client{0};
    long round{0};
    ModelVector noise;
    double scale{0.0};
};

/// Inverse-CDF Laplace(0, b) transform of a uniform u in (0, 1).
double laplace_from_uniform(double u, double b);

/// One Laplace(0, b) draw; exactly 0 when b == 0.
double laplace_sample(RandomStream& rng, double b);

/// Noise scale b = 2|g|_1 / (eps * mu0 * (1 + c |w_local - w_global|^2) * alpha^(k+1)).
///
/// k = -1 is accepted for the initial upload (alpha power 0).
double noise_scale(const ModelVector& g, const ModelVector& w_local, const ModelVector& w_global, long k,
                   const DpConfig& dp, const ClientHyper& client);

struct Perturbed {
    ModelVector z;
    NoiseRecord record;
};

Perturbed perturb(const ModelVector& w, double b, RandomStream& rng, std::size_t client = 0, long round = 0);

inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

struct SnrInput {
    const ModelVector* w;
    const ModelVector* noise;
};

/// min_i log10(|w_i| / |eps_i|). +inf if any client carries exactly zero noise,
/// -inf if some client's parameters are zero under nonzero noise.
double snr(std::span<const SnrInput> finals);
double snr(const std::vector<ModelVector>& w, const std::vector<ModelVector>& noise);

} // namespace fedepm
