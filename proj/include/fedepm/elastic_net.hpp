#pragma once

// Soft-thresholding, the elastic net phi(z) = lambda |z|_1 + (eta/2) |z|^2,
// and the consensus solver argmin_w sum_i phi(w_i - w).

#include "fedepm/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace fedepm {

struct PenaltyConfig {
    double lambda{0.5e-5};
    double eta{1e-5};
    int k0{12};

    void validate() const
    {
        require(lambda > 0.0, "lambda must be positive");
        require(eta > 0.0, "eta must be positive");
        require(k0 >= 1, "k0 must be at least 1");
    }
};

template <class Scalar>
Scalar soft(Scalar t, Scalar a)
{
    if (t > a) return t - a;
    if (t < -a) return t + a;
    return Scalar(0);
}

template <class Derived>
auto soft_vec(const Eigen::MatrixBase<Derived>& w, typename Derived::Scalar a)
{
    using Scalar = typename Derived::Scalar;
    require(a >= Scalar(0), "soft threshold must be nonnegative");
    return w.unaryExpr([a](Scalar t) { return soft(t, a); }).eval();
}

template <class Derived>
typename Derived::Scalar phi(const Eigen::MatrixBase<Derived>& z, const PenaltyConfig& cfg)
{
    using Scalar = typename Derived::Scalar;
    return Scalar(cfg.lambda) * z.template lpNorm<1>() + Scalar(0.5 * cfg.eta) * z.squaredNorm();
}

/// h(w) = sum_i lambda |w - w_i| + (eta/2)(w - w_i)^2
template <class Scalar>
Scalar h_eval(Scalar w, std::span<const Scalar> values, const PenaltyConfig& cfg)
{
    Scalar total{0};
    for (Scalar v : values) {
        const Scalar gap = w - v;
        total += Scalar(cfg.lambda) * std::abs(gap) + Scalar(0.5 * cfg.eta) * gap * gap;
    }
    return total;
}

/// Unique minimizer of h.
///
/// Candidates w(s) = mean + (lambda/eta)(2s/m - 1) are tried for s = 1..m-1 and
/// accepted only when strictly sandwiched by the s-th and (s+1)-th largest
/// values. If none is, the minimizer sits on a data point; ties go to the
/// smallest value.
template <class Scalar>
Scalar ens_scalar(std::span<const Scalar> values, const PenaltyConfig& cfg)
{
    require(!values.empty(), "ens needs at least one value");
    for (Scalar v : values) require(std::isfinite(v), "ens inputs must be finite");

    const auto m = values.size();
    std::vector<Scalar> desc(values.begin(), values.end());
    std::stable_sort(desc.begin(), desc.end(), std::greater<Scalar>());

    const Scalar mean = std::accumulate(desc.begin(), desc.end(), Scalar(0)) / Scalar(m);
    const Scalar ratio = Scalar(cfg.lambda / cfg.eta);
    for (std::size_t s = 1; s < m; ++s) {
        const Scalar candidate = mean + ratio * (Scalar(2 * s) / Scalar(m) - Scalar(1));
        if (desc[s - 1] > candidate && candidate > desc[s]) return candidate;
    }

    // Scan ascending so the first strict improvement keeps the smallest tie.
    Scalar best = desc.back();
    Scalar best_h = h_eval<Scalar>(best, values, cfg);
    for (auto it = desc.rbegin() + 1; it != desc.rend(); ++it) {
        if (*it == *(it - 1)) continue;
        const Scalar hv = h_eval<Scalar>(*it, values, cfg);
        if (hv < best_h) {
            best = *it;
            best_h = hv;
        }
    }
    return best;
}

/// Coordinate-wise ens_scalar over m vectors: argmin_w sum_i phi(w_i - w).
template <class Scalar>
Vector<Scalar> ens(std::span<const Vector<Scalar>> vectors, const PenaltyConfig& cfg)
{
    require(!vectors.empty(), "ens needs at least one vector");
    const Eigen::Index n = vectors.front().size();
    for (const auto& v : vectors) require(v.size() == n, "ens inputs must share a dimension");

    Vector<Scalar> out(n);
    std::vector<Scalar> column(vectors.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < vectors.size(); ++i) column[i] = vectors[i][j];
        out[j] = ens_scalar<Scalar>(column, cfg);
    }
    return out;
}

template <class Scalar>
Vector<Scalar> ens(const std::vector<Vector<Scalar>>& vectors, const PenaltyConfig& cfg)
{
    return ens(std::span<const Vector<Scalar>>(vectors), cfg);
}

template <class Scalar>
Scalar median(std::vector<Scalar> values)
{
    require(!values.empty(), "median of an empty set");
    std::sort(values.begin(), values.end());
    const auto m = values.size();
    if (m % 2 == 1) return values[m / 2];
    return Scalar(0.5) * (values[m / 2 - 1] + values[m / 2]);
}

/// Column-wise median; even m takes the midpoint of the two central values.
template <class Scalar>
Vector<Scalar> median_cols(std::span<const Vector<Scalar>> vectors)
{
    require(!vectors.empty(), "median of an empty set");
    const Eigen::Index n = vectors.front().size();
    for (const auto& v : vectors) require(v.size() == n, "median inputs must share a dimension");

    Vector<Scalar> out(n);
    std::vector<Scalar> column(vectors.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < vectors.size(); ++i) column[i] = vectors[i][j];
        out[j] = median(column);
    }
    return out;
}

template <class Scalar>
Vector<Scalar> median_cols(const std::vector<Vector<Scalar>>& vectors)
{
    return median_cols(std::span<const Vector<Scalar>>(vectors));
}

} // namespace fedepm
