#pragma once

// Logistic-regression kernels over dense shards.
//
//   f_i(w) = (1/d_i) sum_t [ log(1 + e^{<x_t,w>}) - b_t <x_t,w> + (beta/2)|w|^2 ]
//
// All kernels are templated on the scalar type; the rest of the library
// instantiates them with double.

#include "fedepm/types.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace fedepm {

/// One client's samples. Rows of `features` are the x_t.
template <class Scalar = double>
struct DataShard {
    RowMatrix<Scalar> features;
    Vector<Scalar> labels;
    Scalar beta{0};

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
};

using Shard = DataShard<double>;

template <class Scalar>
struct ValueGrad {
    Scalar value;
    Vector<Scalar> grad;
};

template <class Scalar>
void validate(const DataShard<Scalar>& shard)
{
    require(shard.size() >= 1, "shard must hold at least one sample");
    require(shard.labels.size() == shard.size(), "label count must match row count");
    require(shard.beta >= Scalar(0), "beta must be nonnegative");
    for (Eigen::Index t = 0; t < shard.labels.size(); ++t) {
        const Scalar b = shard.labels[t];
        require(b == Scalar(0) || b == Scalar(1), "labels must be 0 or 1");
    }
}

/// log(1 + e^z) without overflow.
template <class Scalar>
Scalar softplus(Scalar z)
{
    using std::abs, std::exp, std::log1p, std::max;
    return max(z, Scalar(0)) + log1p(exp(-abs(z)));
}

template <class Scalar>
Scalar sigmoid(Scalar z)
{
    using std::exp;
    if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
    const Scalar e = exp(z);
    return e / (Scalar(1) + e);
}

template <class Scalar>
ValueGrad<Scalar> logistic_value_grad(const Vector<Scalar>& w, const DataShard<Scalar>& shard)
{
    require(w.size() == shard.dim(), "model dimension does not match shard");
    require(shard.size() >= 1, "shard must hold at least one sample");

    const Vector<Scalar> z = shard.features * w;
    const Scalar inv_d = Scalar(1) / Scalar(shard.size());

    Scalar loss{0};
    Vector<Scalar> residual(z.size());
    for (Eigen::Index t = 0; t < z.size(); ++t) {
        loss += softplus(z[t]) - shard.labels[t] * z[t];
        residual[t] = sigmoid(z[t]) - shard.labels[t];
    }

    ValueGrad<Scalar> out;
    out.value = loss * inv_d + Scalar(0.5) * shard.beta * w.squaredNorm();
    out.grad = inv_d * (shard.features.transpose() * residual) + shard.beta * w;
    return out;
}

/// Trace bound sum_t |x_t|^2 / (4 d_i) + beta on the gradient-Lipschitz constant.
template <class Scalar>
Scalar lipschitz_bound(const DataShard<Scalar>& shard)
{
    return shard.features.squaredNorm() / (Scalar(4) * Scalar(shard.size())) + shard.beta;
}

/// f = sum_i f_i and its gradient.
template <class Scalar>
ValueGrad<Scalar> global_objective(const Vector<Scalar>& w, std::span<const DataShard<Scalar>> shards)
{
    require(!shards.empty(), "global objective needs at least one shard");
    ValueGrad<Scalar> total{Scalar(0), Vector<Scalar>::Zero(w.size())};
    for (const auto& shard : shards) {
        auto vg = logistic_value_grad(w, shard);
        total.value += vg.value;
        total.grad += vg.grad;
    }
    return total;
}

template <class Scalar>
ValueGrad<Scalar> global_objective(const Vector<Scalar>& w, const std::vector<DataShard<Scalar>>& shards)
{
    return global_objective(w, std::span<const DataShard<Scalar>>(shards));
}

/// Type-erased local objective; diagnostics accept any smooth f_i through this.
using LocalObjective = std::function<ValueGrad<double>(const ModelVector&)>;

inline std::vector<LocalObjective> objectives_from(const std::vector<Shard>& shards)
{
    std::vector<LocalObjective> out;
    out.reserve(shards.size());
    for (const auto& shard : shards)
        out.emplace_back([&shard](const ModelVector& w) { return logistic_value_grad(w, shard); });
    return out;
}

} // namespace fedepm
