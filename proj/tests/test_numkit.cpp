#include "fedepm/numkit.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fedepm;

namespace {

Shard make_shard(std::initializer_list<std::initializer_list<double>> rows, std::initializer_list<double> labels,
                 double beta)
{
    Shard s;
    s.beta = beta;
    s.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index t = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double x : r) s.features(t, j++) = x;
        ++t;
    }
    s.labels.resize(static_cast<Eigen::Index>(labels.size()));
    t = 0;
    for (double b : labels) s.labels[t++] = b;
    return s;
}

} // namespace

TEST_CASE("value at the origin is ln 2")
{
    const Shard s = make_shard({{1.0, 2.0}, {-3.0, 0.5}, {0.0, 1.0}}, {1.0, 0.0, 1.0}, 0.0);
    const auto vg = logistic_value_grad(ModelVector(ModelVector::Zero(2)), s);
    CHECK(vg.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    ModelVector expect = ModelVector::Zero(2);
    for (Eigen::Index t = 0; t < 3; ++t) expect += (0.5 - s.labels[t]) * s.features.row(t).transpose();
    expect /= 3.0;
    CHECK((vg.grad - expect).norm() < 1e-15);
}

TEST_CASE("single positive sample at the origin")
{
    const Shard s = make_shard({{1.0, 0.0}}, {1.0}, 0.0);
    const auto vg = logistic_value_grad(ModelVector(ModelVector::Zero(2)), s);
    CHECK(vg.grad[0] == doctest::Approx(-0.5));
    CHECK(vg.grad[1] == 0.0);
}

TEST_CASE("gradient matches central differences")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Shard s = oracle::random_shard(rng, 30, 5, 0.001);
        const ModelVector w = oracle::random_vector(rng, 5);
        const auto vg = logistic_value_grad(w, s);
        const auto fd = oracle::central_difference([&](const ModelVector& v) { return logistic_value_grad(v, s).value; }, w);
        CHECK((vg.grad - fd).norm() <= 1e-5 * std::max(1.0, vg.grad.norm()));
    }
}

TEST_CASE("softplus does not overflow")
{
    CHECK(softplus(1000.0) == doctest::Approx(1000.0));
    CHECK(softplus(-1000.0) >= 0.0);
    CHECK(std::isfinite(softplus(-1000.0)));
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("lipschitz bound examples")
{
    CHECK(lipschitz_bound(make_shard({{1.0, 0.0}}, {1.0}, 0.0)) == doctest::Approx(0.25));
    // (|x_1|^2 + |x_2|^2) / (4 * 2) + beta
    CHECK(lipschitz_bound(make_shard({{1.0, 0.0}, {0.0, 1.0}}, {1.0, 0.0}, 0.001)) == doctest::Approx(0.251));
}

TEST_CASE("lipschitz bound holds on sampled pairs")
{
    std::mt19937_64 rng(11);
    const Shard s = oracle::random_shard(rng, 40, 6, 0.001);
    const double r = lipschitz_bound(s);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelVector w = oracle::random_vector(rng, 6, 3.0);
        const ModelVector v = oracle::random_vector(rng, 6, 3.0);
        const double lhs = (logistic_value_grad(w, s).grad - logistic_value_grad(v, s).grad).norm();
        CHECK(lhs <= r * (w - v).norm() * (1.0 + 1e-12));
    }
}

TEST_CASE("global objective is the sum over shards")
{
    std::mt19937_64 rng(3);
    const Shard a = oracle::random_shard(rng, 10, 4, 0.001);
    const ModelVector w = oracle::random_vector(rng, 4);

    const auto single = logistic_value_grad(w, a);
    const auto one = global_objective(w, std::vector<Shard>{a});
    CHECK(one.value == single.value);
    CHECK((one.grad - single.grad).norm() == 0.0);

    const auto twice = global_objective(w, std::vector<Shard>{a, a});
    CHECK(twice.value == doctest::Approx(2.0 * single.value).epsilon(1e-14));

    std::vector<Shard> three{oracle::random_shard(rng, 8, 4, 0.001), oracle::random_shard(rng, 12, 4, 0.001),
                             oracle::random_shard(rng, 5, 4, 0.001)};
    double value = 0.0;
    ModelVector grad = ModelVector::Zero(4);
    for (const auto& s : three) {
        const auto vg = logistic_value_grad(w, s);
        value += vg.value;
        grad += vg.grad;
    }
    const auto total = global_objective(w, three);
    CHECK(std::abs(total.value - value) <= 1e-12);
    CHECK((total.grad - grad).norm() <= 1e-12);
}

TEST_CASE("invalid shards are rejected")
{
    CHECK_THROWS_AS(global_objective(ModelVector(ModelVector::Zero(2)), std::vector<Shard>{}), InvalidInput);
    Shard bad = make_shard({{1.0, 0.0}}, {0.5}, 0.0);
    CHECK_THROWS_AS(validate(bad), InvalidInput);
    Shard neg = make_shard({{1.0, 0.0}}, {1.0}, -1.0);
    CHECK_THROWS_AS(validate(neg), InvalidInput);
    CHECK_THROWS_AS(logistic_value_grad(ModelVector(ModelVector::Zero(3)), make_shard({{1.0, 0.0}}, {1.0}, 0.0)),
                    InvalidInput);
}

TEST_CASE("kernels work in single precision")
{
    DataShard<float> s;
    s.features.resize(1, 2);
    s.features << 1.0f, 0.0f;
    s.labels.resize(1);
    s.labels << 1.0f;
    const auto vg = logistic_value_grad(Vector<float>(Vector<float>::Zero(2)), s);
    CHECK(vg.grad[0] == doctest::Approx(-0.5f));
}
