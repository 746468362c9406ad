#include "fedepm/data_pipeline.hpp"
#include "fedepm/sim_harness.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace fedepm;

namespace {

std::vector<Shard> synthetic(std::size_t m, Eigen::Index n = 5, Eigen::Index d = 200, std::uint64_t seed = 3)
{
    RandomStream rng(seed);
    ModelVector w_true(n);
    for (Eigen::Index j = 0; j < n; ++j) w_true[j] = 5.0 * standard_normal(rng);
    return synth_logistic(n, d, m, w_true, rng);
}

ExperimentConfig small_config(Algorithm a = Algorithm::FedEpm)
{
    ExperimentConfig cfg;
    cfg.algorithm = a;
    cfg.m = 4;
    cfg.k0 = 3;
    cfg.rho = 0.5;
    cfg.max_iterations = 60;
    cfg.seed = 11;
    return cfg;
}

std::string trace_of(const ExperimentResult& r)
{
    std::ostringstream out;
    write_trace_csv(out, r);
    return out.str();
}

} // namespace

TEST_CASE("iid selection")
{
    RandomStream rng(1);
    const auto all = select_clients_iid(rng, 7, 1.0);
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
    for (int trial = 0; trial < 50; ++trial) {
        const auto s = select_clients_iid(rng, 10, 0.5);
        CHECK(s.size() == 5);
        CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 5);
        CHECK(std::is_sorted(s.begin(), s.end()));
        CHECK(s.back() < 10);
    }
    CHECK(select_clients_iid(rng, 10, 0.01).size() == 1);
    CHECK_THROWS_AS(select_clients_iid(rng, 10, 0.0), InvalidInput);
}

TEST_CASE("coverage selection covers every window")
{
    RandomStream rng(2);
    ClientSelector sel(SelectionPolicy::Coverage, 4, 0.5, 2, rng);
    CHECK(sel.window() == 2);
    CHECK_FALSE(sel.window_is_nominal());
    std::vector<std::vector<std::size_t>> picks;
    for (int r = 0; r < 8; ++r) picks.push_back(sel.next(rng));
    for (std::size_t r = 0; r + 1 < picks.size(); ++r) {
        std::set<std::size_t> u(picks[r].begin(), picks[r].end());
        u.insert(picks[r + 1].begin(), picks[r + 1].end());
        CHECK(u == std::set<std::size_t>{0, 1, 2, 3});
    }
    CHECK_THROWS_AS(ClientSelector(SelectionPolicy::Coverage, 4, 0.5, std::nullopt, rng), InvalidInput);
    ClientSelector iid(SelectionPolicy::Iid, 10, 0.3, std::nullopt, rng);
    CHECK(iid.window() == 4);
    CHECK(iid.window_is_nominal());
}

TEST_CASE("stopping rule")
{
    const std::vector<double> none;
    CHECK(should_stop(none, 1e-7, 14));
    const std::vector<double> flat{3.0, 3.0, 3.0, 3.0};
    CHECK(should_stop(flat, 1.0, 14));
    const std::vector<double> two{3.0, 2.0};
    CHECK_FALSE(should_stop(two, 1.0, 14));
    const std::vector<double> moving{10.0, 8.0, 6.0, 4.0};
    CHECK_FALSE(should_stop(moving, 1.0, 14));
}

TEST_CASE("single client converges to the shard minimizer")
{
    RandomStream rng(5);
    Dataset ds;
    ds.features.resize(60, 1);
    ds.labels.resize(60);
    for (Eigen::Index t = 0; t < 60; ++t) {
        ds.features(t, 0) = standard_normal(rng);
        ds.labels[t] = uniform_open(rng) < sigmoid(0.8 * ds.features(t, 0)) ? 1.0 : 0.0;
    }
    const auto shards = partition(ds, 1, rng);

    ExperimentConfig cfg;
    cfg.m = 1;
    cfg.rho = 1.0;
    cfg.k0 = 2;
    cfg.dp.enabled = false;
    cfg.client.mu0 = 1.0;
    cfg.stop_rule = StopRule::Never;
    cfg.max_iterations = 3000;
    const auto res = run_experiment(cfg, shards);
    const double ref = oracle::ternary_min(
        [&](double x) { return logistic_value_grad(ModelVector(ModelVector::Constant(1, x)), shards[0]).value; }, -20.0,
        20.0);
    CHECK(std::abs(res.w_final[0] - ref) <= 1e-3);
    CHECK(res.budget_exhausted);
}

TEST_CASE("k0 = 1 communicates every iteration")
{
    auto cfg = small_config();
    cfg.k0 = 1;
    cfg.max_iterations = 40;
    const auto res = run_experiment(cfg, synthetic(4));
    CHECK(res.rounds.back().cr == res.iterations);
    CHECK(timing_metrics(res).cr == res.iterations);
}

TEST_CASE("repeated runs produce identical traces")
{
    const auto shards = synthetic(4);
    for (Algorithm a : {Algorithm::FedEpm, Algorithm::SFedAvg, Algorithm::SFedProx}) {
        auto cfg = small_config(a);
        const std::string first = trace_of(run_experiment(cfg, shards));
        CHECK(first == trace_of(run_experiment(cfg, shards)));
        cfg.workers = 3;
        CHECK(first == trace_of(run_experiment(cfg, shards)));
    }
}

TEST_CASE("flat objective stops after the fourth aggregation")
{
    auto cfg = small_config();
    cfg.dp.enabled = false;
    cfg.stub_local_steps = true;
    cfg.k0 = 5;
    const auto res = run_experiment(cfg, synthetic(4));
    CHECK(res.reason == StopReason::ObjectiveStalled);
    CHECK(res.rounds.back().k == 3 * cfg.k0);
    CHECK(res.rounds.back().cr == 4);
    CHECK(res.iterations == 3 * cfg.k0 + 1);
    CHECK_FALSE(res.budget_exhausted);
    // Zero-work clients report no local compute.
    CHECK(timing_metrics(res).lct_mean_s == 0.0);
    for (const auto& rec : res.convergence.records) {
        CHECK(rec.dW_sq == 0.0);
        CHECK(rec.dw_global_sq == 0.0);
    }
}

TEST_CASE("more inner steps cost more local time")
{
    const auto shards = synthetic(4);
    auto cfg = small_config(Algorithm::SFedProx);
    cfg.stop_rule = StopRule::Never;
    const auto base = timing_metrics(run_experiment(cfg, shards));
    cfg.baseline.inner_steps *= 2;
    const auto doubled = timing_metrics(run_experiment(cfg, shards));
    CHECK(doubled.lct_mean_s > base.lct_mean_s);
    CHECK(doubled.tct_s > base.tct_s);
}

TEST_CASE("wall clock mode reports positive times")
{
    auto cfg = small_config();
    cfg.clock = ClockMode::Wall;
    cfg.stop_rule = StopRule::Never;
    const auto res = run_experiment(cfg, synthetic(4));
    const auto t = timing_metrics(res);
    CHECK(t.tct_s > 0.0);
    CHECK(t.lct_mean_s > 0.0);
    CHECK(t.lct_max_s >= t.lct_mean_s);
}

TEST_CASE("unselected clients hold and uploads happen at period ends")
{
    const auto shards = synthetic(6);
    for (Algorithm a : {Algorithm::FedEpm, Algorithm::SFedAvg, Algorithm::SFedProx}) {
        auto cfg = small_config(a);
        cfg.m = 6;
        cfg.stop_rule = StopRule::Never;
        long events = 0;
        run_experiment(cfg, shards, [&](const IterationEvent& ev) {
            ++events;
            CHECK(ev.aggregated == (ev.k % cfg.k0 == 0));
            CHECK(ev.uploaded == ((ev.k + 1) % cfg.k0 == 0));
            if (ev.k < cfg.k0) CHECK(ev.selected.size() == cfg.m);
            else CHECK(ev.selected.size() == cfg.selection_size());
            const std::set<std::size_t> chosen(ev.selected.begin(), ev.selected.end());
            for (std::size_t i = 0; i < cfg.m; ++i) {
                const auto& b = ev.before[i];
                const auto& c = ev.after[i];
                if (!chosen.count(i)) {
                    CHECK((b.w_local - c.w_local).norm() == 0.0);
                    CHECK((b.z_uploaded - c.z_uploaded).norm() == 0.0);
                    CHECK(b.mu == c.mu);
                } else if (!ev.uploaded) {
                    CHECK((b.z_uploaded - c.z_uploaded).norm() == 0.0);
                }
            }
        });
        CHECK(events == cfg.max_iterations);
    }
}

TEST_CASE("trace rows and budget flag")
{
    auto cfg = small_config();
    cfg.stop_rule = StopRule::Never;
    const auto res = run_experiment(cfg, synthetic(4));
    CHECK(res.budget_exhausted);
    CHECK(res.reason == StopReason::BudgetExhausted);
    CHECK(res.iterations == cfg.max_iterations);
    CHECK(res.rows.size() == static_cast<std::size_t>(cfg.max_iterations));
    CHECK(res.convergence.records.size() == static_cast<std::size_t>(cfg.max_iterations));
    CHECK(res.convergence.s0_nominal);
    const std::string csv = trace_of(res);
    CHECK(csv.rfind(std::string(kTraceHeader) + "\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == cfg.max_iterations + 1);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(std::isfinite(res.snr));
}

TEST_CASE("noise-free runs report infinite snr")
{
    auto cfg = small_config();
    cfg.dp.enabled = false;
    const auto res = run_experiment(cfg, synthetic(4));
    CHECK(res.snr == kInfiniteSnr);
}

TEST_CASE("monitor can be disabled")
{
    auto cfg = small_config();
    cfg.monitor = false;
    const auto res = run_experiment(cfg, synthetic(4));
    CHECK(res.convergence.records.empty());
    CHECK(std::isnan(res.rows.front().F));
}

TEST_CASE("invalid configurations")
{
    const auto shards = synthetic(4);
    auto cfg = small_config();
    cfg.m = 5;
    CHECK_THROWS_AS(run_experiment(cfg, shards), InvalidInput);
    cfg = small_config();
    cfg.rho = 1.5;
    CHECK_THROWS_AS(run_experiment(cfg, shards), InvalidInput);
    cfg = small_config();
    cfg.selection = SelectionPolicy::Coverage;
    CHECK_THROWS_AS(run_experiment(cfg, shards), InvalidInput);
    cfg = small_config();
    cfg.k0 = 0;
    CHECK_THROWS_AS(run_experiment(cfg, shards), InvalidInput);
    CHECK_THROWS_AS(parse_algorithm("fedsgd"), InvalidInput);
    CHECK(parse_algorithm(to_string(Algorithm::SFedProx)) == Algorithm::SFedProx);
}

TEST_CASE("automatic penalty")
{
    ExperimentConfig cfg;
    const auto p = cfg.effective_penalty();
    CHECK(p.eta == doctest::Approx((0.02 * 50 + 1.0) * 0.6 * 1e-5));
    CHECK(p.lambda == doctest::Approx(p.eta / 2.0));
    CHECK(p.k0 == 12);
    CHECK(cfg.selection_size() == 25);
}
