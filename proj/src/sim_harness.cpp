#include "fedepm/sim_harness.hpp"

#include "fedepm/data_pipeline.hpp"
#include "fedepm/worker_pool.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace fedepm {

std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::FedEpm: return "fedepm";
    case Algorithm::SFedAvg: return "sfedavg";
    case Algorithm::SFedProx: return "sfedprox";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& text)
{
    if (text == "fedepm") return Algorithm::FedEpm;
    if (text == "sfedavg") return Algorithm::SFedAvg;
    if (text == "sfedprox") return Algorithm::SFedProx;
    throw InvalidInput("unknown algorithm '" + text + "'");
}

void ExperimentConfig::validate() const
{
    require(m >= 1, "m must be at least 1");
    require(k0 >= 1, "k0 must be at least 1");
    require(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    require(max_iterations >= k0, "max_iterations must be at least k0");
    require(workers >= 1, "workers must be at least 1");
    dp.validate();
    baseline.validate();
    require(client.mu0 > 0.0, "mu0 must be positive");
    require(client.c >= 0.0, "c must be nonnegative");
    require(client.alpha > 1.0, "alpha must exceed 1");
    if (selection == SelectionPolicy::Coverage) {
        require(s0.has_value(), "the coverage policy needs s0");
        require(*s0 >= 1 && static_cast<std::size_t>(*s0) <= m, "s0 must lie in [1, m]");
    }
    if (!auto_penalty) penalty.validate();
}

PenaltyConfig ExperimentConfig::effective_penalty() const
{
    PenaltyConfig out = penalty;
    out.k0 = k0;
    if (auto_penalty) {
        out.eta = (0.02 * static_cast<double>(m) + 1.0) * (rho + 0.1) * 1e-5;
        out.lambda = out.eta / 2.0;
    }
    return out;
}

std::size_t ExperimentConfig::selection_size() const
{
    const auto q = static_cast<std::size_t>(std::llround(rho * static_cast<double>(m)));
    return std::clamp<std::size_t>(q, 1, m);
}

std::vector<std::size_t> select_clients_iid(RandomStream& rng, std::size_t m, double rho)
{
    require(m >= 1, "m must be at least 1");
    require(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    const auto q = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(rho * static_cast<double>(m))), 1, m);
    std::vector<std::size_t> ids(m);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    if (q == m) return ids;
    // Partial Fisher-Yates: the first q slots are a uniform q-subset.
    for (std::size_t i = 0; i < q; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, m - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(q);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ClientSelector::ClientSelector(SelectionPolicy policy, std::size_t m, double rho, std::optional<int> s0,
                               RandomStream& rng)
    : policy_(policy), m_(m), rho_(rho)
{
    require(m >= 1, "m must be at least 1");
    require(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
    if (policy == SelectionPolicy::Iid) {
        window_ = static_cast<int>(std::ceil(1.0 / rho - 1e-12));
        return;
    }
    require(s0.has_value() && *s0 >= 1 && static_cast<std::size_t>(*s0) <= m, "coverage policy needs 1 <= s0 <= m");
    window_ = *s0;
    const auto perm = random_permutation(static_cast<Eigen::Index>(m), rng);
    blocks_.resize(static_cast<std::size_t>(*s0));
    for (std::size_t i = 0; i < m; ++i) blocks_[i % blocks_.size()].push_back(static_cast<std::size_t>(perm[i]));
    for (auto& b : blocks_) std::sort(b.begin(), b.end());
}

std::vector<std::size_t> ClientSelector::next(RandomStream& rng)
{
    if (policy_ == SelectionPolicy::Iid) return select_clients_iid(rng, m_, rho_);
    const auto& block = blocks_[cursor_];
    cursor_ = (cursor_ + 1) % blocks_.size();
    return block;
}

bool should_stop(std::span<const double> history, double grad_sq, Eigen::Index n)
{
    if (grad_sq < 1e-6) return true;
    if (history.size() < 4) return false;
    const auto tail = history.subspan(history.size() - 4);
    const double mean = std::accumulate(tail.begin(), tail.end(), 0.0) / 4.0;
    double var = 0.0;
    for (double f : tail) var += (f - mean) * (f - mean);
    var /= 4.0;
    const double latest = tail.back();
    return var <= static_cast<double>(n) * 1e-8 / (1.0 + std::abs(latest));
}

namespace {

using SteadyClock = std::chrono::steady_clock;

constexpr double kVirtualSecondsPerUnit = 1e-9;

double seconds_since(SteadyClock::time_point start)
{
    return std::chrono::duration<double>(SteadyClock::now() - start).count();
}

/// Virtual cost model, in abstract work units: one multiply-add per feature
/// entry touched.
struct CostModel {
    Eigen::Index n;

    double gradient(const Shard& s) const { return static_cast<double>(s.size() * n); }
    double vector_op() const { return static_cast<double>(n); }
    double ens(std::size_t m) const
    {
        return static_cast<double>(n) * static_cast<double>(m) * std::ceil(std::log2(static_cast<double>(m) + 1.0));
    }
    double mean(std::size_t count) const { return static_cast<double>(n) * static_cast<double>(count); }
};

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<Shard>& shards,
                                const IterationObserver& observer)
{
    cfg.validate();
    require(shards.size() == cfg.m, "one shard per client is required");
    for (const auto& s : shards) validate(s);
    const Eigen::Index n = shards.front().dim();
    for (const auto& s : shards) require(s.dim() == n, "all shards must share the feature dimension");

    const std::size_t m = cfg.m;
    const int k0 = cfg.k0;
    const PenaltyConfig penalty = cfg.effective_penalty();
    penalty.validate();
    const bool virtual_clock = cfg.clock == ClockMode::Virtual;
    const CostModel cost{n};

    RandomStream server_rng(mix_seed(cfg.seed, 0));
    std::vector<RandomStream> client_rng;
    client_rng.reserve(m);
    for (std::size_t i = 0; i < m; ++i) client_rng.emplace_back(mix_seed(cfg.seed, 1 + i));

    ClientSelector selector(cfg.selection, m, cfg.rho, cfg.s0, server_rng);
    const auto objectives = objectives_from(shards);
    std::vector<double> r_bounds(m);
    for (std::size_t i = 0; i < m; ++i) r_bounds[i] = lipschitz_bound(shards[i]);

    MonitorParams monitor_params{penalty, cfg.dp, selector.window()};
    WorkerPool pool(cfg.workers);

    ExperimentResult result;
    result.convergence.s0_nominal = selector.window_is_nominal();
    auto& clients = result.clients;
    clients.reserve(m);
    std::vector<ClientHyper> hyper(m, cfg.client);
    std::vector<double> delta_max(m, 0.0);
    double tct = 0.0;

    // Initial uploads z_i^0 = w_i^0 + eps_i^0.
    {
        const auto start = SteadyClock::now();
        for (std::size_t i = 0; i < m; ++i) {
            clients.push_back(ClientState::initial(n, cfg.client));
            auto& c = clients.back();
            double b = 0.0;
            if (cfg.dp.enabled && !cfg.stub_local_steps) {
                const ModelVector g = logistic_value_grad(c.w_local, shards[i]).grad;
                b = noise_scale(g, c.w_local, c.w_local, -1, cfg.dp, c.hyper);
                delta_max[i] = 2.0 * g.lpNorm<1>();
                tct += kVirtualSecondsPerUnit * cost.gradient(shards[i]);
            }
            auto up = perturb(c.w_local, b, client_rng[i], i, 0);
            c.z_uploaded = std::move(up.z);
            c.last_noise = std::move(up.record);
        }
        if (!virtual_clock) tct = seconds_since(start);
    }

    ModelVector w_global = ModelVector::Zero(n);
    ModelVector w_global_prev;
    bool have_global_prev = false;
    std::vector<ModelVector> W_prev;
    std::vector<ModelVector> g_cache(m, ModelVector::Zero(n));
    std::vector<double> period_time(m, 0.0);
    std::vector<double> iter_time(m, 0.0);
    std::vector<std::size_t> selected;
    std::vector<double> history;
    long cr = 0;
    double f_over_m = 0.0;
    double grad_sq = 0.0;
    bool stopped = false;

    auto close_period = [&](RoundTrace& round) {
        if (round.selected.empty()) return;
        double total = 0.0, worst = 0.0;
        for (std::size_t i : round.selected) {
            total += period_time[i];
            worst = std::max(worst, period_time[i]);
        }
        round.lct_s = total / static_cast<double>(round.selected.size());
        round.lct_max_s = worst;
    };

    auto current_lct = [&]() {
        if (selected.empty()) return 0.0;
        double total = 0.0;
        for (std::size_t i : selected) total += period_time[i];
        return total / static_cast<double>(selected.size());
    };

    auto current_snr = [&]() {
        std::vector<SnrInput> finals;
        finals.reserve(m);
        for (const auto& c : clients) finals.push_back({&c.w_local, &c.last_noise.noise});
        return snr(finals);
    };

    auto record = [&](long k, bool include_monitor) {
        IterationRow row;
        row.iter = k;
        row.tau = k / k0;
        row.cr = cr;
        row.f_over_m = f_over_m;
        row.grad_sq = grad_sq;
        row.lct_s = current_lct();
        row.tct_s = tct;
        row.snr = current_snr();
        if (include_monitor) {
            const auto& rec = result.convergence.records.back();
            row.F = rec.F;
            row.L_surrogate = rec.L_surrogate;
            row.dW_sq = rec.dW_sq;
            row.dw_global_sq = rec.dw_global_sq;
        } else {
            row.F = row.L_surrogate = row.dW_sq = row.dw_global_sq = std::numeric_limits<double>::quiet_NaN();
        }
        result.rows.push_back(row);
    };

    auto run_monitor = [&](long k) {
        if (!cfg.monitor) return;
        std::vector<ModelVector> W(m);
        double min_mu = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            W[i] = clients[i].w_local;
            min_mu = std::min(min_mu, clients[i].mu);
        }
        MonitorSnapshot snap;
        snap.w_global = &w_global;
        snap.w_global_prev = have_global_prev ? &w_global_prev : nullptr;
        snap.W = W;
        snap.W_prev = W_prev;
        snap.hyper = hyper;
        snap.delta_max = delta_max;
        snap.min_mu = min_mu;
        monitor_step(result.convergence, snap, r_bounds, objectives, monitor_params, k);
    };

    long k = 0;
    for (; k < cfg.max_iterations; ++k) {
        const bool communicate = is_communication_iteration(k, k0);
        const bool upload = is_communication_iteration(k + 1, k0);
        std::vector<ClientState> before;
        if (observer) before = clients;

        if (communicate) {
            if (!result.rounds.empty()) close_period(result.rounds.back());

            const auto start = SteadyClock::now();
            const long next_round = (k + 1) / k0;
            if (next_round == 0) {
                selected.resize(m);
                std::iota(selected.begin(), selected.end(), std::size_t{0});
            } else {
                selected = selector.next(server_rng);
            }

            double server_units = 0.0;
            if (cfg.algorithm == Algorithm::FedEpm) {
                std::vector<ModelVector> uploads(m);
                for (std::size_t i = 0; i < m; ++i) uploads[i] = clients[i].z_uploaded;
                w_global = fedepm_aggregate(uploads, penalty);
                server_units = cost.ens(m);
            } else {
                std::vector<ModelVector> uploads;
                uploads.reserve(selected.size());
                for (std::size_t i : selected) uploads.push_back(clients[i].z_uploaded);
                w_global = mean_aggregate(uploads);
                server_units = cost.mean(selected.size());
            }
            tct += virtual_clock ? kVirtualSecondsPerUnit * server_units : seconds_since(start);
            ++cr;

            const auto fg = global_objective(w_global, shards);
            f_over_m = fg.value / static_cast<double>(m);
            grad_sq = fg.grad.squaredNorm();
            history.push_back(fg.value);

            RoundTrace round;
            round.tau = k / k0;
            round.k = k;
            round.cr = cr;
            round.f_over_m = f_over_m;
            round.grad_sq = grad_sq;
            round.tct_s = tct;
            round.selected = selected;
            result.rounds.push_back(std::move(round));

            bool stop = false;
            if (cfg.stop_rule == StopRule::Combined) stop = should_stop(history, grad_sq, n);
            if (cfg.stop_rule == StopRule::GradientOnly) stop = grad_sq < 1e-6;
            if (stop) {
                result.reason = grad_sq < 1e-6 ? StopReason::GradientSmall : StopReason::ObjectiveStalled;
                result.rounds.back().selected.clear();
                selected.clear();
                run_monitor(k);
                record(k, cfg.monitor);
                stopped = true;
                break;
            }

            std::fill(period_time.begin(), period_time.end(), 0.0);
            if (!cfg.stub_local_steps) {
                const auto bcast_start = SteadyClock::now();
                pool.parallel_for(selected.size(), [&](std::size_t slot) {
                    const std::size_t i = selected[slot];
                    const auto t0 = SteadyClock::now();
                    g_cache[i] = logistic_value_grad(w_global, shards[i]).grad;
                    period_time[i] += virtual_clock ? kVirtualSecondsPerUnit * cost.gradient(shards[i])
                                                    : seconds_since(t0);
                });
                if (virtual_clock) {
                    for (std::size_t i : selected) tct += period_time[i];
                } else {
                    tct += seconds_since(bcast_start);
                }
            }
        }

        run_monitor(k);

        std::vector<ModelVector> W_now;
        if (cfg.monitor) {
            W_now.resize(m);
            for (std::size_t i = 0; i < m; ++i) W_now[i] = clients[i].w_local;
        }

        const auto phase_start = SteadyClock::now();
        if (!cfg.stub_local_steps) {
            pool.parallel_for(selected.size(), [&](std::size_t slot) {
                const std::size_t i = selected[slot];
                const auto t0 = SteadyClock::now();
                const Shard& shard = shards[i];
                ClientState& c = clients[i];
                const ModelVector w_prev_local = c.w_local;
                double units = 0.0;

                switch (cfg.algorithm) {
                case Algorithm::FedEpm:
                    c = fedepm_client_update(c, w_global, g_cache[i], k, penalty);
                    units += cost.vector_op();
                    break;
                case Algorithm::SFedAvg: {
                    const double step = baseline_step(cfg.baseline, shard.size(), k, k0);
                    c = sfedavg_client_update(c, w_global, shard, k, k0, step);
                    // At k in K the gradient at the broadcast point is the cached one.
                    units += (communicate ? 0.0 : cost.gradient(shard)) + cost.vector_op();
                    break;
                }
                case Algorithm::SFedProx: {
                    const double step = baseline_step(cfg.baseline, shard.size(), k, k0);
                    c = sfedprox_client_update(c, w_global, shard, k, k0, cfg.baseline, step);
                    const int fresh = cfg.baseline.inner_steps - (communicate ? 1 : 0);
                    units += fresh * cost.gradient(shard) + cfg.baseline.inner_steps * 2 * cost.vector_op();
                    break;
                }
                }

                if (upload) {
                    const double b = noise_scale(g_cache[i], w_prev_local, w_global, k, cfg.dp, c.hyper);
                    if (cfg.dp.enabled) delta_max[i] = std::max(delta_max[i], 2.0 * g_cache[i].lpNorm<1>());
                    auto up = perturb(c.w_local, b, client_rng[i], i, (k + 1) / k0);
                    c.z_uploaded = std::move(up.z);
                    c.last_noise = std::move(up.record);
                    units += cost.vector_op();
                }
                iter_time[i] = virtual_clock ? kVirtualSecondsPerUnit * units : seconds_since(t0);
                period_time[i] += iter_time[i];
            });
        } else if (upload) {
            for (std::size_t i : selected) clients[i].z_uploaded = clients[i].w_local;
        }

        if (virtual_clock) {
            for (std::size_t i : selected) tct += iter_time[i];
        } else {
            tct += seconds_since(phase_start);
        }

        if (observer) {
            IterationEvent ev;
            ev.k = k;
            ev.aggregated = communicate;
            ev.uploaded = upload;
            ev.selected = selected;
            ev.before = before;
            ev.after = clients;
            ev.w_global = &w_global;
            observer(ev);
        }

        record(k, cfg.monitor);

        if (cfg.monitor) W_prev = std::move(W_now);
        w_global_prev = w_global;
        have_global_prev = true;
    }

    if (!stopped) {
        result.reason = StopReason::BudgetExhausted;
        if (!result.rounds.empty()) close_period(result.rounds.back());
    }
    result.budget_exhausted = !stopped;
    result.iterations = stopped ? k + 1 : cfg.max_iterations;
    result.w_final = w_global;
    result.f_over_m = f_over_m;
    result.grad_sq = grad_sq;
    result.snr = current_snr();
    result.tct_s = tct;
    return result;
}

TimingMetrics timing_metrics(const ExperimentResult& result)
{
    TimingMetrics out;
    out.cr = result.rounds.empty() ? 0 : result.rounds.back().cr;
    out.tct_s = result.tct_s;
    double total = 0.0;
    std::size_t periods = 0;
    for (const auto& r : result.rounds) {
        if (r.selected.empty()) continue;
        total += r.lct_s;
        out.lct_max_s = std::max(out.lct_max_s, r.lct_max_s);
        ++periods;
    }
    out.lct_mean_s = periods > 0 ? total / static_cast<double>(periods) : 0.0;
    return out;
}

void write_trace_csv(std::ostream& out, const ExperimentResult& result)
{
    out << kTraceHeader << '\n';
    for (const auto& r : result.rows) {
        out << r.iter << ',' << r.tau << ',' << r.cr << ',' << format_double(r.f_over_m) << ','
            << format_double(r.grad_sq) << ',' << format_double(r.F) << ',' << format_double(r.L_surrogate) << ','
            << format_double(r.dW_sq) << ',' << format_double(r.dw_global_sq) << ',' << format_double(r.lct_s)
            << ',' << format_double(r.tct_s) << ',' << format_double(r.snr) << '\n';
    }
}

} // namespace fedepm
