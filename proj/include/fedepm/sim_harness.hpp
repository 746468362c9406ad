#pragma once

// Round-driven simulation of FedEPM and the two baselines.
//
// Iteration clock: k = 0, 1, 2, ...; communication iterations are K = {0, k0, 2k0, ...}.
// At k in K the server selects clients, aggregates the stored uploads and
// broadcasts. Selected clients update every iteration of the period and
// perturb-and-upload at the end of it (k + 1 in K). Unselected clients hold.

#include "fedepm/diagnostics.hpp"
#include "fedepm/fed_algorithms.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fedepm {

enum class Algorithm { FedEpm, SFedAvg, SFedProx };
enum class SelectionPolicy { Iid, Coverage };
enum class ClockMode { Virtual, Wall };
enum class StopRule { Combined, GradientOnly, Never };
enum class StopReason { GradientSmall, ObjectiveStalled, BudgetExhausted };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& text);

struct ExperimentConfig {
    Algorithm algorithm{Algorithm::FedEpm};
    std::size_t m{50};
    int k0{12};
    double rho{0.5};
    DpConfig dp{0.1, true};
    SelectionPolicy selection{SelectionPolicy::Iid};
    std::optional<int> s0;
    long max_iterations{20000};
    std::uint64_t seed{1};
    /// When set, lambda = eta/2 and eta = (0.02 m + 1)(rho + 0.1) 1e-5.
    bool auto_penalty{true};
    PenaltyConfig penalty;
    BaselineConfig baseline;
    ClientHyper client;
    StopRule stop_rule{StopRule::Combined};
    ClockMode clock{ClockMode::Virtual};
    bool monitor{true};
    /// Test hook: clients skip all local work.
    bool stub_local_steps{false};
    std::size_t workers{1};

    void validate() const;
    PenaltyConfig effective_penalty() const;
    std::size_t selection_size() const;
};

/// max(1, round(rho m)) distinct ids drawn uniformly without replacement, ascending.
std::vector<std::size_t> select_clients_iid(RandomStream& rng, std::size_t m, double rho);

/// Stateful selection. The coverage policy shuffles [m] once into s0 blocks
/// and serves them round-robin, so every s0 consecutive rounds cover [m].
class ClientSelector {
public:
    ClientSelector(SelectionPolicy policy, std::size_t m, double rho, std::optional<int> s0, RandomStream& rng);

    std::vector<std::size_t> next(RandomStream& rng);
    /// Coverage window, or ceil(1/rho) for the iid policy.
    int window() const { return window_; }
    bool window_is_nominal() const { return policy_ == SelectionPolicy::Iid; }

private:
    SelectionPolicy policy_;
    std::size_t m_;
    double rho_;
    int window_;
    std::vector<std::vector<std::size_t>> blocks_;
    std::size_t cursor_{0};
};

/// True iff grad_sq < 1e-6, or the last four objective values have population
/// variance <= n 1e-8 / (1 + |latest|).
bool should_stop(std::span<const double> history, double grad_sq, Eigen::Index n);

struct RoundTrace {
    long tau{0};
    long k{0};
    long cr{0};
    double f_over_m{0.0};
    double grad_sq{0.0};
    double tct_s{0.0};
    /// Mean over selected clients of their local time in this period.
    double lct_s{0.0};
    double lct_max_s{0.0};
    std::vector<std::size_t> selected;
};

struct IterationRow {
    long iter{0};
    long tau{0};
    long cr{0};
    double f_over_m{0.0};
    double grad_sq{0.0};
    double F{0.0};
    double L_surrogate{0.0};
    double dW_sq{0.0};
    double dw_global_sq{0.0};
    double lct_s{0.0};
    double tct_s{0.0};
    double snr{0.0};
};

struct TimingMetrics {
    long cr{0};
    double tct_s{0.0};
    double lct_mean_s{0.0};
    double lct_max_s{0.0};
};

struct ExperimentResult {
    ModelVector w_final;
    std::vector<RoundTrace> rounds;
    ConvergenceTrace convergence;
    std::vector<IterationRow> rows;
    std::vector<ClientState> clients;
    StopReason reason{StopReason::BudgetExhausted};
    bool budget_exhausted{true};
    /// Iterations entered, counting the one whose aggregation triggered the stop.
    long iterations{0};
    double f_over_m{0.0};
    double grad_sq{0.0};
    double snr{kInfiniteSnr};
    double tct_s{0.0};
};

/// Everything an observer may inspect after iteration k finished.
struct IterationEvent {
    long k{0};
    bool aggregated{false};
    bool uploaded{false};
    std::span<const std::size_t> selected;
    std::span<const ClientState> before;
    std::span<const ClientState> after;
    const ModelVector* w_global{nullptr};
};

using IterationObserver = std::function<void(const IterationEvent&)>;

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::vector<Shard>& shards,
                                const IterationObserver& observer = {});

TimingMetrics timing_metrics(const ExperimentResult& result);

inline constexpr const char* kTraceHeader =
    "iter,tau,cr,f_over_m,grad_sq,F,L_surrogate,dW_sq,dw_global_sq,lct_s,tct_s,snr";

void write_trace_csv(std::ostream& out, const ExperimentResult& result);

} // namespace fedepm
