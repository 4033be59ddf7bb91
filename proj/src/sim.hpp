#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chain.hpp"
#include "strategies.hpp"

namespace feesim {

enum class StrategyKind { Honest, PettyCompliant, LazyFork, FunctionFork, FeeSnipe, Selfish };

struct FunctionForkSpec {
    enum class F { Identity, Linear, Equilibrium };
    F f = F::Identity;
    double k = 1.0;      // for Linear
    double gamma = 0.2;  // for Equilibrium
};

struct MinerSpec {
    std::string name;
    StrategyKind kind = StrategyKind::Honest;
    double hash_share = 0.0;
    double beta = std::numeric_limits<double>::infinity();  // Selfish publish threshold
    FunctionForkSpec function_fork;
};

struct FeeValueDist {
    enum class Kind { Fixed, Exponential };
    Kind kind = Kind::Fixed;
    double param = 1.0;  // fixed value, or mean of the exponential
};

struct Horizon {
    enum class Kind { Blocks, Time };
    Kind kind = Kind::Blocks;
    double value = 1000;
};

struct SimConfig {
    std::vector<MinerSpec> miners;
    double fee_rate = 1.0;  // Poisson arrival rate
    FeeValueDist fee_value;
    double block_rate = 1.0;  // total discovery rate
    double gamma = 0.0;       // race split
    double mining_cost_rate = 0.0;
    std::optional<double> block_fee_cap;  // per-block claimed-value cap, off by default
    Horizon horizon;
    std::uint64_t seed = 0;
    bool record_trace = false;
};

void validate(const SimConfig& config);

struct MinerReport {
    std::string name;
    double reward = 0.0;
    double share = 0.0;
    long blocks_found = 0;
    long blocks_on_chain = 0;
};

struct TraceEvent {
    double time;
    std::string kind;  // "found" | "published"
    BlockId block;
    int miner;
    int height;
    double value;
};

struct SimReport {
    std::vector<MinerReport> miners;
    long orphans = 0;
    long forks = 0;
    long main_chain_length = 0;
    double total_reward = 0.0;
    std::uint64_t seed = 0;
    std::vector<TraceEvent> trace;
    std::string tree_jsonl;  // final block tree, only when tracing
    std::string pool_jsonl;  // final fee pool, only when tracing
    double final_time = 0.0;
};

SimReport run_sim(const SimConfig& config);

// One withholding miner with share alpha against an aggregate honest rest.
// Returns the withholding miner's share of fees claimed on the main chain.
// beta = +inf reproduces the plain selfish miner.
double estimate_selfish_reward(double alpha, double gamma, double beta, long n_blocks,
                               std::uint64_t seed);

// Biased random walk from z, decrement w.p. q, absorbed at -1.
// Returns the fraction of trials absorbed within max_steps.
double run_whale_walk(double q, int z, long trials, std::uint64_t seed,
                      long max_steps = 1000000);

struct GapBin {
    double lo = 0.0;
    double hi = 0.0;
    double avg_backlog = 0.0;  // mean unclaimed fee value at this lag
    double profit_rate = 0.0;  // block_rate * avg_backlog - mining_cost_rate
    double time_in_bin = 0.0;
};

// Expected net profit rate per time-since-last-block bin for an honest chain.
std::vector<GapBin> mining_gap_profile(const SimConfig& config, int bins, double bin_width = 0.0);

struct WhaleAdjudication {
    double delta_statement = 0.0;
    double delta_proof = 0.0;
    double delta_mc = 0.0;       // crossover implied by Monte Carlo walk estimates
    std::string selected;        // "statement" | "proof"
    double rel_err_statement = 0.0;
    double rel_err_proof = 0.0;
};

// Decides which delta-threshold variant matches the Monte Carlo expected-reward
// crossover (the two circulating forms disagree on a denominator).
WhaleAdjudication adjudicate_whale_variant(double chi_a, double chi_x, int z, long trials,
                                           std::uint64_t seed);

// JSON/CSV bindings for the external interfaces.
SimConfig sim_config_from_json(const std::string& json_text);
std::string sim_report_to_json(const SimReport& report);
std::string sim_report_to_csv(const SimReport& report);
std::string gap_profile_to_csv(const std::vector<GapBin>& bins);

}  // namespace feesim
