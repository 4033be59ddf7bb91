#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tfm.hpp"

namespace feesim {

// How "truthful" bidding maps a value to a bid. Posted-price style mechanisms
// use Clip (bid the posted price when the value covers it, the value
// otherwise); everything else defaults to the identity.
enum class BidConvention { Truthful, Clip };

struct AuditConfig {
    double tick = 0.0;       // 0 -> 1e-3 * max amount in the instance
    int fake_budget = 1;
    int cartel_size = 1;
    double gamma = 1.0;      // strict-utility discount
    bool strict = false;     // charge deviation-introduced unconfirmed bids
    double tolerance = 0.0;  // 0 -> 1e-9 * max amount
    std::optional<BidConvention> convention;
    std::vector<double> extra_grid;
};

struct DeviationWitness {
    int actor = -1;              // deviating user index; -1 for the miner
    std::vector<int> cartel;     // user indices in the colluding set
    std::vector<Bid> bids;       // full bid profile, fakes included
    std::vector<int> included;   // indices into bids the miner put in the block; -1 sentinel unused
    bool honest_inclusion = true;
    std::string note;
};

struct DeviationReport {
    std::string notion;
    bool strict = false;
    double gamma = 1.0;
    double honest_utility = 0.0;
    double best_utility = 0.0;
    double gain = 0.0;  // max(best - honest, 0)
    DeviationWitness witness;
};

// u + gamma * sum_i min(u_i, 0) over would-be utilities of included-but-
// unconfirmed bids.
double gamma_strict_utility(double base_utility, std::span<const double> unconfirmed_outcomes,
                            double gamma);

// Truthful bid profile for the mechanism under the given convention.
std::vector<Bid> honest_bids(const MechanismSpec& spec, const std::vector<double>& values,
                             const AuditConfig& config);

// Candidate deviation bids: every value, every honest bid, the posted prices,
// each of those +- one tick, zero, and any extras.
std::vector<double> build_grid(const MechanismSpec& spec, const std::vector<double>& values,
                               const AuditConfig& config);

DeviationReport audit_uic(const MechanismSpec& spec, const std::vector<double>& values,
                          const AuditConfig& config);
DeviationReport audit_mmic(const MechanismSpec& spec, const std::vector<Bid>& bids,
                           const AuditConfig& config);
DeviationReport audit_oca(const MechanismSpec& spec, const std::vector<double>& values,
                          const AuditConfig& config);

// Re-evaluates a witness and returns the utility it achieves for its notion.
double replay_witness(const MechanismSpec& spec, const DeviationReport& report,
                      const std::vector<double>& values, const AuditConfig& config);

inline constexpr double kNoConfirmingBid = std::numeric_limits<double>::infinity();

// Minimal bid that confirms against b_others; +inf marker when no bid up to
// value_cap confirms. Grid scan plus bisection to tick precision.
double min_confirming_bid(const MechanismSpec& spec, const std::vector<double>& b_others,
                          double value_cap, double tick);
double min_confirming_bid_fn(const std::function<double(double)>& confirm, double value_cap,
                             double tick);

// (p^t - p^*) / p^t, or 0 when v_i < p^*.
double discount_ratio(const MechanismSpec& spec, double v_i, const std::vector<double>& b_others,
                      const AuditConfig& config);

enum class ValueDist { Uniform01, Exponential1 };
enum class NearlyMode { Avg, Max };
enum class NearlyKind { Discount, Strategic };

struct NearlyIcEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
};

NearlyIcEstimate estimate_nearly_ic(const MechanismSpec& spec, ValueDist dist, int n, long trials,
                                    NearlyMode mode, NearlyKind kind, std::uint64_t seed);

struct CostlyScenario {
    std::vector<Bid> real_bids;
    double fake_amount = 0.0;
};

// Minimal per-confirmed-fake utility loss for a miner injecting one fake bid.
double alpha_costly_margin(const MechanismSpec& spec, const std::vector<CostlyScenario>& scenarios);

std::string report_to_json(const DeviationReport& report);

}  // namespace feesim
