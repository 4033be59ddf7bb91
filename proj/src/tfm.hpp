#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace feesim {

enum class Mech {
    FirstPrice,
    SecondPrice,
    Monopolistic,
    PostedPrice,
    Eip1559,
    TiplessEip1559,
    BurningSecondPrice,
};

struct MechanismSpec {
    Mech kind = Mech::FirstPrice;
    int block_size = 1;   // B
    int k = 1;            // confirmed count (second-price, burning second-price)
    double posted = 0.0;  // posted/base price p
    double sigma = 0.0;   // fixed tip (tipless)
    double gamma = 1.0;   // burning second-price discount
    int cartel_cap = 1;   // c, burning second-price
};

void validate(const MechanismSpec& spec);
std::string mech_name(Mech kind);
Mech mech_from_string(const std::string& name);

struct Bid {
    int bidder = 0;
    double amount = 0.0;
    bool fake = false;  // audit bookkeeping only; mechanisms never read it
};

// Evaluation result, aligned with the input bid vector. For randomized
// mechanisms in expected mode, `included`/`confirmed` are probabilities and
// `payments` are expectations. `would_be_payment[i]` is what bid i would pay
// if it were confirmed (defined for included bids).
struct TfmOutcome {
    std::vector<double> included;
    std::vector<double> confirmed;
    std::vector<double> payments;
    std::vector<double> would_be_payment;
    // Portion of would_be_payment[i] that would reach the miner (payments are
    // partly burned under EIP-1559-style rules). Used by the strict-utility
    // accounting of colluding users' unconfirmed bids.
    std::vector<double> would_be_miner_gain;
    double miner_revenue = 0.0;
    double burned = 0.0;

    double total_payments() const;
};

enum class EvalMode { Expected, Seeded };

// Honest evaluation: inclusion rule I, then C/P/M.
TfmOutcome eval(const MechanismSpec& spec, const std::vector<Bid>& bids,
                EvalMode mode = EvalMode::Expected, std::uint64_t seed = 0);

// C/P/M applied to a miner-chosen block (used by deviation audits). The
// `block` is what the miner included; |block| must not exceed B.
TfmOutcome eval_included(const MechanismSpec& spec, const std::vector<Bid>& block,
                         EvalMode mode = EvalMode::Expected, std::uint64_t seed = 0);

// Named wrappers for the individual mechanisms.
TfmOutcome eval_first_price(const std::vector<Bid>& bids, int block_size);
TfmOutcome eval_second_price(const std::vector<Bid>& bids, int block_size, int k);
TfmOutcome eval_monopolistic(const std::vector<Bid>& bids, int block_size);
TfmOutcome eval_posted_price(const std::vector<Bid>& bids, int block_size, double p);
TfmOutcome eval_eip1559(const std::vector<Bid>& bids, int block_size, double p);
TfmOutcome eval_tipless_eip1559(const std::vector<Bid>& bids, int block_size, double p,
                                double sigma);
TfmOutcome eval_burning_second_price(const std::vector<Bid>& bids, int block_size, int k,
                                     double gamma, double c, std::uint64_t seed,
                                     EvalMode mode = EvalMode::Seeded);

// Allocation probability of a probing bid z against fixed other bids. The
// probe is ranked after equal amounts (it gets the highest bidder id).
double confirm_prob(const MechanismSpec& spec, const std::vector<double>& b_others, double z);

// Myerson payment for a monotone allocation rule x(z) in [0,1].
// Deterministic rule: min z in [0, b_i] with x(z) = 1, bisection to 1e-9.
// Randomized rule: b_i*x(b_i) - integral_0^{b_i} x(t) dt, adaptive quadrature.
double myerson_payment(const std::function<double(double)>& allocation, double b_i,
                       bool randomized);

// JSON bindings for the CLI surface.
MechanismSpec mechanism_from_json(const std::string& json_text);
std::vector<Bid> bids_from_json(const std::string& json_text);
std::string outcome_to_json(const MechanismSpec& spec, const std::vector<Bid>& bids,
                            const TfmOutcome& out);
std::string outcome_to_csv(const std::vector<Bid>& bids, const TfmOutcome& out);

}  // namespace feesim
