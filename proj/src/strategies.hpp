#pragma once

#include <functional>
#include <vector>

#include "chain.hpp"

namespace feesim {

struct ClaimRule {
    enum class Kind { Fraction, Amount };
    Kind kind = Kind::Fraction;
    double value = 1.0;

    static ClaimRule fraction(double f) { return {Kind::Fraction, f}; }
    static ClaimRule amount(double a) { return {Kind::Amount, a}; }
};

struct StrategyAction {
    BlockId mine_target = kNoBlock;
    ClaimRule claim;
    std::vector<BlockId> publish_now;  // own unpublished blocks to announce
};

// Inputs to the H vs H-1 fork decision shared by the undercutting strategies.
struct ForkDecisionInputs {
    BlockId top = kNoBlock;    // b* at height H (max remaining fees)
    BlockId below = kNoBlock;  // b* at height H-1
    double r_top = 0.0;        // R(b*_H)
    double r_below = 0.0;      // R(b*_{H-1})
    double delta = 0.0;        // r_below - r_top
    bool owns_top = false;
};

// Computes b*_H, b*_{H-1} and the fee deltas from a miner's view. When no
// block exists at height H-1 (genesis-only view) `below` is kNoBlock and the
// caller must extend.
ForkDecisionInputs fork_inputs(const MinerView& view, const FeePool& pool);

// A monotonically nondecreasing map on fee amounts, validated on construction.
class FeeMap {
public:
    FeeMap(std::function<double(double)> fn, double domain_max);
    double operator()(double x) const { return fn_(x); }

    static FeeMap identity(double domain_max);
    static FeeMap linear(double k, double domain_max);
    static FeeMap equilibrium(double gamma, double domain_max);

private:
    std::function<double(double)> fn_;
};

StrategyAction decide_honest(const MinerView& view, const FeePool& pool, double now);
StrategyAction decide_petty_compliant(const MinerView& view, const FeePool& pool, double now);
StrategyAction decide_lazy_fork(const MinerView& view, const FeePool& pool, double now);
StrategyAction decide_function_fork(const MinerView& view, const FeePool& pool, double now,
                                    const FeeMap& f);
// chi: the miner's hash share, in (0,1).
StrategyAction decide_fee_snipe(const MinerView& view, const FeePool& pool, double now, double chi);
// beta: publish threshold on a found block's claimed fees; +inf reproduces the
// plain withholding miner.
StrategyAction decide_selfish(const MinerView& view, const FeePool& pool, double now, double beta);

}  // namespace feesim
